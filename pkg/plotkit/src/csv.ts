// Minimal CSV handling for the fixed schemas admmcert emits: a header
// row, comma separation, no quoting, `NA` for absent values.

export interface Table {
  header: string[];
  rows: string[][];
}

export class SchemaError extends Error {}

export function parseCsv(text: string): Table {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new SchemaError('empty CSV: no header row');
  }
  const header = lines[0].split(',');
  const rows = lines.slice(1).map((line) => line.split(','));
  for (const row of rows) {
    if (row.length !== header.length) {
      throw new SchemaError(
        `row has ${row.length} fields, header has ${header.length}`,
      );
    }
  }
  return { header, rows };
}

export function mergeTables(tables: Table[]): Table {
  const [first, ...rest] = tables;
  for (const table of rest) {
    if (table.header.join(',') !== first.header.join(',')) {
      throw new SchemaError(
        `input headers disagree: "${first.header.join(',')}" vs "${table.header.join(',')}"`,
      );
    }
  }
  return { header: first.header, rows: tables.flatMap((t) => t.rows) };
}

export function requireColumns(table: Table, names: string[]): Map<string, number> {
  const index = new Map<string, number>();
  for (const name of names) {
    const at = table.header.indexOf(name);
    if (at < 0) {
      throw new SchemaError(
        `missing column "${name}" (have: ${table.header.join(', ')})`,
      );
    }
    index.set(name, at);
  }
  if (table.rows.length === 0) {
    throw new SchemaError('empty CSV: header only, no data rows');
  }
  return index;
}

// Returns NaN for the NA token so callers can skip absent points.
export function numeric(field: string): number {
  if (field === 'NA') return NaN;
  const value = Number(field);
  if (Number.isNaN(value)) {
    throw new SchemaError(`non-numeric field "${field}"`);
  }
  return value;
}
