// The six figure analogues. Each one reads a CSV schema produced by the
// admmcert CLI and turns it into a deterministic line chart.

import { mergeTables, numeric, parseCsv, requireColumns, SchemaError, Table } from './csv';
import { renderChart, Series } from './svg';

const RATE_COLUMNS = ['kappa', 'epsilon', 'tau_star', 'iters_proxy', 'tau_upper', 'tau_lower'];
const GRID_COLUMNS = ['alpha', 'rho', 'certified_tau', 'iterations', 'final_error'];
const MAX_LEGEND_SERIES = 6;

function groupBy(
  table: Table,
  keyCol: number,
): Map<number, string[][]> {
  const groups = new Map<number, string[][]>();
  for (const row of table.rows) {
    const key = numeric(row[keyCol]);
    if (!groups.has(key)) groups.set(key, []);
    groups.get(key)!.push(row);
  }
  return new Map([...groups.entries()].sort((a, b) => a[0] - b[0]));
}

function subsetKeys(keys: number[]): number[] {
  if (keys.length <= MAX_LEGEND_SERIES) return keys;
  const picked: number[] = [];
  for (let i = 0; i < MAX_LEGEND_SERIES; i++) {
    picked.push(keys[Math.round((i * (keys.length - 1)) / (MAX_LEGEND_SERIES - 1))]);
  }
  return picked;
}

function seriesFrom(
  rows: string[][],
  xCol: number,
  yCol: number,
  label: string,
  transform: (v: number) => number = (v) => v,
  dashed = false,
): Series {
  const points = rows
    .map((row) => ({ x: numeric(row[xCol]), y: transform(numeric(row[yCol])) }))
    .filter((p) => Number.isFinite(p.x) && Number.isFinite(p.y))
    .sort((a, b) => a.x - b.x);
  return { label, points, dashed };
}

function negInvLog(tau: number): number {
  if (!(tau > 0 && tau < 1)) return NaN;
  return -1.0 / Math.log(tau);
}

function rateCurveFigure(
  table: Table,
  yColumn: 'tau_star' | 'iters_proxy',
  title: string,
  yLabel: string,
  yLog: boolean,
): string {
  const cols = requireColumns(table, RATE_COLUMNS);
  const groups = groupBy(table, cols.get('epsilon')!);
  const series: Series[] = [];
  for (const [eps, rows] of groups) {
    series.push(
      seriesFrom(rows, cols.get('kappa')!, cols.get(yColumn)!, `epsilon = ${eps}`),
    );
  }
  return renderChart({
    title,
    xLabel: 'condition number kappa',
    yLabel,
    xLog: true,
    yLog,
    series,
  });
}

function boundsOverlayFigure(table: Table): string {
  const cols = requireColumns(table, RATE_COLUMNS);
  const groups = groupBy(table, cols.get('epsilon')!);
  const series: Series[] = [];
  for (const [eps, rows] of groups) {
    series.push(
      seriesFrom(
        rows,
        cols.get('kappa')!,
        cols.get('tau_star')!,
        `certified, epsilon = ${eps}`,
        negInvLog,
      ),
    );
    series.push(
      seriesFrom(
        rows,
        cols.get('kappa')!,
        cols.get('tau_lower')!,
        `worst case, epsilon = ${eps}`,
        negInvLog,
        true,
      ),
    );
  }
  return renderChart({
    title: 'Certified vs worst-case iteration proxy',
    xLabel: 'condition number kappa',
    yLabel: '-1 / log(rate)',
    xLog: true,
    yLog: true,
    series,
  });
}

function maxAlphaFigure(table: Table): string {
  const cols = requireColumns(table, ['kappa', 'alpha_max']);
  return renderChart({
    title: 'Largest certifiable over-relaxation',
    xLabel: 'condition number kappa',
    yLabel: 'alpha_max',
    xLog: true,
    yLog: false,
    series: [seriesFrom(table.rows, cols.get('kappa')!, cols.get('alpha_max')!, 'alpha_max')],
  });
}

function gridFigure(
  table: Table,
  yColumn: 'certified_tau' | 'iterations',
  title: string,
  yLabel: string,
  yLog: boolean,
): string {
  const cols = requireColumns(table, GRID_COLUMNS);
  const groups = groupBy(table, cols.get('alpha')!);
  const keep = new Set(subsetKeys([...groups.keys()]));
  const series: Series[] = [];
  for (const [alpha, rows] of groups) {
    if (!keep.has(alpha)) continue;
    series.push(
      seriesFrom(rows, cols.get('rho')!, cols.get(yColumn)!, `alpha = ${alpha}`),
    );
  }
  return renderChart({
    title,
    xLabel: 'step size rho',
    yLabel,
    xLog: true,
    yLog,
    series,
  });
}

export function renderFigure(figure: number, csvTexts: string[]): string {
  if (csvTexts.length === 0) {
    throw new SchemaError('at least one input CSV is required');
  }
  const table = mergeTables(csvTexts.map(parseCsv));
  switch (figure) {
    case 1:
      return rateCurveFigure(
        table, 'tau_star', 'Minimal certified rate', 'certified rate tau*', false,
      );
    case 2:
      return rateCurveFigure(
        table, 'iters_proxy', 'Iterations to fixed accuracy', '-1 / log(tau*)', true,
      );
    case 3:
      return boundsOverlayFigure(table);
    case 4:
      return maxAlphaFigure(table);
    case 5:
      return gridFigure(
        table, 'certified_tau', 'Certified rates over the parameter grid',
        'certified rate tau*', false,
      );
    case 6:
      return gridFigure(
        table, 'iterations', 'Iterations to reach the reference',
        'iterations', true,
      );
    default:
      throw new SchemaError(`unknown figure id ${figure} (expected 1-6)`);
  }
}
