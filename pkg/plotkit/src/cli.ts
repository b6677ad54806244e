#!/usr/bin/env node
// plotkit render --figure N --in results.csv [more.csv ...] --out fig.svg

import { readFileSync, writeFileSync } from 'fs';
import { SchemaError } from './csv';
import { renderFigure } from './figures';

const USAGE =
  'usage: plotkit render --figure N --in <csv...> --out <svg>';

interface Args {
  figure: number;
  inputs: string[];
  out: string;
}

function parseArgs(argv: string[]): Args {
  if (argv[0] !== 'render') {
    throw new UsageError(`unknown command "${argv[0] ?? ''}"`);
  }
  let figure: number | undefined;
  const inputs: string[] = [];
  let out: string | undefined;
  let i = 1;
  while (i < argv.length) {
    const flag = argv[i];
    if (flag === '--figure') {
      figure = Number(argv[++i]);
      i++;
    } else if (flag === '--in') {
      i++;
      while (i < argv.length && !argv[i].startsWith('--')) {
        inputs.push(argv[i]);
        i++;
      }
    } else if (flag === '--out') {
      out = argv[++i];
      i++;
    } else {
      throw new UsageError(`unknown flag "${flag}"`);
    }
  }
  if (figure === undefined || !Number.isInteger(figure)) {
    throw new UsageError('--figure N is required');
  }
  if (inputs.length === 0) {
    throw new UsageError('--in needs at least one CSV path');
  }
  if (out === undefined) {
    throw new UsageError('--out is required');
  }
  return { figure, inputs, out };
}

class UsageError extends Error {}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    if (err instanceof UsageError) {
      console.error(`error: ${err.message}`);
      console.error(USAGE);
      return 2;
    }
    throw err;
  }
  try {
    const texts = args.inputs.map((path) => readFileSync(path, 'utf8'));
    const svg = renderFigure(args.figure, texts);
    writeFileSync(args.out, svg);
    console.log(args.out);
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    if (err instanceof Error && 'code' in err) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
