// End-to-end acceptance for the frontend: generate real CSVs through
// the admmcert CLI, render all six figure analogues, and check the
// SVGs are byte-stable across reruns. Requires the primary package to
// be installed (its console script on PATH).

import { execFileSync } from 'child_process';
import { existsSync, mkdtempSync, readFileSync } from 'fs';
import { tmpdir } from 'os';
import { join } from 'path';
import { beforeAll, describe, expect, it } from 'vitest';
import { main } from '../src/cli';

const WORK = mkdtempSync(join(tmpdir(), 'plotkit-e2e-'));

function admmcert(args: string[]): void {
  execFileSync('admmcert', args, { stdio: 'pipe', timeout: 300_000 });
}

beforeAll(() => {
  admmcert([
    'rate-curve',
    '--epsilon-list', '0,0.5',
    '--alpha', '1.5',
    '--kappa-min', '10', '--kappa-max', '1000', '--points', '4',
    '--out', WORK,
  ]);
  admmcert(['max-alpha', '--epsilon', '0', '--kappa-list', '10,100', '--out', WORK]);
  admmcert([
    'lasso',
    '--scale', 'desk',
    '--seed', '7',
    '--grid-alphas', '3',
    '--grid-rhos', '4',
    '--budget', '300',
    '--out', WORK,
  ]);
}, 300_000);

const CASES: [number, string][] = [
  [1, 'rate_curve.csv'],
  [2, 'rate_curve.csv'],
  [3, 'rate_curve.csv'],
  [4, 'max_alpha.csv'],
  [5, 'lasso_certified.csv'],
  [6, 'lasso_iterations.csv'],
];

describe('figure analogues from real CLI outputs', () => {
  it('renders all six and is byte-stable', () => {
    for (const [figure, csv] of CASES) {
      const input = join(WORK, csv);
      expect(existsSync(input)).toBe(true);
      const first = join(WORK, `fig${figure}_a.svg`);
      const second = join(WORK, `fig${figure}_b.svg`);
      expect(main(['render', '--figure', String(figure), '--in', input, '--out', first])).toBe(0);
      expect(main(['render', '--figure', String(figure), '--in', input, '--out', second])).toBe(0);
      const bytes = readFileSync(first);
      expect(bytes.equals(readFileSync(second))).toBe(true);
      expect(bytes.toString('utf8')).toContain('</svg>');
    }
  }, 120_000);

  it('applies log axes where specified', () => {
    const fig2 = readFileSync(join(WORK, 'fig2_a.svg'), 'utf8');
    expect(fig2).toContain('kappa (log)');
    const fig6 = readFileSync(join(WORK, 'fig6_a.svg'), 'utf8');
    expect(fig6).toContain('rho (log)');
  });
});
