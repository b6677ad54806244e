import { describe, expect, it } from 'vitest';
import { SchemaError } from '../src/csv';
import { renderFigure } from '../src/figures';

const RATE_HEADER = 'kappa,epsilon,tau_star,iters_proxy,tau_upper,tau_lower';

function rateCsv(): string {
  const rows = [
    '10,0,0.64,2.24,0.76,0.64',
    '100,0,0.86,6.8,0.92,0.86',
    '1000,0,0.95,21.2,0.97,0.95',
    '10,0.5,0.86,6.8,0.93,0.86',
    '100,0.5,0.98,66,0.99,0.98',
    '1000,0.5,0.9985,666,0.999,0.9985',
  ];
  return `${RATE_HEADER}\n${rows.join('\n')}\n`;
}

function gridCsv(alphas: number[] = [0.5, 1.0, 1.5, 2.0]): string {
  const rows: string[] = [];
  for (const alpha of alphas) {
    for (const rho of [0.1, 1.0, 3.0]) {
      const tau = rho === 1.0 ? 0.93 : 0.97;
      const iters = rho === 1.0 ? 80 : 300;
      rows.push(`${alpha},${rho},${tau},${iters},1e-07`);
    }
  }
  return `alpha,rho,certified_tau,iterations,final_error\n${rows.join('\n')}\n`;
}

describe('renderFigure', () => {
  it('renders all six analogues without error', () => {
    const maxAlpha = 'kappa,alpha_max\n10,2.63\n100,2.3\n1000,2.1\n';
    for (const [figure, csv] of [
      [1, rateCsv()],
      [2, rateCsv()],
      [3, rateCsv()],
      [4, maxAlpha],
      [5, gridCsv()],
      [6, gridCsv()],
    ] as [number, string][]) {
      const svg = renderFigure(figure, [csv]);
      expect(svg.startsWith('<svg')).toBe(true);
      expect(svg.trimEnd().endsWith('</svg>')).toBe(true);
    }
  });

  it('is byte-stable across reruns', () => {
    for (const figure of [1, 2, 3, 4, 5, 6]) {
      const csv = figure === 4 ? 'kappa,alpha_max\n10,2.6\n100,2.2\n' : figure <= 3 ? rateCsv() : gridCsv();
      expect(renderFigure(figure, [csv])).toBe(renderFigure(figure, [csv]));
    }
  });

  it('uses log axes where the source figures do', () => {
    const fig2 = renderFigure(2, [rateCsv()]);
    expect(fig2).toContain('kappa (log)');
    expect(fig2).toContain('(log)</text>');
    const fig1 = renderFigure(1, [rateCsv()]);
    expect(fig1).toContain('kappa (log)');
    expect(fig1).not.toContain('tau* (log)');
    const fig6 = renderFigure(6, [gridCsv()]);
    expect(fig6).toContain('rho (log)');
    expect(fig6).toContain('iterations (log)');
  });

  it('overlays dashed worst-case curves on figure 3', () => {
    const svg = renderFigure(3, [rateCsv()]);
    expect(svg).toContain('stroke-dasharray');
    expect(svg).toContain('certified, epsilon = 0');
    expect(svg).toContain('worst case, epsilon = 0.5');
  });

  it('reports the missing column on schema mismatch', () => {
    const bad = 'kappa,tau_star\n10,0.9\n';
    expect(() => renderFigure(1, [bad])).toThrow(/missing column "epsilon"/);
  });

  it('rejects empty csv', () => {
    expect(() => renderFigure(1, [''])).toThrow(SchemaError);
    expect(() => renderFigure(4, ['kappa,alpha_max\n'])).toThrow(/no data rows/);
  });

  it('skips NA points', () => {
    const csv =
      `${RATE_HEADER}\n10,0,NA,NA,0.76,0.64\n100,0,0.86,6.8,0.92,0.86\n1000,0,0.95,21.2,0.97,0.95\n`;
    const svg = renderFigure(2, [csv]);
    expect(svg).toContain('polyline');
  });

  it('legend keeps a subset when many alphas are present', () => {
    const alphas = Array.from({ length: 15 }, (_, i) => 0.1 + 0.15 * i);
    const svg = renderFigure(5, [gridCsv(alphas)]);
    const labels = svg.match(/alpha = /g) ?? [];
    expect(labels.length).toBeLessThanOrEqual(6);
  });

  it('merges multiple inputs with identical schemas', () => {
    const a = `${RATE_HEADER}\n10,0,0.64,2.24,0.76,0.64\n100,0,0.86,6.8,0.92,0.86\n`;
    const b = `${RATE_HEADER}\n10,0.5,0.86,6.8,0.93,0.86\n100,0.5,0.98,66,0.99,0.98\n`;
    const svg = renderFigure(1, [a, b]);
    expect(svg).toContain('epsilon = 0<');
    expect(svg).toContain('epsilon = 0.5');
  });

  it('rejects unknown figure ids', () => {
    expect(() => renderFigure(7, [rateCsv()])).toThrow(/unknown figure/);
  });
});
