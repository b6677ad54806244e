// Deterministic SVG line charts: fixed canvas, fixed palette, no
// timestamps or randomness, all coordinates rounded to 1/100 px so a
// rerun on identical data is byte-identical.

export interface Point {
  x: number;
  y: number;
}

export interface Series {
  label: string;
  points: Point[];
  dashed?: boolean;
}

export interface ChartSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  xLog: boolean;
  yLog: boolean;
  series: Series[];
}

const WIDTH = 720;
const HEIGHT = 540;
const MARGIN = { left: 76, right: 24, top: 40, bottom: 56 };
const PALETTE = ['#1f6fb2', '#d1462f', '#3a923a', '#8253a8', '#b8860b', '#3b9b9b'];

function fmt(v: number): string {
  return v.toFixed(2);
}

function tickLabel(v: number): string {
  if (v === 0) return '0';
  const magnitude = Math.abs(v);
  if (magnitude >= 1e4 || magnitude < 1e-3) {
    const exp = Math.floor(Math.log10(magnitude));
    const mant = v / 10 ** exp;
    const head = Math.abs(mant - 1) < 1e-9 ? '' : `${Number(mant.toPrecision(3))}x`;
    return `${head}1e${exp}`;
  }
  return `${Number(v.toPrecision(4))}`;
}

function linearTicks(lo: number, hi: number): number[] {
  const span = hi - lo;
  const rawStep = span / 5;
  const power = 10 ** Math.floor(Math.log10(rawStep));
  const candidates = [1, 2, 5, 10].map((m) => m * power);
  const step = candidates.find((c) => span / c <= 6) ?? candidates[3];
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + 1e-12 * span; t += step) {
    ticks.push(t);
  }
  return ticks;
}

function logTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.ceil(Math.log10(lo) - 1e-9); 10 ** e <= hi * (1 + 1e-9); e++) {
    ticks.push(10 ** e);
  }
  if (ticks.length < 2) return [lo, hi];
  return ticks;
}

interface Scale {
  (v: number): number;
  lo: number;
  hi: number;
}

function makeScale(values: number[], log: boolean, outLo: number, outHi: number): Scale {
  const finite = values.filter((v) => Number.isFinite(v) && (!log || v > 0));
  if (finite.length === 0) {
    throw new Error('no finite data to scale');
  }
  let lo = Math.min(...finite);
  let hi = Math.max(...finite);
  if (lo === hi) {
    lo = log ? lo / 2 : lo - 1;
    hi = log ? hi * 2 : hi + 1;
  }
  const t = (v: number) => (log ? Math.log(v) : v);
  const scale = ((v: number) =>
    outLo + ((t(v) - t(lo)) / (t(hi) - t(lo))) * (outHi - outLo)) as Scale;
  scale.lo = lo;
  scale.hi = hi;
  return scale;
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;');
}

export function renderChart(spec: ChartSpec): string {
  const xs = spec.series.flatMap((s) => s.points.map((p) => p.x));
  const ys = spec.series.flatMap((s) => s.points.map((p) => p.y));
  const xScale = makeScale(xs, spec.xLog, MARGIN.left, WIDTH - MARGIN.right);
  const yScale = makeScale(ys, spec.yLog, HEIGHT - MARGIN.bottom, MARGIN.top);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>`);
  parts.push(
    `<text x="${WIDTH / 2}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">${escapeXml(spec.title)}</text>`,
  );

  const plotBottom = HEIGHT - MARGIN.bottom;
  const xTicks = (spec.xLog ? logTicks : linearTicks)(xScale.lo, xScale.hi);
  for (const t of xTicks) {
    const px = xScale(t);
    parts.push(
      `<line x1="${fmt(px)}" y1="${MARGIN.top}" x2="${fmt(px)}" y2="${plotBottom}" stroke="#dddddd" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${fmt(px)}" y="${plotBottom + 18}" text-anchor="middle" font-family="sans-serif" font-size="11">${tickLabel(t)}</text>`,
    );
  }
  const yTicks = (spec.yLog ? logTicks : linearTicks)(yScale.lo, yScale.hi);
  for (const t of yTicks) {
    const py = yScale(t);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${fmt(py)}" x2="${WIDTH - MARGIN.right}" y2="${fmt(py)}" stroke="#dddddd" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${MARGIN.left - 6}" y="${fmt(py + 4)}" text-anchor="end" font-family="sans-serif" font-size="11">${tickLabel(t)}</text>`,
    );
  }
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${WIDTH - MARGIN.left - MARGIN.right}" height="${plotBottom - MARGIN.top}" fill="none" stroke="#333333"/>`,
  );
  parts.push(
    `<text x="${WIDTH / 2}" y="${HEIGHT - 14}" text-anchor="middle" font-family="sans-serif" font-size="13">${escapeXml(spec.xLabel)}${spec.xLog ? ' (log)' : ''}</text>`,
  );
  parts.push(
    `<text x="20" y="${HEIGHT / 2}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 20 ${HEIGHT / 2})">${escapeXml(spec.yLabel)}${spec.yLog ? ' (log)' : ''}</text>`,
  );

  spec.series.forEach((series, i) => {
    const color = PALETTE[i % PALETTE.length];
    const coords = series.points
      .filter((p) => Number.isFinite(p.x) && Number.isFinite(p.y))
      .map((p) => `${fmt(xScale(p.x))},${fmt(yScale(p.y))}`)
      .join(' ');
    const dash = series.dashed ? ' stroke-dasharray="6 4"' : '';
    parts.push(
      `<polyline points="${coords}" fill="none" stroke="${color}" stroke-width="1.6"${dash}/>`,
    );
    const ly = MARGIN.top + 16 + 16 * i;
    const lx = WIDTH - MARGIN.right - 150;
    parts.push(
      `<line x1="${lx}" y1="${ly - 4}" x2="${lx + 22}" y2="${ly - 4}" stroke="${color}" stroke-width="1.6"${dash}/>`,
    );
    parts.push(
      `<text x="${lx + 28}" y="${ly}" font-family="sans-serif" font-size="11">${escapeXml(series.label)}</text>`,
    );
  });

  parts.push('</svg>');
  return parts.join('\n') + '\n';
}
