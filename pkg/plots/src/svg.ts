/**
 * Minimal deterministic SVG rendering: polylines with error bands, axes,
 * ticks and a legend. No DOM, no dependencies; the output is a pure
 * function of the figure, so identical inputs produce identical bytes.
 */

import { Figure, Series } from './figure.js';

const WIDTH = 800;
const HEIGHT = 500;
const MARGIN = { left: 70, right: 170, top: 30, bottom: 55 };

const PALETTE = [
  '#1f77b4', '#d62728', '#2ca02c', '#9467bd',
  '#ff7f0e', '#8c564b', '#e377c2', '#7f7f7f',
];

interface Range {
  min: number;
  max: number;
}

function dataRange(values: number[]): Range {
  let min = Math.min(...values);
  let max = Math.max(...values);
  if (!(Number.isFinite(min) && Number.isFinite(max))) {
    throw new Error('non-finite values in figure data');
  }
  if (min === max) {
    min -= 1;
    max += 1;
  }
  return { min, max };
}

function niceTicks(range: Range, count = 5): number[] {
  const span = range.max - range.min;
  const step = Math.pow(10, Math.floor(Math.log10(span / count)));
  const err = (span / count) / step;
  const factor = err >= 7.5 ? 10 : err >= 3.5 ? 5 : err >= 1.5 ? 2 : 1;
  const nice = step * factor;
  const ticks: number[] = [];
  for (let v = Math.ceil(range.min / nice) * nice; v <= range.max + 1e-12; v += nice) {
    ticks.push(Number(v.toPrecision(12)));
  }
  return ticks;
}

function logTicks(range: Range): number[] {
  const ticks: number[] = [];
  const lo = Math.ceil(Math.log10(range.min));
  const hi = Math.floor(Math.log10(range.max));
  for (let e = lo; e <= hi; e++) {
    ticks.push(Math.pow(10, e));
  }
  if (ticks.length < 2) {
    return [range.min, range.max];
  }
  return ticks;
}

function fmt(v: number): string {
  if (v === 0) return '0';
  const abs = Math.abs(v);
  if (abs >= 10000 || abs < 0.01) return v.toExponential(1);
  return Number(v.toPrecision(4)).toString();
}

export function renderSvg(figure: Figure): string {
  const xs = figure.series.flatMap((s) => s.points.map((p) => p.x));
  const ys = figure.series.flatMap((s) => s.points.flatMap((p) => [p.lo, p.hi, p.y]));
  if (figure.logX && Math.min(...xs) <= 0) {
    throw new Error('log-scaled x axis requires positive x values');
  }
  const xRange = dataRange(figure.logX ? xs.map(Math.log10) : xs);
  const yRange = dataRange(ys);

  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const sx = (x: number): number => {
    const v = figure.logX ? Math.log10(x) : x;
    return MARGIN.left + ((v - xRange.min) / (xRange.max - xRange.min)) * plotW;
  };
  const sy = (y: number): number =>
    MARGIN.top + plotH - ((y - yRange.min) / (yRange.max - yRange.min)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
    `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="sans-serif" font-size="13">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);

  // axes
  const x0 = MARGIN.left;
  const y0 = MARGIN.top + plotH;
  parts.push(`<line x1="${x0}" y1="${y0}" x2="${x0 + plotW}" y2="${y0}" stroke="black"/>`);
  parts.push(`<line x1="${x0}" y1="${MARGIN.top}" x2="${x0}" y2="${y0}" stroke="black"/>`);

  const xTicks = figure.logX
    ? logTicks({ min: Math.min(...xs), max: Math.max(...xs) })
    : niceTicks({ min: Math.min(...xs), max: Math.max(...xs) });
  for (const t of xTicks) {
    const px = sx(t);
    if (px < x0 - 1 || px > x0 + plotW + 1) continue;
    parts.push(`<line x1="${px.toFixed(2)}" y1="${y0}" x2="${px.toFixed(2)}" y2="${y0 + 5}" stroke="black"/>`);
    parts.push(`<text x="${px.toFixed(2)}" y="${y0 + 20}" text-anchor="middle">${fmt(t)}</text>`);
  }
  for (const t of niceTicks(yRange)) {
    const py = sy(t);
    if (py < MARGIN.top - 1 || py > y0 + 1) continue;
    parts.push(`<line x1="${x0 - 5}" y1="${py.toFixed(2)}" x2="${x0}" y2="${py.toFixed(2)}" stroke="black"/>`);
    parts.push(`<text x="${x0 - 9}" y="${(py + 4).toFixed(2)}" text-anchor="end">${fmt(t)}</text>`);
  }
  parts.push(
    `<text x="${x0 + plotW / 2}" y="${HEIGHT - 12}" text-anchor="middle">${figure.xLabel}</text>`,
  );
  parts.push(
    `<text x="18" y="${MARGIN.top + plotH / 2}" text-anchor="middle" ` +
    `transform="rotate(-90 18 ${MARGIN.top + plotH / 2})">${figure.yLabel}</text>`,
  );

  figure.series.forEach((series: Series, i: number) => {
    const color = PALETTE[i % PALETTE.length]!;
    const hasBand = series.points.some((p) => p.hi > p.lo);
    if (hasBand) {
      const upper = series.points.map((p) => `${sx(p.x).toFixed(2)},${sy(p.hi).toFixed(2)}`);
      const lower = [...series.points]
        .reverse()
        .map((p) => `${sx(p.x).toFixed(2)},${sy(p.lo).toFixed(2)}`);
      parts.push(
        `<polygon class="series-band" points="${[...upper, ...lower].join(' ')}" ` +
        `fill="${color}" opacity="0.15"/>`,
      );
    }
    const line = series.points.map((p) => `${sx(p.x).toFixed(2)},${sy(p.y).toFixed(2)}`).join(' ');
    parts.push(
      `<polyline class="series-line" points="${line}" fill="none" stroke="${color}" stroke-width="2"/>`,
    );
    for (const p of series.points) {
      parts.push(
        `<circle class="series-marker" cx="${sx(p.x).toFixed(2)}" cy="${sy(p.y).toFixed(2)}" ` +
        `r="3.5" fill="${color}"/>`,
      );
    }
    // legend entry
    const ly = MARGIN.top + 12 + i * 20;
    const lx = WIDTH - MARGIN.right + 14;
    parts.push(`<line x1="${lx}" y1="${ly}" x2="${lx + 22}" y2="${ly}" stroke="${color}" stroke-width="2"/>`);
    parts.push(`<text x="${lx + 28}" y="${ly + 4}">${series.label}</text>`);
  });

  parts.push('</svg>');
  return parts.join('\n') + '\n';
}
