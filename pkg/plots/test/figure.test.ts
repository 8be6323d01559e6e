import assert from 'node:assert/strict';
import { test } from 'node:test';

import { parseRegretCsv } from '../src/csv.js';
import { buildRegretVsN, buildRegretVsT } from '../src/figure.js';
import { renderSvg } from '../src/svg.js';
import { fig2Csv, fig3Csv, syntheticCsv } from './helpers.js';

test('regret_vs_T: one line per (experiment, n) group', () => {
  const figure = buildRegretVsT(parseRegretCsv(fig2Csv()));
  assert.equal(figure.series.length, 3);
  assert.deepEqual(figure.series.map((s) => s.label), ['n=1', 'n=10', 'n=100']);
  assert.ok(figure.logX);
  for (const series of figure.series) {
    assert.equal(series.points.length, 5);
    const xs = series.points.map((p) => p.x);
    assert.deepEqual(xs, [...xs].sort((a, b) => a - b));
    // error band straddles the mean
    for (const p of series.points) {
      assert.ok(p.lo < p.y && p.y < p.hi);
    }
  }
});

test('regret_vs_T: single group is a single line', () => {
  const csv = syntheticCsv([
    { experiment: 'solo', n: 5, T: 100, mean: 50 },
    { experiment: 'solo', n: 5, T: 200, mean: 70 },
  ]);
  const figure = buildRegretVsT(parseRegretCsv(csv));
  assert.equal(figure.series.length, 1);
  assert.equal(figure.series[0]!.label, 'n=5');
});

test('regret_vs_T: a group with one checkpoint is rejected', () => {
  const csv = syntheticCsv([
    { experiment: 'solo', n: 5, T: 100, mean: 50 },
    { experiment: 'solo', n: 6, T: 100, mean: 42 },
    { experiment: 'solo', n: 6, T: 200, mean: 55 },
  ]);
  assert.throws(() => buildRegretVsT(parseRegretCsv(csv)), /n=5.*checkpoint/);
});

test('regret_vs_n: one marker series per experiment over final checkpoints', () => {
  const figure = buildRegretVsN(parseRegretCsv(fig3Csv()));
  assert.equal(figure.series.length, 2);
  assert.deepEqual(
    figure.series.map((s) => s.label),
    ['lowrank-a0.05-b0.05', 'lowrank-a5.0-b5.0'],
  );
  for (const series of figure.series) {
    assert.deepEqual(series.points.map((p) => p.x), [4, 40, 80, 100]);
  }
});

test('regret_vs_n: known monotone series stays monotone', () => {
  const rows = [];
  for (const n of [2, 4, 8, 16]) {
    rows.push({ experiment: 'mono', n, T: 1000, mean: 10 * n });
  }
  const figure = buildRegretVsN(parseRegretCsv(syntheticCsv(rows)));
  const ys = figure.series[0]!.points.map((p) => p.y);
  for (let i = 1; i < ys.length; i++) {
    assert.ok(ys[i]! > ys[i - 1]!, `y[${i}] not increasing`);
  }
});

test('regret_vs_n: fewer than two distinct n values is rejected', () => {
  const csv = syntheticCsv([
    { experiment: 'solo', n: 5, T: 100, mean: 50 },
    { experiment: 'solo', n: 5, T: 200, mean: 70 },
  ]);
  assert.throws(() => buildRegretVsN(parseRegretCsv(csv)), /distinct n/);
});

test('svg render: one polyline and one band per series, deterministic', () => {
  const figure = buildRegretVsT(parseRegretCsv(fig2Csv()));
  const svg = renderSvg(figure);
  assert.equal((svg.match(/class="series-line"/g) ?? []).length, 3);
  assert.equal((svg.match(/class="series-band"/g) ?? []).length, 3);
  assert.ok(svg.includes('R(T) / sqrt(T)'));
  assert.ok(svg.startsWith('<svg '));
  assert.equal(svg, renderSvg(buildRegretVsT(parseRegretCsv(fig2Csv()))));
});

test('svg render: markers for the agents-axis figure', () => {
  const figure = buildRegretVsN(parseRegretCsv(fig3Csv()));
  const svg = renderSvg(figure);
  assert.equal((svg.match(/class="series-marker"/g) ?? []).length, 8);
  assert.equal((svg.match(/class="series-line"/g) ?? []).length, 2);
});
