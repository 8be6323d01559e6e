import assert from 'node:assert/strict';
import { existsSync, mkdtempSync, readFileSync, writeFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { test } from 'node:test';

import { main, parseArgs } from '../src/cli.js';
import { fig2Csv, fig3Csv } from './helpers.js';

function tempDir(): string {
  return mkdtempSync(join(tmpdir(), 'regret-plots-'));
}

test('renders a regret_vs_T figure from a fig2-style CSV', () => {
  const dir = tempDir();
  const csv = join(dir, 'regret.csv');
  const out = join(dir, 'fig2a.svg');
  writeFileSync(csv, fig2Csv());
  const code = main(['--input', csv, '--kind', 'regret_vs_T', '--out', out]);
  assert.equal(code, 0);
  assert.ok(existsSync(out));
  const svg = readFileSync(out, 'utf8');
  assert.equal((svg.match(/class="series-line"/g) ?? []).length, 3);
});

test('renders a regret_vs_n figure from a fig3-style CSV', () => {
  const dir = tempDir();
  const csv = join(dir, 'regret.csv');
  const out = join(dir, 'fig3b.svg');
  writeFileSync(csv, fig3Csv());
  const code = main(['--input', csv, '--kind', 'regret_vs_n', '--out', out]);
  assert.equal(code, 0);
  const svg = readFileSync(out, 'utf8');
  assert.equal((svg.match(/class="series-line"/g) ?? []).length, 2);
});

test('schema mismatch fails cleanly with a non-zero exit', () => {
  const dir = tempDir();
  const csv = join(dir, 'broken.csv');
  writeFileSync(csv, 'experiment,n\nmeanfield,10\n');
  const out = join(dir, 'nope.svg');
  const code = main(['--input', csv, '--kind', 'regret_vs_T', '--out', out]);
  assert.equal(code, 1);
  assert.ok(!existsSync(out));
});

test('argument validation', () => {
  assert.throws(() => parseArgs(['--kind', 'regret_vs_T']), /--input/);
  assert.throws(() => parseArgs(['--input', 'x.csv', '--kind', 'pie', '--out', 'y.svg']),
    /unknown figure kind/);
  assert.throws(() => parseArgs(['--wat']), /unknown argument/);
  const spec = parseArgs(['--input', 'a.csv', '--input', 'b.csv',
    '--kind', 'regret_vs_n', '--out', 'o.svg']);
  assert.deepEqual(spec.inputs, ['a.csv', 'b.csv']);
});
