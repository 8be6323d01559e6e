import assert from 'node:assert/strict';
import { test } from 'node:test';

import { parseRegretCsv, SchemaError } from '../src/csv.js';
import { syntheticCsv } from './helpers.js';

test('parses well-formed harness output', () => {
  const rows = parseRegretCsv(
    syntheticCsv([
      { experiment: 'meanfield', n: 10, T: 1000, mean: 300, stderr: 12 },
      { experiment: 'meanfield', n: 10, T: 2000, mean: 420, stderr: 15 },
    ]),
  );
  assert.equal(rows.length, 2);
  assert.equal(rows[0]!.experiment, 'meanfield');
  assert.equal(rows[0]!.n, 10);
  assert.equal(rows[1]!.T_checkpoint, 2000);
  assert.ok(Math.abs(rows[1]!.mean_regret_over_sqrtT - 420 / Math.sqrt(2000)) < 1e-12);
});

test('missing column is a named schema error', () => {
  const text = 'experiment,n,T_checkpoint,mean_regret\nmeanfield,10,100,5\n';
  assert.throws(() => parseRegretCsv(text), (err: unknown) => {
    assert.ok(err instanceof SchemaError);
    assert.match((err as Error).message, /missing column: stderr_regret/);
    return true;
  });
});

test('empty input and header-only input are rejected', () => {
  assert.throws(() => parseRegretCsv(''), /empty/);
  const headerOnly = syntheticCsv([]);
  assert.throws(() => parseRegretCsv(headerOnly), /no data rows/);
});

test('non-numeric cells are rejected with row and column', () => {
  const good = syntheticCsv([{ experiment: 'e', n: 1, T: 10, mean: 5 }]);
  const bad = good.replace('5', 'five');
  assert.throws(() => parseRegretCsv(bad), /column .* not numeric|row 2/);
});

test('column order does not matter', () => {
  const text = [
    'n,experiment,T_checkpoint,stderr_regret,mean_regret,mean_regret_over_sqrtT,mean_K_T_aux,mean_K_T_eigen',
    '4,swapped,100,1,50,5,7,8',
  ].join('\n');
  const rows = parseRegretCsv(text);
  assert.equal(rows[0]!.experiment, 'swapped');
  assert.equal(rows[0]!.mean_regret, 50);
});
