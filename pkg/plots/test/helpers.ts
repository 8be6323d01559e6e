import { REQUIRED_COLUMNS } from '../src/csv.js';

export interface RowSpec {
  experiment: string;
  n: number;
  T: number;
  mean: number;
  stderr?: number;
}

/** Render synthetic harness output with the exact production schema. */
export function syntheticCsv(rows: RowSpec[]): string {
  const lines = [REQUIRED_COLUMNS.join(',')];
  for (const r of rows) {
    const stderr = r.stderr ?? 0;
    const overSqrt = r.mean / Math.sqrt(r.T);
    lines.push(
      [r.experiment, r.n, r.T, r.mean, stderr, overSqrt, 10, 12].join(','),
    );
  }
  return lines.join('\n') + '\n';
}

/** fig2-like sweep: one experiment label, several n, halving checkpoints. */
export function fig2Csv(): string {
  const rows: RowSpec[] = [];
  for (const n of [1, 10, 100]) {
    for (const T of [125, 250, 500, 1000, 2000]) {
      rows.push({
        experiment: 'meanfield',
        n,
        T,
        mean: (20 - Math.log10(n) * 5) * Math.sqrt(T),
        stderr: Math.sqrt(T) / 4,
      });
    }
  }
  return syntheticCsv(rows);
}

/** fig3-like sweep: two coupling strengths across four network sizes. */
export function fig3Csv(): string {
  const rows: RowSpec[] = [];
  for (const [label, scale] of [
    ['lowrank-a0.05-b0.05', 5],
    ['lowrank-a5.0-b5.0', 12],
  ] as const) {
    for (const n of [4, 40, 80, 100]) {
      for (const T of [500, 1000, 2000]) {
        rows.push({ experiment: label, n, T, mean: scale * n * Math.sqrt(T) * 0.01 });
      }
    }
  }
  return syntheticCsv(rows);
}
