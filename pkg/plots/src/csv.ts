/**
 * Reading and validating the regret benchmark CSV.
 *
 * The harness writes one row per (experiment, n, checkpoint) with fixed
 * columns; this module is the only place that knows the schema. Parsing is
 * strict: a missing column or malformed numeric cell fails with a named
 * error rather than producing silent NaN series.
 */

export interface RegretRow {
  experiment: string;
  n: number;
  T_checkpoint: number;
  mean_regret: number;
  stderr_regret: number;
  mean_regret_over_sqrtT: number;
  mean_K_T_aux: number;
  mean_K_T_eigen: number;
}

export const REQUIRED_COLUMNS = [
  'experiment',
  'n',
  'T_checkpoint',
  'mean_regret',
  'stderr_regret',
  'mean_regret_over_sqrtT',
  'mean_K_T_aux',
  'mean_K_T_eigen',
] as const;

const NUMERIC_COLUMNS = REQUIRED_COLUMNS.filter((c) => c !== 'experiment');

export class SchemaError extends Error {}

export function parseRegretCsv(text: string): RegretRow[] {
  const lines = text
    .split(/\r?\n/)
    .map((line) => line.trim())
    .filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new SchemaError('CSV is empty');
  }

  const headerLine = lines[0]!;
  const header = headerLine.split(',').map((h) => h.trim());
  const index = new Map<string, number>();
  header.forEach((name, i) => index.set(name, i));
  for (const column of REQUIRED_COLUMNS) {
    if (!index.has(column)) {
      throw new SchemaError(`missing column: ${column}`);
    }
  }

  const rows: RegretRow[] = [];
  for (let lineNo = 1; lineNo < lines.length; lineNo++) {
    const cells = lines[lineNo]!.split(',');
    if (cells.length < header.length) {
      throw new SchemaError(`row ${lineNo + 1}: expected ${header.length} cells, got ${cells.length}`);
    }
    const row: Record<string, string | number> = {
      experiment: cells[index.get('experiment')!]!.trim(),
    };
    for (const column of NUMERIC_COLUMNS) {
      const raw = cells[index.get(column)!]!.trim();
      const value = Number(raw);
      if (!Number.isFinite(value)) {
        throw new SchemaError(`row ${lineNo + 1}: column ${column} is not numeric (${raw})`);
      }
      row[column] = value;
    }
    rows.push(row as unknown as RegretRow);
  }
  if (rows.length === 0) {
    throw new SchemaError('CSV has no data rows');
  }
  return rows;
}
