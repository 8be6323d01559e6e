/**
 * Top-level plotting entry points mirroring the figure kinds.
 */

import { readFileSync, writeFileSync } from 'node:fs';

import { parseRegretCsv, RegretRow } from './csv.js';
import { buildRegretVsN, buildRegretVsT, Figure } from './figure.js';
import { renderSvg } from './svg.js';

export type FigureKind = 'regret_vs_T' | 'regret_vs_n';

export interface PlotSpec {
  inputs: string[];
  kind: FigureKind;
  output: string;
}

export function loadRows(paths: string[]): RegretRow[] {
  const rows: RegretRow[] = [];
  for (const path of paths) {
    rows.push(...parseRegretCsv(readFileSync(path, 'utf8')));
  }
  return rows;
}

export function buildFigure(kind: FigureKind, rows: RegretRow[]): Figure {
  return kind === 'regret_vs_T' ? buildRegretVsT(rows) : buildRegretVsN(rows);
}

export function renderPlot(spec: PlotSpec): string {
  const figure = buildFigure(spec.kind, loadRows(spec.inputs));
  const svg = renderSvg(figure);
  writeFileSync(spec.output, svg);
  return spec.output;
}
