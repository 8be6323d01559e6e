#!/usr/bin/env node
/**
 * Command line: regret-plots --input regret.csv [--input more.csv]
 *               --kind regret_vs_T|regret_vs_n --out figure.svg
 */

import { FigureKind, PlotSpec, renderPlot } from './plot.js';

const USAGE =
  'usage: regret-plots --input CSV [--input CSV ...] ' +
  '--kind regret_vs_T|regret_vs_n --out FILE.svg';

export function parseArgs(argv: string[]): PlotSpec {
  const inputs: string[] = [];
  let kind: string | undefined;
  let output: string | undefined;
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i]!;
    const next = (): string => {
      const v = argv[++i];
      if (v === undefined) throw new Error(`${arg} expects a value\n${USAGE}`);
      return v;
    };
    switch (arg) {
      case '--input':
        inputs.push(next());
        break;
      case '--kind':
        kind = next();
        break;
      case '--out':
        output = next();
        break;
      case '--help':
      case '-h':
        console.log(USAGE);
        process.exit(0);
        break;
      default:
        throw new Error(`unknown argument ${arg}\n${USAGE}`);
    }
  }
  if (inputs.length === 0 || !kind || !output) {
    throw new Error(`--input, --kind and --out are required\n${USAGE}`);
  }
  if (kind !== 'regret_vs_T' && kind !== 'regret_vs_n') {
    throw new Error(`unknown figure kind ${kind}; use regret_vs_T or regret_vs_n`);
  }
  return { inputs, kind: kind as FigureKind, output };
}

export function main(argv: string[]): number {
  try {
    const spec = parseArgs(argv);
    const path = renderPlot(spec);
    console.log(`wrote ${path}`);
    return 0;
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : String(err)}`);
    return 1;
  }
}

if (process.argv[1] && import.meta.url.endsWith(process.argv[1].split('/').pop()!)) {
  process.exit(main(process.argv.slice(2)));
}
