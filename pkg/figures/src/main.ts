/**
 * CLI: render one figure from a run directory.
 *
 *   node dist/main.js --in <run dir> --kind <k> --out <file.svg> [--n 2,7,12]
 *
 * kinds: gamma_vs_beta | moments_vs_n | profiles | decay
 */

import { writeFileSync } from "fs";
import { FIGURE_KINDS, FigureKind, renderFigure } from "./render.js";

function parseArgs(argv: string[]): { inDir: string; kind: FigureKind; out: string; n?: number[] } {
  const args = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    const value = argv[i + 1];
    if (!key.startsWith("--") || value === undefined) {
      throw new Error(`malformed arguments near "${key}"`);
    }
    args.set(key.slice(2), value);
  }
  const inDir = args.get("in");
  const kind = args.get("kind") as FigureKind | undefined;
  const out = args.get("out");
  if (!inDir || !kind || !out) {
    throw new Error("required: --in <dir> --kind <kind> --out <file>");
  }
  if (!FIGURE_KINDS.includes(kind)) {
    throw new Error(`unknown kind "${kind}" (expected ${FIGURE_KINDS.join(" | ")})`);
  }
  const nRaw = args.get("n");
  const n = nRaw ? nRaw.split(",").map((s) => Number(s.trim())) : undefined;
  if (n && n.some((v) => !Number.isInteger(v))) {
    throw new Error(`bad --n list "${nRaw}"`);
  }
  return { inDir, kind, out, n };
}

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs(argv);
  } catch (err) {
    console.error(`usage error: ${(err as Error).message}`);
    return 2;
  }
  try {
    const result = renderFigure({
      kind: parsed.kind,
      inputDir: parsed.inDir,
      nSelection: parsed.n,
    });
    writeFileSync(parsed.out, result.svg);
    console.log(`${parsed.kind}: ${result.panels.length} panel(s) -> ${parsed.out}`);
    return 0;
  } catch (err) {
    console.error(`render error: ${(err as Error).message}`);
    return 1;
  }
}

if (process.argv[1] && process.argv[1].endsWith("main.js")) {
  process.exit(main(process.argv.slice(2)));
}
