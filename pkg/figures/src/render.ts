/**
 * The four figure families rendered from solver exports.
 *
 * This component never computes model quantities: every number drawn comes
 * from the CSV/JSON files (the fitted decay guide line, for instance, uses
 * the slope stored in the manifest).  Splines are display-only.
 */

import {
  Manifest,
  MomentsRow,
  ProfileRow,
  SweepRow,
  profileByClass,
  readManifest,
  readMomentsCsv,
  readProfileCsv,
  readSweepCsv,
  locateInputs,
} from "./io.js";
import { assemble, newPanel, padRange, PanelBuilder } from "./svg.js";

export type FigureKind = "gamma_vs_beta" | "moments_vs_n" | "profiles" | "decay";

export const FIGURE_KINDS: FigureKind[] = [
  "gamma_vs_beta", "moments_vs_n", "profiles", "decay",
];

export interface FigureSpec {
  kind: FigureKind;
  inputDir: string;
  /** profile plots: classes to draw (default: a spread across 2..N) */
  nSelection?: number[];
}

export interface PanelMeta {
  title: string;
  xRange: [number, number];
  yRange: [number, number];
  markers: number;
  guides: number[];
}

export interface FigureResult {
  svg: string;
  panels: PanelMeta[];
}

const SERIES = "#1f6fb2";
const SERIES2 = "#c23b22";

function meta(pb: PanelBuilder, markers: number, guides: number[]): PanelMeta {
  return {
    title: pb.panel.title,
    xRange: pb.panel.xRange,
    yRange: pb.panel.yRange,
    markers,
    guides,
  };
}

function require<T>(value: T | undefined, what: string, dir: string): T {
  if (value === undefined) {
    throw new Error(`missing ${what} in ${dir}`);
  }
  return value;
}

// --- gamma and total number versus beta -------------------------------------

export function renderGammaVsBeta(rows: SweepRow[]): FigureResult {
  rows = [...rows].sort((a, b) => a.beta - b.beta);
  const betas = rows.map((r) => r.beta);
  const xr = padRange(Math.min(...betas), Math.max(...betas));
  const w = 420, h = 330;
  const panels: PanelBuilder[] = [];
  const metas: PanelMeta[] = [];
  const series: Array<["gamma" | "sumX", string, string]> = [
    ["gamma", "coupling weight vs beta", "Gamma"],
    ["sumX", "total number vs beta", "sum X_n"],
  ];
  series.forEach(([key, title, ylabel], idx) => {
    const vals = rows.map((r) => r[key]);
    const pb = newPanel(idx * w, 0, w, h, xr,
      padRange(Math.min(...vals), Math.max(...vals)), title, "beta", ylabel);
    const pts = rows.map((r, i) => [r.beta, vals[i]] as [number, number]);
    pb.spline(pts, SERIES);
    const count = pb.markers(pts, SERIES);
    panels.push(pb);
    metas.push(meta(pb, count, []));
  });
  return { svg: assemble(2 * w, h, panels), panels: metas };
}

// --- per-class moments versus n ----------------------------------------------

export function renderMomentsVsN(rows: MomentsRow[]): FigureResult {
  const ns = rows.map((r) => r.n);
  const xr = padRange(Math.min(...ns), Math.max(...ns));
  const w = 420, h = 330;
  const panels: PanelBuilder[] = [];
  const metas: PanelMeta[] = [];
  const series: Array<["X" | "Y", string]> = [["X", "number moments"], ["Y", "area moments"]];
  series.forEach(([key, title], idx) => {
    const vals = rows.map((r) => r[key]);
    const pb = newPanel(idx * w, 0, w, h, xr,
      padRange(Math.min(...vals, 0), Math.max(...vals)), `${title} vs n`, "n", `${key}_n`);
    const guides: number[] = [];
    if (pb.inX(6)) {
      pb.vline(6);
      guides.push(6);
    }
    const pts = rows.map((r, i) => [r.n, vals[i]] as [number, number]);
    pb.spline(pts, SERIES);
    const count = pb.markers(pts, SERIES);
    panels.push(pb);
    metas.push(meta(pb, count, guides));
  });
  return { svg: assemble(2 * w, h, panels), panels: metas };
}

// --- per-class profiles with singular-point guide lines ------------------------

export function profileXRange(n: number): [number, number] {
  // plot range varies with the class; degenerate for n < 4, where the
  // window is clamped to keep at least one unit of xi visible
  const lo = Math.max(0, n - 9);
  const hi = Math.max(n - 3, lo + 1);
  return [lo, hi];
}

export function defaultClassSelection(maxN: number): number[] {
  const wanted = [2, 4, 6, 8, 10, 12, 20, maxN];
  return [...new Set(wanted.filter((n) => n >= 2 && n <= maxN))];
}

export function renderProfiles(rows: ProfileRow[], nSelection?: number[]): FigureResult {
  const byClass = profileByClass(rows);
  const maxN = Math.max(...byClass.keys());
  const selection = (nSelection && nSelection.length > 0)
    ? nSelection : defaultClassSelection(maxN);
  for (const n of selection) {
    if (!byClass.has(n)) {
      throw new Error(`class n=${n} not present in profile data`);
    }
  }
  const w = 420, h = 300;
  const cols = 2;
  const rowsCount = Math.ceil(selection.length / cols);
  const panels: PanelBuilder[] = [];
  const metas: PanelMeta[] = [];
  selection.forEach((n, idx) => {
    const data = byClass.get(n)!;
    const xr = profileXRange(n);
    const inside = data.filter((r) => r.xi >= xr[0] - 1e-12 && r.xi <= xr[1] + 1e-12);
    const vals = inside.map((r) => r.g);
    const yr = padRange(Math.min(...vals, 0), Math.max(...vals, 1e-30));
    const pb = newPanel((idx % cols) * w, Math.floor(idx / cols) * h, w, h,
      padRange(xr[0], xr[1], 0.02), yr, `profile of class n=${n}`, "xi", "g_n");
    const guides: number[] = [];
    for (const gx of [n - 7, n - 6, n - 5]) {
      if (gx >= xr[0] && gx <= xr[1]) {
        pb.vline(gx);
        guides.push(gx);
      }
    }
    const pts = inside.map((r) => [r.xi, r.g] as [number, number]);
    pb.spline(pts, SERIES);
    const stride = Math.max(1, Math.floor(pts.length / 48));
    const count = pb.markers(pts.filter((_, i) => i % stride === 0), SERIES);
    panels.push(pb);
    metas.push(meta(pb, count, guides));
  });
  return { svg: assemble(cols * w, rowsCount * h, panels), panels: metas };
}

// --- logarithmic decay plots ----------------------------------------------------

export function renderDecay(
  rows: ProfileRow[], moments: MomentsRow[], manifest: Manifest,
): FigureResult {
  const byClass = profileByClass(rows);
  // ln of the class-summed profile at each grid point, where positive
  const first = byClass.values().next().value as ProfileRow[];
  const sums = first.map((r, idx) => {
    let total = 0;
    for (const list of byClass.values()) {
      total += list[idx].g;
    }
    return [r.xi, total] as [number, number];
  });
  const logSum = sums.filter(([, v]) => v > 0).map(([x, v]) => [x, Math.log(v)] as [number, number]);

  const w = 420, h = 330;
  const xs = logSum.map((p) => p[0]);
  const ys = logSum.map((p) => p[1]);
  const pb1 = newPanel(0, 0, w, h, padRange(Math.min(...xs), Math.max(...xs)),
    padRange(Math.min(...ys), Math.max(...ys)),
    "profile decay in xi", "xi", "ln sum_n g_n");
  pb1.line(logSum, SERIES);

  const lnx = moments.filter((r) => r.lnX !== null);
  const xs2 = lnx.map((r) => r.n);
  const ys2 = lnx.map((r) => r.lnX as number);
  const pb2 = newPanel(w, 0, w, h, padRange(Math.min(...xs2), Math.max(...xs2)),
    padRange(Math.min(...ys2), Math.max(...ys2)),
    "moment decay in n", "n", "ln X_n");
  const pts2 = lnx.map((r) => [r.n, r.lnX as number] as [number, number]);
  pb2.spline(pts2, SERIES);
  const count2 = pb2.markers(pts2, SERIES);

  // fitted guide line: slope from the manifest, anchored at the window start
  let guideMeta: number[] = [];
  if (manifest.decay) {
    const { slope, window } = manifest.decay;
    const anchor = lnx.find((r) => r.n >= window[0]) ?? lnx[0];
    const x0 = anchor.n, y0 = anchor.lnX as number;
    const xEnd = Math.max(...xs2);
    pb2.line([[x0, y0], [xEnd, y0 + slope * (xEnd - x0)]], SERIES2, 1.0);
    guideMeta = [slope];
  }
  return {
    svg: assemble(2 * w, h, [pb1, pb2]),
    panels: [meta(pb1, 0, []), { ...meta(pb2, count2, []), guides: guideMeta }],
  };
}

// --- entry point -------------------------------------------------------------

export function renderFigure(spec: FigureSpec): FigureResult {
  const inputs = locateInputs(spec.inputDir);
  switch (spec.kind) {
    case "gamma_vs_beta":
      return renderGammaVsBeta(readSweepCsv(require(inputs.sweep, "sweep.csv", spec.inputDir)));
    case "moments_vs_n":
      return renderMomentsVsN(readMomentsCsv(require(inputs.moments, "moments.csv", spec.inputDir)));
    case "profiles":
      return renderProfiles(
        readProfileCsv(require(inputs.profile, "profile.csv", spec.inputDir)),
        spec.nSelection,
      );
    case "decay":
      return renderDecay(
        readProfileCsv(require(inputs.profile, "profile.csv", spec.inputDir)),
        readMomentsCsv(require(inputs.moments, "moments.csv", spec.inputDir)),
        readManifest(require(inputs.manifest, "manifest.json", spec.inputDir)),
      );
    default:
      throw new Error(`unknown figure kind "${spec.kind}"`);
  }
}
