import { mkdtempSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import path from "path";
import { describe, expect, it } from "vitest";

import { renderFigure, renderGammaVsBeta, profileXRange, FIGURE_KINDS } from "../src/render.js";
import { readSweepCsv } from "../src/io.js";
import { main } from "../src/main.js";

const FIX = path.join(__dirname, "fixtures", "default");

describe("figure kinds", () => {
  it("moments figure carries one marker per class and the n=6 guide", () => {
    const fig = renderFigure({ kind: "moments_vs_n", inputDir: FIX });
    expect(fig.panels.length).toBe(2);
    for (const p of fig.panels) {
      expect(p.markers).toBe(24);
      expect(p.guides).toEqual([6]);
    }
    expect(fig.svg).toContain("<svg");
    expect(fig.svg).toContain("class=\"guide\"");
  });

  it("a single-row sweep renders one point without error", () => {
    const dir = mkdtempSync(path.join(tmpdir(), "figr-"));
    const file = path.join(dir, "sweep.csv");
    writeFileSync(file, "beta,gamma,sum_X\n1,0.45852977447255938,0.60700982347265042\n");
    const fig = renderGammaVsBeta(readSweepCsv(file));
    expect(fig.panels[0].markers).toBe(1);
    expect(fig.svg).toContain("circle");
  });

  it("profile panels clip the xi-range per class and place the guides", () => {
    const fig = renderFigure({ kind: "profiles", inputDir: FIX, nSelection: [2, 8, 12, 25] });
    const byTitle = new Map(fig.panels.map((p) => [p.title, p]));
    const p12 = byTitle.get("profile of class n=12")!;
    // range [max(0, n-9), n-3] = [3, 9]; guides at n-7, n-6, n-5 = 5, 6, 7
    expect(profileXRange(12)).toEqual([3, 9]);
    expect(p12.guides).toEqual([5, 6, 7]);
    const p8 = byTitle.get("profile of class n=8")!;
    // range [0, 5]: all of 1, 2, 3 inside
    expect(p8.guides).toEqual([1, 2, 3]);
    const p2 = byTitle.get("profile of class n=2")!;
    expect(p2.guides).toEqual([]);            // -5, -4, -3 all outside
    const p25 = byTitle.get("profile of class n=25")!;
    expect(p25.guides).toEqual([18, 19, 20]); // range [16, 22] holds all three
  });

  it("decay figure draws the manifest's fitted slope", () => {
    const fig = renderFigure({ kind: "decay", inputDir: FIX });
    expect(fig.panels.length).toBe(2);
    expect(fig.panels[1].guides.length).toBe(1);
    expect(fig.panels[1].guides[0]).toBeCloseTo(-0.6064, 3);
  });

  it("unknown classes are rejected", () => {
    expect(() => renderFigure({ kind: "profiles", inputDir: FIX, nSelection: [99] }))
      .toThrow(/not present/);
  });
});

describe("acceptance criterion 11", () => {
  it("renders all four figure kinds from a default run's exports", () => {
    const out = mkdtempSync(path.join(tmpdir(), "figacc-"));
    for (const kind of FIGURE_KINDS) {
      const rc = main(["--in", FIX, "--kind", kind, "--out", path.join(out, `${kind}.svg`)]);
      expect(rc, `kind ${kind}`).toBe(0);
    }
    // guide-line placement and the varying xi-range, spot-checked on n=10:
    const fig = renderFigure({ kind: "profiles", inputDir: FIX, nSelection: [10] });
    expect(profileXRange(10)).toEqual([1, 7]);
    expect(fig.panels[0].guides).toEqual([3, 4, 5]);
    console.log("ACCEPTANCE 11: PASS — all four figure kinds rendered; guide lines at n-7, n-6, n-5 within the per-class xi-range");
  });
});

describe("cli", () => {
  it("reports usage errors", () => {
    expect(main(["--in", FIX])).toBe(2);
    expect(main(["--in", FIX, "--kind", "nope", "--out", "x.svg"])).toBe(2);
  });

  it("reports missing inputs as render errors", () => {
    const empty = mkdtempSync(path.join(tmpdir(), "figcli-"));
    expect(main(["--in", empty, "--kind", "decay", "--out", path.join(empty, "d.svg")])).toBe(1);
  });
});
