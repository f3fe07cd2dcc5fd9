/**
 * Readers for the solver's CSV/JSON exports (schema version "1").
 *
 * Every reader validates the header before touching the data so schema
 * drift fails loudly instead of producing empty plots.
 */

import { readFileSync } from "fs";
import path from "path";

export const SCHEMA_VERSION = "1";

export interface ProfileRow {
  n: number;
  k: number;
  xi: number;
  g: number;
}

export interface MomentsRow {
  n: number;
  X: number;
  Y: number;
  lnX: number | null;
}

export interface SweepRow {
  beta: number;
  gamma: number;
  sumX: number;
}

export interface Manifest {
  schema_version: string;
  gamma: number;
  residual: number;
  converged: boolean;
  decay?: { tau: number; slope: number; window: number[] };
  config: Record<string, unknown>;
  [key: string]: unknown;
}

function splitCsv(text: string, expectedHeader: string, file: string): string[][] {
  const lines = text.trim().split("\n");
  if (lines.length === 0 || lines[0].trim() !== expectedHeader) {
    throw new Error(
      `${file}: expected header "${expectedHeader}", got "${lines[0] ?? ""}"`,
    );
  }
  return lines.slice(1).map((line, i) => {
    const parts = line.split(",");
    if (parts.length !== expectedHeader.split(",").length) {
      throw new Error(`${file}:${i + 2}: expected ${expectedHeader.split(",").length} columns`);
    }
    return parts;
  });
}

function num(raw: string, file: string): number {
  const v = Number(raw);
  if (raw.trim() === "" || Number.isNaN(v)) {
    throw new Error(`${file}: bad numeric field "${raw}"`);
  }
  return v;
}

export function readProfileCsv(file: string): ProfileRow[] {
  const rows = splitCsv(readFileSync(file, "utf-8"), "n,k,xi,g", file);
  return rows.map((p) => ({
    n: num(p[0], file),
    k: num(p[1], file),
    xi: num(p[2], file),
    g: num(p[3], file),
  }));
}

export function readMomentsCsv(file: string): MomentsRow[] {
  const rows = splitCsv(readFileSync(file, "utf-8"), "n,X,Y,lnX", file);
  return rows.map((p) => ({
    n: num(p[0], file),
    X: num(p[1], file),
    Y: num(p[2], file),
    lnX: p[3].trim() === "" ? null : num(p[3], file),
  }));
}

export function readSweepCsv(file: string): SweepRow[] {
  const rows = splitCsv(readFileSync(file, "utf-8"), "beta,gamma,sum_X", file);
  return rows.map((p) => ({
    beta: num(p[0], file),
    gamma: num(p[1], file),
    sumX: num(p[2], file),
  }));
}

export function readManifest(file: string): Manifest {
  const manifest = JSON.parse(readFileSync(file, "utf-8")) as Manifest;
  if (manifest.schema_version !== SCHEMA_VERSION) {
    throw new Error(
      `${file}: schema_version "${manifest.schema_version}" (expected "${SCHEMA_VERSION}")`,
    );
  }
  return manifest;
}

/** Group profile rows by class, ordered by grid index. */
export function profileByClass(rows: ProfileRow[]): Map<number, ProfileRow[]> {
  const by = new Map<number, ProfileRow[]>();
  for (const row of rows) {
    const list = by.get(row.n);
    if (list === undefined) {
      by.set(row.n, [row]);
    } else {
      list.push(row);
    }
  }
  for (const list of by.values()) {
    list.sort((a, b) => a.k - b.k);
  }
  return by;
}

export interface RunDir {
  profile?: string;
  moments?: string;
  manifest?: string;
  sweep?: string;
}

export function locateInputs(dir: string): RunDir {
  const cand = (name: string): string | undefined => {
    const p = path.join(dir, name);
    try {
      readFileSync(p, { encoding: "utf-8", flag: "r" });
      return p;
    } catch {
      return undefined;
    }
  };
  return {
    profile: cand("profile.csv"),
    moments: cand("moments.csv"),
    manifest: cand("manifest.json"),
    sweep: cand("sweep.csv"),
  };
}
