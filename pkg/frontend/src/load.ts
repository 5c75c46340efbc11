import { readFileSync } from "node:fs";
import Papa from "papaparse";
import { ZodType } from "zod";
import {
  GENERATOR_COLUMNS,
  GeneratorRow,
  METRIC_COLUMNS,
  MetricsRow,
  SchemaError,
} from "./schema.js";

function parseCsv(path: string): Record<string, string>[] {
  const text = readFileSync(path, "utf8");
  const out = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
    comments: "#", // CSVs carry a leading "# config_hash=..." line
  });
  if (out.errors.length > 0) {
    throw new SchemaError(`${path}: CSV parse failed: ${out.errors[0].message}`);
  }
  if (out.data.length === 0) {
    throw new SchemaError(`${path}: CSV has no data rows`);
  }
  return out.data;
}

function requireColumns(path: string, row: Record<string, string>, cols: readonly string[]) {
  for (const col of cols) {
    if (!(col in row)) {
      throw new SchemaError(`${path}: missing required column "${col}"`);
    }
  }
}

function num(path: string, row: Record<string, string>, col: string): number {
  const v = Number(row[col]);
  if (!Number.isFinite(v) && row[col] !== "nan" && row[col] !== "inf") {
    throw new SchemaError(`${path}: column "${col}" has non-numeric value "${row[col]}"`);
  }
  return v;
}

export function loadMetricsCsv(path: string): MetricsRow[] {
  const rows = parseCsv(path);
  requireColumns(path, rows[0], METRIC_COLUMNS);
  const eigCols = Object.keys(rows[0]).filter((c) => /^latent_eig_\d+$/.test(c));
  if (eigCols.length === 0) {
    throw new SchemaError(`${path}: missing required column "latent_eig_1"`);
  }
  eigCols.sort((a, b) => Number(a.split("_")[2]) - Number(b.split("_")[2]));
  return rows.map((r) => ({
    step: num(path, r, "step"),
    V: num(path, r, "V"),
    dV: num(path, r, "dV"),
    E: num(path, r, "E"),
    frob_W: num(path, r, "frob_W"),
    sin_theta: num(path, r, "sin_theta"),
    ortho_error: num(path, r, "ortho_error"),
    eff_rank: num(path, r, "eff_rank"),
    noise_proj: num(path, r, "noise_proj"),
    latentEigs: eigCols.map((c) => num(path, r, c)),
  }));
}

export function loadGeneratorCsv(path: string): GeneratorRow[] {
  const rows = parseCsv(path);
  requireColumns(path, rows[0], GENERATOR_COLUMNS);
  const seedCols = Object.keys(rows[0]).filter((c) => /^err_seed\d+$/.test(c));
  return rows.map((r) => ({
    n_agents: num(path, r, "n_agents"),
    epsilon: num(path, r, "epsilon"),
    diagnostic: num(path, r, "diagnostic"),
    median_error: num(path, r, "median_error"),
    seedErrors: seedCols.map((c) => num(path, r, c)),
  }));
}

export function loadJson<T>(path: string, schema: ZodType<T>): T {
  let raw: unknown;
  try {
    raw = JSON.parse(readFileSync(path, "utf8"));
  } catch (err) {
    throw new SchemaError(`${path}: not valid JSON (${(err as Error).message})`);
  }
  const result = schema.safeParse(raw);
  if (!result.success) {
    const issue = result.error.issues[0];
    throw new SchemaError(`${path}: ${issue.path.join(".")}: ${issue.message}`);
  }
  return result.data;
}
