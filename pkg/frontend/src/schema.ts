/**
 * Contracts for the simulator's output files. The CSV column layout and
 * JSON summary keys are fixed upstream; figures only consume what is
 * validated here and never recompute metrics.
 */
import { z } from "zod";

export class SchemaError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaError";
  }
}

/** Columns every per-seed metrics CSV must carry (latent eigenvalue
 * columns follow, one per latent dimension). */
export const METRIC_COLUMNS = [
  "step",
  "V",
  "dV",
  "E",
  "frob_W",
  "sin_theta",
  "ortho_error",
  "eff_rank",
  "noise_proj",
] as const;

export interface MetricsRow {
  step: number;
  V: number;
  dV: number;
  E: number;
  frob_W: number;
  sin_theta: number;
  ortho_error: number;
  eff_rank: number;
  noise_proj: number;
  latentEigs: number[];
}

export const GENERATOR_COLUMNS = ["n_agents", "epsilon", "diagnostic", "median_error"] as const;

export interface GeneratorRow {
  n_agents: number;
  epsilon: number;
  diagnostic: number;
  median_error: number;
  seedErrors: number[];
}

const statEntry = z.object({ mean: z.number().nullable(), std: z.number().nullable() });

export const summarySchema = z.object({
  config_hash: z.string(),
  seeds: z.array(z.number()),
  phase: z.string(),
  metrics: z.record(z.string(), statEntry),
});

export const sweepSchema = z.object({
  config_hash: z.string(),
  ratios: z.record(
    z.string(),
    z.object({
      phase: z.string(),
      tail_max_dv_per_seed: z.record(z.string(), z.number()),
      metrics: z.record(z.string(), statEntry),
    })
  ),
});

export const ablationSchema = z.object({
  config_hash: z.string(),
  regimes: z.record(
    z.string(),
    z.object({
      phase: z.string(),
      ortho_error: statEntry,
      eff_rank: statEntry,
      frob_W: statEntry,
    })
  ),
});

export type Summary = z.infer<typeof summarySchema>;
export type Sweep = z.infer<typeof sweepSchema>;
export type Ablation = z.infer<typeof ablationSchema>;

export const FIGURE_KINDS = [
  "spectral-evolution",
  "lyapunov-decay",
  "generator-trend",
  "phase-transition",
  "ablation-bars",
] as const;

export type FigureKind = (typeof FIGURE_KINDS)[number];
