/**
 * One echarts option builder per figure kind. All charts share a fixed
 * style (no animation, fixed palette) so repeated renders of the same
 * inputs are byte-identical.
 */
import type { EChartsOption, SeriesOption } from "echarts";
import { loadGeneratorCsv, loadJson, loadMetricsCsv } from "./load.js";
import { ablationSchema, FigureKind, SchemaError, sweepSchema } from "./schema.js";

const PALETTE = ["#c23531", "#2f4554", "#61a0a8", "#d48265", "#91c7ae", "#749f83", "#ca8622"];
const GRAY = "#b0b0b0";

const BASE: EChartsOption = {
  animation: false,
  color: PALETTE as string[],
  backgroundColor: "#ffffff",
};

function logFloor(values: number[]): number {
  const positive = values.filter((v) => v > 0 && Number.isFinite(v));
  return positive.length ? Math.min(...positive) : 1e-16;
}

/** Latent eigenvalue trajectories: principal curves highlighted, the
 * suppressed tail in gray, log-scale y. */
export function spectralEvolution(csvPaths: string[]): EChartsOption {
  const rows = loadMetricsCsv(csvPaths[0]);
  const m = rows[0].latentEigs.length;
  const floor = logFloor(rows.flatMap((r) => r.latentEigs));
  const series: SeriesOption[] = [];
  for (let i = 0; i < m; i++) {
    const principal = i < Math.ceil(m / 2);
    series.push({
      name: `latent_eig_${i + 1}`,
      type: "line",
      showSymbol: false,
      lineStyle: principal ? { width: 2 } : { width: 1, color: GRAY },
      itemStyle: principal ? {} : { color: GRAY },
      data: rows.map((r) => [r.step, Math.max(r.latentEigs[i], floor)]),
    });
  }
  return {
    ...BASE,
    title: { text: "Latent spectrum evolution" },
    legend: { top: 28 },
    xAxis: { type: "value", name: "step" },
    yAxis: { type: "log", name: "eigenvalue" },
    series,
  };
}

/** Lyapunov value and joint energy along the run, V on a log axis. */
export function lyapunovDecay(csvPaths: string[]): EChartsOption {
  const series: SeriesOption[] = [];
  for (const [idx, path] of csvPaths.entries()) {
    const rows = loadMetricsCsv(path);
    const floor = logFloor(rows.map((r) => r.V));
    series.push({
      name: `V (${label(path, idx)})`,
      type: "line",
      showSymbol: false,
      data: rows.map((r) => [r.step, Math.max(r.V, floor)]),
    });
  }
  return {
    ...BASE,
    title: { text: "Lyapunov decay" },
    legend: { top: 28 },
    xAxis: { type: "value", name: "step" },
    yAxis: { type: "log", name: "V" },
    series,
  };
}

/** Median generator sup-error along the refinement schedule. */
export function generatorTrend(csvPaths: string[]): EChartsOption {
  const rows = loadGeneratorCsv(csvPaths[0]);
  return {
    ...BASE,
    title: { text: "Discrete-generator convergence" },
    xAxis: {
      type: "category",
      name: "(N, eps)",
      data: rows.map((r) => `${r.n_agents}@${r.epsilon}`),
    },
    yAxis: { type: "log", name: "median sup error" },
    series: [
      {
        name: "median sup error",
        type: "line",
        data: rows.map((r) => r.median_error),
      },
      {
        name: "per-seed",
        type: "scatter",
        symbolSize: 6,
        itemStyle: { color: GRAY },
        data: rows.flatMap((r, i) => r.seedErrors.map((e) => [i, e])),
      },
    ],
  };
}

/** Tail stability per timescale ratio, bars labeled with the phase. */
export function phaseTransition(jsonPaths: string[]): EChartsOption {
  const sweep = loadJson(jsonPaths[0], sweepSchema);
  const ratios = Object.keys(sweep.ratios).sort((a, b) => Number(b) - Number(a));
  const values = ratios.map((r) => {
    const per = Object.values(sweep.ratios[r].tail_max_dv_per_seed);
    return per.reduce((a, b) => Math.max(a, b), -Infinity);
  });
  const phases = ratios.map((r) => sweep.ratios[r].phase);
  return {
    ...BASE,
    title: { text: "Timescale phase transition" },
    xAxis: { type: "category", name: "eta_w / eta_x", data: ratios },
    yAxis: {
      type: "value",
      name: "log10 |max tail dV|",
    },
    series: [
      {
        name: "max tail dV",
        type: "bar",
        data: values.map((v, i) => ({
          value: Math.log10(Math.abs(v) + 1e-300) * Math.sign(v || 1),
          label: { show: true, position: "top", formatter: phases[i] },
        })),
      },
    ],
  };
}

/** Mean off-diagonal latent energy per dynamical regime. */
export function ablationBars(jsonPaths: string[]): EChartsOption {
  const ablation = loadJson(jsonPaths[0], ablationSchema);
  const regimes = Object.keys(ablation.regimes).sort();
  return {
    ...BASE,
    title: { text: "Ablation: off-diagonal latent energy" },
    legend: { top: 28 },
    xAxis: { type: "category", name: "regime", data: regimes },
    yAxis: { type: "value", name: "mean ortho_error" },
    series: [
      {
        name: "ortho_error",
        type: "bar",
        data: regimes.map((r) => ablation.regimes[r].ortho_error.mean ?? NaN),
      },
      {
        name: "eff_rank",
        type: "bar",
        data: regimes.map((r) => ablation.regimes[r].eff_rank.mean ?? NaN),
      },
    ],
  };
}

function label(path: string, idx: number): string {
  const m = path.match(/seed(\d+)/);
  return m ? `seed ${m[1]}` : `input ${idx}`;
}

export function buildFigure(kind: FigureKind, inputs: string[]): EChartsOption {
  if (inputs.length === 0) {
    throw new SchemaError("at least one input file is required");
  }
  switch (kind) {
    case "spectral-evolution":
      return spectralEvolution(inputs);
    case "lyapunov-decay":
      return lyapunovDecay(inputs);
    case "generator-trend":
      return generatorTrend(inputs);
    case "phase-transition":
      return phaseTransition(inputs);
    case "ablation-bars":
      return ablationBars(inputs);
    default:
      throw new SchemaError(`unknown figure kind "${kind as string}"`);
  }
}
