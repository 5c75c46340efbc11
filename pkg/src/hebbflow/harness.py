"""Experiment orchestration: seeded runs emitting one CSV per seed and an
aggregate JSON summary, the timescale-ratio sweep, the three-regime
ablation, the generator-convergence test, and the gossip variant.

Output files are written atomically (temp file + rename). Identical config
hash and seed reproduce byte-identical CSVs.
"""

from __future__ import annotations

import json
import os
import tempfile
import time
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .config import ExperimentConfig
from .dynamics import (
    STATUS_DIVERGED,
    DynamicsConfig,
    RunTrace,
    init_weights,
    integrate_averaged,
    run_coupled,
    static_swarm_config,
    frozen_weights_config,
)
from .errors import ConfigError
from .geometry import Manifold, Swarm, sample_uniform
from .gossip import complete_topology, random_regular_topology, ring_topology, run_async
from .metrics import MetricsRecord, SpectralReference, compute_record
from .numerics import SeededRng
from .substrate import circle_cos_field, scaling_diagnostic, sphere_z_field, zero_field, mean_neighbor_generator_error

PHASE_STABLE = "StableAlignment"
PHASE_OSCILLATION = "StochasticOscillation"
PHASE_DIVERGED = "ExplosiveDivergence"

# Phase thresholds: divergence when V ever exceeds DIVERGENCE_V; otherwise
# the max per-step dV over the final TAIL_FRACTION of steps decides between
# oscillation and stable decay.
DIVERGENCE_V = 1e6
OSCILLATION_DV = 1e-10
TAIL_FRACTION = 0.2

_SEVERITY = {PHASE_STABLE: 0, PHASE_OSCILLATION: 1, PHASE_DIVERGED: 2}


@dataclass
class RunSummary:
    seed: int
    phase: str
    final: MetricsRecord
    wall_time: float
    config_hash: str
    status: str
    tail_max_dv: float


def classify_phase(lyapunov: np.ndarray) -> tuple[str, float]:
    """Phase of a per-step Lyapunov trace, plus the tail max per-step dV."""
    dv = np.diff(lyapunov)
    tail = dv[int(np.floor(len(dv) * (1.0 - TAIL_FRACTION))) :] if dv.size else dv
    tail_max = float(tail.max()) if tail.size else 0.0
    if not np.isfinite(tail_max):
        # overflowed blow-up step; clamp so JSON outputs stay parseable
        tail_max = np.finfo(np.float64).max
    if np.nanmax(lyapunov) > DIVERGENCE_V or not np.isfinite(lyapunov).all():
        return PHASE_DIVERGED, tail_max
    if tail_max > OSCILLATION_DV:
        return PHASE_OSCILLATION, tail_max
    return PHASE_STABLE, tail_max


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def initial_swarm(manifold: Manifold, config: ExperimentConfig, rng: SeededRng) -> Swarm:
    if config.init == "patch":
        pts = manifold.sample_patch(config.n_agents, rng, config.patch_center, config.patch_radius)
        return Swarm(pts, manifold)
    return sample_uniform(manifold, config.n_agents, rng)


def make_reference(X: np.ndarray, latent_dim: int) -> SpectralReference:
    """Alignment is judged against the eigenbasis of the swarm's current
    empirical second moment: the spectral structure the agents can actually
    observe. (Exact generator bases remain available for synthetic spectra
    via SpectralReference.from_spectrum_manifold.)"""
    sigma = (X.T @ X) / X.shape[0]
    return SpectralReference.from_sigma(sigma, latent_dim)


def run_single_seed(config: ExperimentConfig, seed: int, dyn: DynamicsConfig | None = None) -> tuple[list, RunTrace, RunSummary]:
    """One synchronous coupled run; returns (records, trace, summary)."""
    dyn = dyn or config.dynamics
    manifold = config.build_manifold()
    rng = SeededRng(seed)
    swarm = initial_swarm(manifold, config, rng)
    W = init_weights(config.latent_dim, manifold.ambient_dim, rng, config.weight_scale)

    records: list = []
    window_max_dv = [-np.inf]
    last_v = [np.nan]

    def record(step: int, X: np.ndarray, Wk: np.ndarray, dv: float):
        if not (np.isfinite(X).all() and np.isfinite(Wk).all()):
            nan = float("nan")
            records.append(
                MetricsRecord(step, nan, dv, nan, nan, nan, nan, nan, nan, np.full(config.latent_dim, nan))
            )
            return
        ref = make_reference(X, config.latent_dim)
        records.append(compute_record(step, X, Wk, dyn.lambda_reg, ref, dv))

    t0 = time.perf_counter()
    record(0, swarm.positions, W, 0.0)
    last_v[0] = records[0].V

    def on_step(k, sw, Wk):
        v = 0.25 * (float((Wk * Wk).sum()) - 1.0) ** 2
        window_max_dv[0] = max(window_max_dv[0], v - last_v[0])
        last_v[0] = v
        if (k + 1) % config.metrics_every == 0 or (k + 1) == dyn.steps:
            dv = window_max_dv[0]
            window_max_dv[0] = -np.inf
            record(k + 1, sw.positions, Wk, dv if np.isfinite(dv) else 0.0)

    trace = run_coupled(swarm, W, dyn, rng, on_step=on_step)
    wall = time.perf_counter() - t0
    if trace.status == STATUS_DIVERGED and (not records or records[-1].step != len(trace.lyapunov) - 1):
        # final record at the halt point so the stream shows the blow-up
        record(len(trace.lyapunov) - 1, trace.swarm.positions, trace.weights, float(np.diff(trace.lyapunov)[-1]))
    phase, tail_max = classify_phase(trace.lyapunov)
    summary = RunSummary(seed, phase, records[-1], wall, config.config_hash(), trace.status, tail_max)
    return records, trace, summary


def write_records_csv(path: str, records: list, latent_dim: int, config_hash: str = "") -> None:
    lines = []
    if config_hash:
        lines.append(f"# config_hash={config_hash}")
    lines.append(MetricsRecord.csv_header(latent_dim))
    lines.extend(r.csv_row() for r in records)
    _atomic_write(path, "\n".join(lines) + "\n")


def _aggregate(summaries: list, config: ExperimentConfig) -> dict:
    metrics: dict = {}
    finals = [s.final for s in summaries]
    for name in MetricsRecord.SCALAR_FIELDS:
        vals = np.array([getattr(f, name) for f in finals], dtype=np.float64)
        finite = vals[np.isfinite(vals)]

        def _num(x):
            # null instead of NaN/inf keeps the JSON standard-parseable
            return float(x) if np.isfinite(x) else None

        metrics[name] = {
            "mean": _num(finite.mean()) if finite.size else None,
            "std": _num(finite.std()) if finite.size else None,
        }
    phase = max((s.phase for s in summaries), key=lambda p: _SEVERITY[p])
    return {
        "config_hash": config.config_hash(),
        "seeds": [s.seed for s in summaries],
        "phase": phase,
        "phases_per_seed": {str(s.seed): s.phase for s in summaries},
        "tail_max_dv_per_seed": {str(s.seed): s.tail_max_dv for s in summaries},
        "wall_time": sum(s.wall_time for s in summaries),
        "metrics": metrics,
    }


def run_experiment(config: ExperimentConfig, out_dir: str, seeds: list | None = None) -> dict:
    """Synchronous experiment over all seeds: per-seed CSVs + summary.json."""
    seeds = seeds if seeds is not None else config.seeds
    summaries = []
    for seed in seeds:
        records, trace, summary = run_single_seed(config, seed)
        write_records_csv(os.path.join(out_dir, f"run_seed{seed}.csv"), records, config.latent_dim, config.config_hash())
        summaries.append(summary)
    agg = _aggregate(summaries, config)
    _atomic_write(os.path.join(out_dir, "summary.json"), json.dumps(agg, indent=2, sort_keys=True) + "\n")
    return agg


def run_sweep(config: ExperimentConfig, out_dir: str, ratios: list | None = None) -> dict:
    """Timescale-ratio sweep: each ratio r runs with eta_w = r * eta_x."""
    ratios = ratios if ratios is not None else config.sweep_ratios
    if not ratios:
        raise ConfigError("sweep needs at least one ratio")
    results = {}
    for ratio in ratios:
        dyn = replace(config.dynamics, eta_w=ratio * config.dynamics.eta_x)
        if dyn.eta_w > dyn.eta_x:
            warnings.warn(f"ratio {ratio:g} violates the timescale hierarchy (measured regime)", UserWarning)
        summaries = []
        for seed in config.seeds:
            records, trace, summary = run_single_seed(config, seed, dyn=dyn)
            write_records_csv(
                os.path.join(out_dir, f"sweep_ratio{ratio:g}_seed{seed}.csv"),
                records,
                config.latent_dim,
                config.config_hash(),
            )
            summaries.append(summary)
        agg = _aggregate(summaries, config)
        agg["ratio"] = ratio
        results[f"{ratio:g}"] = agg
    out = {"config_hash": config.config_hash(), "ratios": results}
    _atomic_write(os.path.join(out_dir, "sweep.json"), json.dumps(out, indent=2, sort_keys=True) + "\n")
    return out


def run_ablation(config: ExperimentConfig, out_dir: str) -> dict:
    """ODE-only (static swarm), SDE-only (frozen weights), and coupled
    regimes under identical seeds."""
    regimes = {
        "ode_only": static_swarm_config(config.dynamics),
        "sde_only": frozen_weights_config(config.dynamics),
        "coupled": config.dynamics,
    }
    out: dict = {"config_hash": config.config_hash(), "regimes": {}}
    for name, dyn in regimes.items():
        summaries = []
        for seed in config.seeds:
            records, trace, summary = run_single_seed(config, seed, dyn=dyn)
            write_records_csv(os.path.join(out_dir, f"ablation_{name}_seed{seed}.csv"), records, config.latent_dim, config.config_hash())
            summaries.append(summary)
        agg = _aggregate(summaries, config)
        out["regimes"][name] = {
            "phase": agg["phase"],
            "ortho_error": agg["metrics"]["ortho_error"],
            "eff_rank": agg["metrics"]["eff_rank"],
            "frob_W": agg["metrics"]["frob_W"],
        }
    _atomic_write(os.path.join(out_dir, "ablation.json"), json.dumps(out, indent=2, sort_keys=True) + "\n")
    return out


_TEST_FIELDS = {
    "circle_cos": (lambda: circle_cos_field(1.0), "circle"),
    "sphere_z": (lambda: sphere_z_field(1.0), "sphere"),
}


def run_generator_test(config: ExperimentConfig, out_dir: str) -> list:
    """Median sup-norm error between the discrete and continuous generators
    along the (N, epsilon) schedule. Returns the CSV rows as dicts."""
    if config.generator_test_function not in _TEST_FIELDS:
        raise ConfigError(f"unknown generator test function {config.generator_test_function!r}")
    make_field, expected_kind = _TEST_FIELDS[config.generator_test_function]
    if config.manifold_kind != expected_kind:
        raise ConfigError(
            f"test function {config.generator_test_function!r} needs manifold {expected_kind!r},"
            f" got {config.manifold_kind!r}"
        )
    if config.generator_potential != "zero":
        raise ConfigError("only the zero potential ships analytic ground truth")
    manifold = config.build_manifold()
    f = make_field()
    u = zero_field()
    schedule = config.generator_schedule
    diags = [scaling_diagnostic(n, eps, manifold.intrinsic_dim) for n, eps in schedule]
    if any(b <= a for a, b in zip(diags, diags[1:])):
        warnings.warn(
            "generator schedule does not strictly increase the scaling diagnostic: "
            + ", ".join(f"{d:.3f}" for d in diags),
            UserWarning,
        )
    rows = []
    for point_idx, (n_agents, eps) in enumerate(schedule):
        errors, isolated = [], []
        for seed in range(config.generator_seeds):
            # stream keyed by the swarm size so repeated or paired entries
            # (same N, different radius) share the same point clouds
            rng = SeededRng(1_000_003 * n_agents + seed)
            swarm = sample_uniform(manifold, n_agents, rng)
            err, iso = mean_neighbor_generator_error(
                swarm, eps, f, u, config.dynamics.diffusion, config.dynamics.beta
            )
            errors.append(err)
            isolated.append(iso)
        rows.append(
            {
                "n_agents": n_agents,
                "epsilon": eps,
                "diagnostic": diags[point_idx],
                "median_error": float(np.median(errors)),
                "errors": errors,
                "isolated": isolated,
            }
        )
    lines = [f"# config_hash={config.config_hash()}"]
    lines.append("n_agents,epsilon,diagnostic,median_error," + ",".join(f"err_seed{s}" for s in range(config.generator_seeds)))
    for row in rows:
        lines.append(
            f"{row['n_agents']},{row['epsilon']!r},{row['diagnostic']!r},{row['median_error']!r},"
            + ",".join(repr(e) for e in row["errors"])
        )
    _atomic_write(os.path.join(out_dir, "generator_test.csv"), "\n".join(lines) + "\n")
    return rows


def build_topology(config: ExperimentConfig):
    if config.gossip_topology == "ring":
        return ring_topology(config.n_agents)
    if config.gossip_topology == "complete":
        return complete_topology(config.n_agents)
    return random_regular_topology(config.n_agents, config.gossip_degree, seed=0)


def run_gossip(config: ExperimentConfig, out_dir: str) -> dict:
    """Asynchronous runs per seed; per-seed consensus CSV with the
    Lyapunov value of the mean replica and the disagreement."""
    topo = build_topology(config)
    activations = config.gossip_activations or config.dynamics.steps * config.n_agents
    sample_every = config.gossip_sample_every or config.n_agents
    manifold = config.build_manifold()
    results = {}
    for seed in config.seeds:
        rng = SeededRng(seed)
        swarm = initial_swarm(manifold, config, rng)
        W0 = init_weights(config.latent_dim, manifold.ambient_dim, rng, config.weight_scale)
        trace = run_async(
            manifold,
            topo,
            config.dynamics,
            seed,
            activations,
            initial_positions=swarm.positions,
            initial_weights=W0,
            sample_every=sample_every,
        )
        lines = [f"# config_hash={config.config_hash()}", "activation,V_mean,disagreement"]
        for k, (v, d) in enumerate(zip(trace.mean_lyapunov, trace.disagreements)):
            lines.append(f"{k * sample_every},{v!r},{d!r}")
        _atomic_write(os.path.join(out_dir, f"gossip_seed{seed}.csv"), "\n".join(lines) + "\n")
        results[str(seed)] = {
            "status": trace.status,
            "final_V_mean": float(trace.mean_lyapunov[-1]),
            "final_disagreement": float(trace.disagreements[-1]),
            "activations": activations,
        }
    out = {
        "config_hash": config.config_hash(),
        "topology": config.gossip_topology,
        "n_agents": config.n_agents,
        "seeds": results,
    }
    _atomic_write(os.path.join(out_dir, "gossip.json"), json.dumps(out, indent=2, sort_keys=True) + "\n")
    return out


def run_averaged_ode(config: ExperimentConfig, out_dir: str) -> dict:
    """Deterministic mean-field flow from the manifold's exact covariance
    (synthetic spectra only)."""
    manifold = config.build_manifold()
    if manifold.kind != "synthetic_spectrum":
        raise ConfigError("averaged_ode mode needs a synthetic_spectrum manifold (exact covariance)")
    sigma = manifold.covariance()
    results = {}
    tau_end = config.dynamics.steps * config.dynamics.eta_w
    for seed in config.seeds:
        rng = SeededRng(seed)
        W0 = init_weights(config.latent_dim, manifold.ambient_dim, rng, config.weight_scale)
        W = integrate_averaged(W0, sigma, config.dynamics.gamma, tau_end)
        results[str(seed)] = {"final_frob": float(np.linalg.norm(W)), "tau_end": tau_end}
    out = {"config_hash": config.config_hash(), "seeds": results}
    _atomic_write(os.path.join(out_dir, "averaged_ode.json"), json.dumps(out, indent=2, sort_keys=True) + "\n")
    return out
