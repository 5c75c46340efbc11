"""Experiment configuration: a flat INI-style key-value format with
sections, no nesting. Unknown keys are rejected, defaults are filled in
and echoed back, and the canonical form is hashed into every output.
"""

from __future__ import annotations

import configparser
import hashlib
import warnings
from dataclasses import dataclass, field

import numpy as np

from .dynamics import DynamicsConfig
from .errors import ConfigError
from .geometry import Manifold, SyntheticSpectrum, make_manifold

MODES = ("synchronous", "async", "generator_test", "averaged_ode", "sweep")
TOPOLOGIES = ("ring", "complete", "random_regular")

_MANIFOLD_KEYS = {
    "kind",
    "radius",
    "major_radius",
    "minor_radius",
    "half_width",
    "height",
    "t_min",
    "t_max",
    "t_half",
    "density_tilt",
    "spectrum",
    "spectrum_kind",
    "n",
    "exponent",
    "scale",
    "top",
    "tail",
    "decay",
    "spectrum_m",
    "rotation_seed",
}
_RUN_KEYS = {
    "n_agents",
    "latent_dim",
    "steps",
    "seeds",
    "metrics_every",
    "mode",
    "init",
    "patch_center",
    "patch_radius",
    "weight_scale",
}
_DYNAMICS_KEYS = {"eta_x", "eta_w", "diffusion", "beta", "gamma", "lambda_reg", "plasticity"}
_GOSSIP_KEYS = {"topology", "degree", "activations", "sample_every"}
_GENERATOR_KEYS = {"schedule", "test_function", "potential", "seeds_per_point"}
_SWEEP_KEYS = {"ratios"}

DEFAULTS = {
    "run": {
        "steps": "15000",
        "seeds": "0,1,2,3,4",
        "metrics_every": "100",
        "mode": "synchronous",
        "init": "uniform",
        "patch_center": "0.5",
        "patch_radius": "1.0",
        "weight_scale": "0.1",
    },
    # artifact defaults; the source experiments do not publish these
    "dynamics": {
        "eta_x": "4e-4",
        "eta_w": "4e-5",
        "diffusion": "0.5",
        "beta": "1.0",
        "gamma": "1.0",
        "lambda_reg": "1.0",
        "plasticity": "ordered",
    },
    "gossip": {"topology": "ring", "degree": "4", "activations": "0", "sample_every": "0"},
    "generator_test": {
        "schedule": "500:0.45, 2000:0.30, 8000:0.20",
        "test_function": "circle_cos",
        "potential": "zero",
        "seeds_per_point": "5",
    },
    "sweep": {"ratios": "1.5, 0.05, 0.001"},
}


@dataclass
class ExperimentConfig:
    manifold_kind: str
    manifold_params: dict
    n_agents: int
    latent_dim: int
    dynamics: DynamicsConfig
    seeds: list
    metrics_every: int = 100
    mode: str = "synchronous"
    init: str = "uniform"
    patch_center: float = 0.5
    patch_radius: float = 1.0
    weight_scale: float = 0.1
    gossip_topology: str = "ring"
    gossip_degree: int = 4
    gossip_activations: int = 0
    gossip_sample_every: int = 0
    generator_schedule: list = field(default_factory=list)
    generator_test_function: str = "circle_cos"
    generator_potential: str = "zero"
    generator_seeds: int = 5
    sweep_ratios: list = field(default_factory=list)
    echo: dict = field(default_factory=dict)

    def build_manifold(self) -> Manifold:
        return make_manifold(self.manifold_kind, **self.manifold_params)

    def config_hash(self) -> str:
        lines = sorted(f"{sec}.{key}={val}" for (sec, key), val in self.echo.items())
        return hashlib.sha256("\n".join(lines).encode()).hexdigest()[:16]


def _parse_float_list(text: str) -> list:
    return [float(tok) for tok in text.replace(";", ",").split(",") if tok.strip()]


def _parse_int_list(text: str) -> list:
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _parse_schedule(text: str) -> list:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            n, eps = tok.split(":")
            out.append((int(n), float(eps)))
        except ValueError:
            raise ConfigError(f"generator_test.schedule entry {tok!r} must look like N:epsilon") from None
    return out


def _manifold_params(kind: str, items: dict) -> dict:
    params: dict = {}
    numeric = {
        "radius",
        "major_radius",
        "minor_radius",
        "half_width",
        "height",
        "t_min",
        "t_max",
        "t_half",
        "density_tilt",
        "exponent",
        "scale",
        "top",
        "tail",
        "decay",
    }
    for key, val in items.items():
        if key in ("kind", "spectrum_kind", "n", "spectrum_m", "rotation_seed", "spectrum"):
            continue
        if key in numeric:
            params[key] = float(val)
    if kind == "synthetic_spectrum":
        rotation_seed = int(items.get("rotation_seed", "0"))
        if "spectrum" in items:
            lam = np.array(_parse_float_list(items["spectrum"]))
            return {"eigenvalues": lam, "rotation_seed": rotation_seed}
        spectrum_kind = items.get("spectrum_kind", "power_law")
        n = int(items.get("n", "0"))
        if n < 1:
            raise ConfigError("manifold.n is required for synthetic_spectrum")
        if spectrum_kind == "power_law":
            lam = SyntheticSpectrum.power_law(
                n, float(items.get("exponent", "1.0")), float(items.get("scale", "1.0")), rotation_seed
            ).eigenvalues
        elif spectrum_kind == "plateau":
            lam = SyntheticSpectrum.plateau(
                n,
                int(items.get("spectrum_m", "1")),
                float(items.get("top", "30.0")),
                float(items.get("tail", "1.0")),
                float(items.get("decay", "0.8")),
                rotation_seed,
            ).eigenvalues
        else:
            raise ConfigError(f"unknown manifold.spectrum_kind {spectrum_kind!r}")
        return {"eigenvalues": lam, "rotation_seed": rotation_seed}
    return params


def load_config(path: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from None
    return config_from_parser(parser)


def config_from_parser(parser: configparser.ConfigParser) -> ExperimentConfig:
    known = {
        "manifold": _MANIFOLD_KEYS,
        "run": _RUN_KEYS,
        "dynamics": _DYNAMICS_KEYS,
        "gossip": _GOSSIP_KEYS,
        "generator_test": _GENERATOR_KEYS,
        "sweep": _SWEEP_KEYS,
    }
    for sec in parser.sections():
        if sec not in known:
            raise ConfigError(f"unknown config section [{sec}]")
        for key in parser[sec]:
            if key not in known[sec]:
                raise ConfigError(f"unknown key {sec}.{key}")

    if not parser.has_section("manifold") or "kind" not in parser["manifold"]:
        raise ConfigError("missing required field manifold.kind")
    if not parser.has_section("run"):
        raise ConfigError("missing required section [run]")
    for req in ("n_agents", "latent_dim"):
        if req not in parser["run"]:
            raise ConfigError(f"missing required field run.{req}")

    merged: dict = {}
    for sec, defaults in DEFAULTS.items():
        for key, val in defaults.items():
            merged[(sec, key)] = val
    for sec in parser.sections():
        for key, val in parser[sec].items():
            merged[(sec, key)] = val

    kind = merged[("manifold", "kind")]
    manifold_params = _manifold_params(kind, {k: v for (s, k), v in merged.items() if s == "manifold"})

    try:
        dyn = DynamicsConfig(
            eta_x=float(merged[("dynamics", "eta_x")]),
            eta_w=float(merged[("dynamics", "eta_w")]),
            diffusion=float(merged[("dynamics", "diffusion")]),
            beta=float(merged[("dynamics", "beta")]),
            gamma=float(merged[("dynamics", "gamma")]),
            lambda_reg=float(merged[("dynamics", "lambda_reg")]),
            steps=int(merged[("run", "steps")]),
            plasticity=merged[("dynamics", "plasticity")],
        )
    except ValueError as exc:
        raise ConfigError(f"invalid dynamics value: {exc}") from None

    if dyn.eta_w > dyn.eta_x:
        warnings.warn(
            f"eta_w={dyn.eta_w:g} exceeds eta_x={dyn.eta_x:g}: timescale hierarchy violated "
            "(allowed, expect the unstable phase)",
            UserWarning,
        )

    mode = merged[("run", "mode")]
    if mode not in MODES:
        raise ConfigError(f"run.mode must be one of {MODES}, got {mode!r}")
    topology = merged[("gossip", "topology")]
    if topology not in TOPOLOGIES:
        raise ConfigError(f"gossip.topology must be one of {TOPOLOGIES}, got {topology!r}")
    init = merged[("run", "init")]
    if init not in ("uniform", "patch"):
        raise ConfigError(f"run.init must be uniform or patch, got {init!r}")

    seeds = _parse_int_list(merged[("run", "seeds")])
    if not seeds:
        raise ConfigError("run.seeds must list at least one seed")

    cfg = ExperimentConfig(
        manifold_kind=kind,
        manifold_params=manifold_params,
        n_agents=int(merged[("run", "n_agents")]),
        latent_dim=int(merged[("run", "latent_dim")]),
        dynamics=dyn,
        seeds=seeds,
        metrics_every=int(merged[("run", "metrics_every")]),
        mode=mode,
        init=init,
        patch_center=float(merged[("run", "patch_center")]),
        patch_radius=float(merged[("run", "patch_radius")]),
        weight_scale=float(merged[("run", "weight_scale")]),
        gossip_topology=topology,
        gossip_degree=int(merged[("gossip", "degree")]),
        gossip_activations=int(merged[("gossip", "activations")]),
        gossip_sample_every=int(merged[("gossip", "sample_every")]),
        generator_schedule=_parse_schedule(merged[("generator_test", "schedule")]),
        generator_test_function=merged[("generator_test", "test_function")],
        generator_potential=merged[("generator_test", "potential")],
        generator_seeds=int(merged[("generator_test", "seeds_per_point")]),
        sweep_ratios=_parse_float_list(merged[("sweep", "ratios")]),
        echo={k: str(v) for k, v in merged.items()},
    )
    if cfg.n_agents < 1 or cfg.latent_dim < 1 or cfg.metrics_every < 1:
        raise ConfigError("n_agents, latent_dim and metrics_every must be positive")
    cfg.build_manifold()  # validate manifold parameters eagerly
    return cfg
