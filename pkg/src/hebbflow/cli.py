"""Command-line entry point.

Exit codes: 0 for completed experiments (a measured divergence is a
result, not an error), 1 for configuration problems, 2 for I/O failures.
"""

from __future__ import annotations

import argparse
import json
import sys

from .backend import ACTIVE
from .config import load_config
from .errors import ConfigError
from . import harness


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="path to the INI experiment config")
    p.add_argument("--out", required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hebbflow", description="coupled swarm representation-learning simulator")
    parser.add_argument("--version", action="version", version=f"hebbflow (backend: {ACTIVE})")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="synchronous coupled run over the configured seeds")
    _add_common(p_run)
    p_run.add_argument("--seed", type=int, default=None, help="run a single seed instead of the configured list")

    p_sweep = sub.add_parser("sweep", help="timescale-ratio sweep")
    _add_common(p_sweep)
    p_sweep.add_argument("--ratios", default=None, help="comma-separated eta_w/eta_x ratios (overrides config)")

    p_abl = sub.add_parser("ablation", help="ODE-only / SDE-only / coupled comparison")
    _add_common(p_abl)

    p_gen = sub.add_parser("generator-test", help="discrete-vs-continuous generator convergence")
    _add_common(p_gen)

    p_gos = sub.add_parser("gossip", help="asynchronous gossip runs")
    _add_common(p_gos)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        if args.command == "run":
            # honor the config's mode; explicit subcommands bypass this
            if config.mode == "sweep":
                result = harness.run_sweep(config, args.out)
            elif config.mode == "async":
                result = harness.run_gossip(config, args.out)
            elif config.mode == "generator_test":
                result = harness.run_generator_test(config, args.out)
                result = {"points": [{k: v for k, v in r.items() if k != "errors"} for r in result]}
            elif config.mode == "averaged_ode":
                result = harness.run_averaged_ode(config, args.out)
            else:
                seeds = [args.seed] if args.seed is not None else None
                result = harness.run_experiment(config, args.out, seeds=seeds)
        elif args.command == "sweep":
            ratios = [float(r) for r in args.ratios.split(",")] if args.ratios else None
            result = harness.run_sweep(config, args.out, ratios=ratios)
        elif args.command == "ablation":
            result = harness.run_ablation(config, args.out)
        elif args.command == "generator-test":
            rows = harness.run_generator_test(config, args.out)
            result = {"points": [{k: v for k, v in r.items() if k != "errors"} for r in rows]}
        else:
            result = harness.run_gossip(config, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(result, indent=2, sort_keys=True, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
