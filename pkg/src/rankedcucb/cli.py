"""Command-line driver: ``run``, ``sweep``, and ``gen`` subcommands."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .errors import ConfigurationError, GenerationError, InstanceFormatError
from .harness import ExperimentConfig, pareto_sweep, run, write_final, write_pareto, write_timeseries
from .sim import SCENARIOS, generate_instance, save_instance


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rankedcucb",
        description="Online effort allocation with ranked group prioritization",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run policies over seeds and write timeseries/final CSVs")
    p_run.add_argument("--config", required=True, help="path to a JSON experiment config")
    p_run.add_argument("--lambda", dest="lam", type=float, help="override the lambda list with one value")
    p_run.add_argument("--horizon", type=int, help="override the horizon")
    p_run.add_argument("--seeds", type=int, help="override seeds with 0..k-1")
    p_run.add_argument("--policy", help="override the policy list (comma-separated)")
    p_run.add_argument("--out", help="override the output directory")
    p_run.add_argument("--jobs", type=int, default=None, help="worker processes (default: sequential)")

    p_sweep = sub.add_parser("sweep", help="sweep lambda and write the Pareto table")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--out", required=True, help="output directory")
    p_sweep.add_argument("--jobs", type=int, default=None)

    p_gen = sub.add_parser("gen", help="generate a synthetic instance file")
    p_gen.add_argument("--scenario", required=True, choices=SCENARIOS)
    p_gen.add_argument("--out", required=True, help="output instance path")
    p_gen.add_argument("--locations", type=int, default=25)
    p_gen.add_argument("--groups", type=int, default=4)
    p_gen.add_argument("--levels", type=int, default=4)
    p_gen.add_argument("--budget", type=float, default=None)
    p_gen.add_argument("--lipschitz", type=float, default=0.25)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--horizon", type=int, default=1000)
    return parser


def _load_config(args) -> ExperimentConfig:
    config = ExperimentConfig.from_json(args.config)
    overrides = {}
    if getattr(args, "lam", None) is not None:
        overrides["lambdas"] = (args.lam,)
    if getattr(args, "horizon", None) is not None:
        overrides["horizon"] = args.horizon
    if getattr(args, "seeds", None) is not None:
        overrides["seeds"] = tuple(range(args.seeds))
    if getattr(args, "policy", None):
        overrides["policies"] = tuple(p.strip() for p in args.policy.split(",") if p.strip())
    if getattr(args, "out", None):
        overrides["out_dir"] = args.out
    return replace(config, **overrides) if overrides else config


def _cmd_run(args) -> int:
    config = _load_config(args)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    result = run(config, max_workers=args.jobs)
    write_timeseries(result, out_dir / "timeseries.csv")
    write_final(result, out_dir / "final.csv")
    print(f"wrote {out_dir / 'timeseries.csv'} and {out_dir / 'final.csv'}")
    return 0


def _cmd_sweep(args) -> int:
    config = replace(ExperimentConfig.from_json(args.config), out_dir=args.out)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    points = pareto_sweep(config, max_workers=args.jobs)
    write_pareto(points, out_dir / "pareto.csv")
    print(f"wrote {out_dir / 'pareto.csv'}")
    return 0


def _cmd_gen(args) -> int:
    instance, model = generate_instance(
        n_locations=args.locations,
        n_groups=args.groups,
        n_levels=args.levels,
        budget=args.budget,
        lipschitz=args.lipschitz,
        seed=args.seed,
        scenario=args.scenario,
        horizon=args.horizon,
    )
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    save_instance(instance, args.out, model=model)
    print(f"wrote {args.out}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "sweep": _cmd_sweep, "gen": _cmd_gen}
    try:
        return handlers[args.command](args)
    except (ConfigurationError, InstanceFormatError, GenerationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
