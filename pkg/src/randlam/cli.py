"""Command line entry point: ``randlam <subcommand> [flags]``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import experiments
from .experiments import RunConfig


def _add_run_flags(p: argparse.ArgumentParser, n: int, depth: int, grid: int):
    p.add_argument("--mode", choices=("self-similar", "homogeneous"), default="self-similar")
    p.add_argument("--n", type=int, default=n, help="number of trials (largest n for converge)")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--replicates", type=int, default=1)
    p.add_argument("--depth", type=int, default=depth, help="limit-process depth")
    p.add_argument("--grid", type=int, default=grid, help="number of grid points on [0, 1]")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--name", default="run")
    p.add_argument("--out", type=Path, required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="randlam", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the fragmentation and write lamination and height files")
    _add_run_flags(p, n=1000, depth=12, grid=1024)
    p.add_argument("--replay", action="store_true", help="also write the trial uniforms")

    p = sub.add_parser("converge", help="distance between rescaled heights and the limit")
    _add_run_flags(p, n=10000, depth=12, grid=1024)
    p.add_argument("--schedule", type=int, nargs="+", help="explicit list of n (default: dyadic from 100)")

    p = sub.add_parser("dimension", help="box-dimension estimate of the limit tree")
    _add_run_flags(p, n=1, depth=14, grid=2 ** 14)
    p.add_argument("--delta-min", type=float, default=2.0 ** -7)
    p.add_argument("--delta-max", type=float, default=2.0 ** -3)

    p = sub.add_parser("mean-table", help="exact means of the height at a uniform point")
    p.add_argument("--n", type=int, nargs="+", default=[10, 100, 1000, 10000])
    p.add_argument("--out", type=Path, help="directory for mean_table.csv (default: stdout only)")

    p = sub.add_parser("render", help="SVG for a lamination or function CSV")
    p.add_argument("csv", type=Path)
    p.add_argument("--out", type=Path, help="SVG path (default: next to the CSV)")

    sub.add_parser("selftest", help="exact-arithmetic and oracle checks")
    return parser


def _config(args) -> RunConfig:
    kw = dict(mode=args.mode, n_trials=args.n, seed=args.seed, replicates=args.replicates,
              grid=args.grid, depth=args.depth, out=args.out, name=args.name, workers=args.workers)
    if getattr(args, "schedule", None):
        kw["schedule"] = tuple(args.schedule)
    if hasattr(args, "delta_min"):
        kw.update(delta_min=args.delta_min, delta_max=args.delta_max)
    return RunConfig(**kw)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            files = experiments.cmd_simulate(_config(args), replay=args.replay)
        elif args.command == "converge":
            files = experiments.cmd_converge(_config(args))
        elif args.command == "dimension":
            files = experiments.cmd_dimension(_config(args))
        elif args.command == "mean-table":
            sys.stdout.write(experiments.cmd_mean_table(args.n, args.out))
            return 0
        elif args.command == "render":
            experiments.cmd_render(args.csv, args.out)
            return 0
        else:
            report = experiments.cmd_selftest()
            print("\n".join(report.lines()))
            return 0 if report.ok else 1
    except (ValueError, OSError) as exc:
        print(f"randlam: error: {exc}", file=sys.stderr)
        return 2
    for name in sorted(files):
        print(args.out / name)
    return 0


if __name__ == "__main__":
    sys.exit(main())
