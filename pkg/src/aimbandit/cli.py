"""Command-line entry point: ``run``, ``validate`` and ``sweep``."""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import ConfigError, emit_csv, parse_config, parse_sweep
from .sim import RunError, run_experiment
from .validate import validate_suite

EXIT_OK = 0
EXIT_CONFIG = 3
EXIT_RUN = 4
EXIT_VALIDATION = 5


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aimbandit", description="Bandit regret experiments and entropy checks."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment and write its regret table")
    run.add_argument("--config", required=True, type=Path)
    run.add_argument("--out", required=True, type=Path)
    run.add_argument("--horizon", type=int)
    run.add_argument("--runs", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--policies", help="comma-separated policy names")

    check = sub.add_parser("validate", help="check closed forms against the numerical oracle")
    # Accepted so scripts can pass the same flags to every command; never read.
    check.add_argument("--config", type=Path, help="ignored; the checks need no experiment")

    sweep = sub.add_parser("sweep", help="run every point of a [sweep] grid")
    sweep.add_argument("--config", required=True, type=Path)
    sweep.add_argument("--out", required=True, type=Path)
    return parser


def _run(args: argparse.Namespace) -> int:
    policies = None
    if args.policies:
        policies = [p.strip() for p in args.policies.split(",") if p.strip()]
    overrides = {
        "horizon": args.horizon, "runs": args.runs, "seed": args.seed, "policies": policies,
    }
    config = parse_config(args.config, overrides)
    emit_csv(run_experiment(config), args.out)
    print(f"wrote {args.out}", file=sys.stderr)
    return EXIT_OK


def _sweep(args: argparse.Namespace) -> int:
    points = parse_sweep(args.config)
    args.out.mkdir(parents=True, exist_ok=True)
    keys = list(points[0][0])
    with (args.out / "index.csv").open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["file", *keys])
        for i, (point, config) in enumerate(points):
            name = f"point_{i:03d}.csv"
            emit_csv(run_experiment(config), args.out / name)
            writer.writerow([name, *(point[k] for k in keys)])
    print(f"wrote {len(points)} tables to {args.out}", file=sys.stderr)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "validate":
            report = validate_suite()
            return EXIT_OK if report.passed else EXIT_VALIDATION
        if args.command == "run":
            return _run(args)
        return _sweep(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RunError, OSError) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_RUN


if __name__ == "__main__":
    sys.exit(main())
