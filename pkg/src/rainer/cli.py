"""Command line: ``rainer inspect|reduce|train|gridsearch|evaluate --config PATH``.

Exit status: 0 on success, 1 when any (model, strategy) cell or stage
failed, 2 for an invalid configuration or unreadable input.
"""

import argparse
import sys

from .config import load_config, resolve
from .errors import ConfigurationError, RainerError
from .pipeline import prepare, run_inspect, run_models, run_reduce

COMMANDS = ("inspect", "reduce", "train", "gridsearch", "evaluate")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rainer",
        description="Rainfall-prediction workbench. RAINER_DATA overrides the input CSV path.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="YAML pipeline configuration")
    parser.add_argument("--seed", type=int, help="global seed (overrides the config)")
    parser.add_argument("--out", help="output directory (overrides the config)")
    parser.add_argument("--threads", type=int, help="worker threads for model cells")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = resolve(load_config(args.config), args.seed, args.out, args.threads)
    except ConfigurationError as exc:
        print(f"rainer: {exc}", file=sys.stderr)
        return 2
    try:
        prepared = prepare(config)
    except FileNotFoundError as exc:
        print(f"rainer: cannot read input: {exc}", file=sys.stderr)
        return 2
    except RainerError as exc:
        print(f"rainer: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "inspect":
            run_inspect(config, prepared)
            return 0
        if args.command == "reduce":
            run_reduce(config, prepared)
            return 0
        if not config.models:
            print("rainer: the config lists no models", file=sys.stderr)
            return 2
        report = run_models(config, args.command, prepared)
    except (RainerError, ValueError, ArithmeticError) as exc:
        print(f"rainer: {args.command} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 1 if report["failed_cells"] else 0


if __name__ == "__main__":
    sys.exit(main())
