"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 infeasible scenario,
4 I/O failure.
"""
from __future__ import annotations

import argparse
import json
import sys

import yaml

from .config import (
    SCENARIO_DESCRIPTIONS,
    SCENARIO_KINDS,
    ConfigError,
    load_config,
)
from .scenarios import InfeasibleScenarioError, run_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="satqnet",
        description="Satellite entanglement-distribution simulator and sweep runner")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario config and write artifacts")
    run.add_argument("config", help="path to the YAML scenario file")
    run.add_argument("--set", dest="overrides", action="append", default=[],
                     metavar="SECTION.KEY=VALUE",
                     help="override a config field (repeatable)")
    run.add_argument("--workers", type=int, default=1,
                     help="worker processes for sweep cells")
    run.add_argument("--out", default=None, help="output directory override")

    val = sub.add_parser("validate", help="validate a config and echo it normalized")
    val.add_argument("config")
    val.add_argument("--set", dest="overrides", action="append", default=[],
                     metavar="SECTION.KEY=VALUE")

    sub.add_parser("list-scenarios", help="list the available scenario kinds")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "list-scenarios":
        for kind in SCENARIO_KINDS:
            print(f"{kind}: {SCENARIO_DESCRIPTIONS[kind]}")
        return EXIT_OK

    try:
        config = load_config(args.config, args.overrides)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, yaml.YAMLError) as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "validate":
        print(json.dumps(config.resolved, indent=2, sort_keys=True))
        return EXIT_OK

    try:
        artifacts = run_scenario(config, out_dir=args.out, workers=args.workers)
    except InfeasibleScenarioError as exc:
        print(f"infeasible scenario: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return EXIT_IO

    print(f"wrote {len(artifacts.files)} files to {artifacts.output_dir} "
          f"(manifest {artifacts.manifest_hash})")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
