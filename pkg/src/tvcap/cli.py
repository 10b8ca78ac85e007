"""Command-line scenario runner.

    tvcap run SCENARIO [--out DIR] [--override k=v ...] [--quiet]
    tvcap list
    tvcap validate SCENARIO

SCENARIO is a path to a scenario JSON file or the name of a bundled one.
Exit codes: 0 all checks pass, 1 a check failed, 2 parse error,
3 validation error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ScenarioError, TvcapError
from .scenario import (apply_overrides, bundled_scenario_names, load_bundled,
                       load_scenario)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_PARSE_ERROR = 2
EXIT_VALIDATION_ERROR = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tvcap",
        description="Synthesize and verify time-varying capacitor emulations "
                    "through scenario files.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a scenario and write artifacts")
    run.add_argument("scenario", help="scenario file path or bundled name")
    run.add_argument("--out", default="runs", metavar="DIR",
                     help="output root directory (default: runs/)")
    run.add_argument("--override", action="append", default=[], metavar="K=V",
                     help="override a scenario value (dotted path, repeatable)")
    run.add_argument("--quiet", action="store_true",
                     help="suppress the report on stdout")

    sub.add_parser("list", help="list bundled scenarios")

    val = sub.add_parser("validate", help="validate a scenario without running")
    val.add_argument("scenario", help="scenario file path or bundled name")
    val.add_argument("--override", action="append", default=[], metavar="K=V")
    return parser


def _load(ref: str) -> dict:
    path = Path(ref)
    if path.suffix == ".json" or path.exists():
        return load_scenario(path)
    return load_bundled(ref)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "list":
        for name in bundled_scenario_names():
            print(name)
        return EXIT_OK

    try:
        scenario = _load(args.scenario)
        scenario = apply_overrides(scenario, args.override)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE_ERROR

    from .runner import run_scenario, validate_scenario

    if args.command == "validate":
        try:
            validate_scenario(scenario)
        except TvcapError as exc:
            print(f"validation error: {exc}", file=sys.stderr)
            return EXIT_VALIDATION_ERROR
        print(f"ok: scenario {scenario['name']!r} is valid")
        return EXIT_OK

    try:
        validate_scenario(scenario)
    except TvcapError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION_ERROR

    out_dir = Path(args.out) / scenario["name"]
    try:
        report = run_scenario(scenario, out_dir)
    except TvcapError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION_ERROR
    if not args.quiet:
        print(report.render(), end="")
        print(f"artifacts: {out_dir}")
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
