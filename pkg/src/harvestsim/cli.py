"""Command-line entry point: ``harvestsim {run,calibrate,compare}``.

Exit status is 0 on success, 2 when the input does not validate and 3 when
the simulation itself fails.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .calibration import CalibrationError, calibrate, load_calibration, write_calibration
from .compare import compare_csv, compare_rows
from .engine import run
from .report import write_report
from .scenario import ScenarioError, load_scenario

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 2, 3

log = logging.getLogger("harvestsim")


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="harvestsim",
                                description="Energy-harvesting sensor node simulator.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--seed", type=_u64, default=None, help="override the scenario seed")
    p.add_argument("--calibration", type=Path, default=None,
                   help="calibration JSON to apply to every node")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate a scenario and write reports")
    r.add_argument("--scenario", type=Path, required=True)
    r.add_argument("--out", type=Path, required=True, help="output directory")
    r.add_argument("--workers", type=int, default=1)

    c = sub.add_parser("calibrate", help="fit leakage and buck efficiency")
    c.add_argument("--out", type=Path, required=True, help="calibration JSON to write")

    m = sub.add_parser("compare", help="adaptive node vs battery and pure-harvesting baselines")
    m.add_argument("--scenario", type=Path, required=True)
    m.add_argument("--out", type=Path, default=None, help="CSV path (default: stdout)")
    return p


def _scenario(args):
    cal = None
    if args.calibration is not None:
        if not args.calibration.is_file():
            raise ScenarioError([f"calibration file not found: {args.calibration}"])
        try:
            cal = load_calibration(args.calibration)
        except ValueError as exc:
            raise ScenarioError([str(exc)]) from None
    return load_scenario(args.scenario, seed=args.seed, calibration=cal)


def cmd_run(args) -> int:
    scenario = _scenario(args)
    report = run(scenario, workers=max(1, args.workers))
    for path in write_report(report, args.out):
        print(path)
    return EXIT_OK


def cmd_calibrate(args) -> int:
    doc = calibrate()
    write_calibration(doc, args.out)
    print(f"leakage_uw = {doc['leakage_uw']}")
    print(f"eta_buck   = {doc['eta_buck']}")
    for key, hours in doc["predictions"].items():
        print(f"{key:26s} {hours:.2f} h")
    return EXIT_OK


def cmd_compare(args) -> int:
    scenario = _scenario(args)
    text = compare_csv(compare_rows(scenario))
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text, encoding="utf-8")
        print(args.out)
    return EXIT_OK


COMMANDS = {"run": cmd_run, "calibrate": cmd_calibrate, "compare": cmd_compare}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ScenarioError as exc:
        for err in exc.errors:
            print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID
    except CalibrationError as exc:
        print(f"calibration failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - report, don't traceback, unless verbose
        if args.verbose:
            log.exception("simulation failed")
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
