"""Command line entry point: ``imufill {scan,impute,eval}``.

Exit status is 0 on success, 1 when any capture failed to process and 2 for
usage errors.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .capture import Activity, SensorKind
from .evaluation import METRICS_HEADER, GapMode, GapSpec, compare_baselines, format_metrics
from .exceptions import ImputationError
from .gaps import detect_gaps
from .knn import ImputationConfig, Weighting
from .pipeline import discover_captures, load_source, run_pipeline, scan_directory

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _threshold(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value > 1:
        raise argparse.ArgumentTypeError(f"must be > 1, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    common.add_argument("--input", required=True, type=Path, help="capture file or directory")
    common.add_argument("--sensor", choices=[s.value for s in SensorKind],
                        help="sensor kind; default: taken from the directory layout")
    common.add_argument("--activity", choices=[a.value for a in Activity],
                        help="activity label; default: taken from the directory layout")
    common.add_argument("--duration-s", type=_positive_int, default=5)
    common.add_argument("--k", type=_positive_int, default=5)
    common.add_argument("--weighting", choices=["uniform", "inverse-distance"], default="uniform")
    common.add_argument("--gap-threshold", type=_threshold, default=1.5)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="imufill",
        description="Detect and fill missing samples in inertial sensor captures.",
        allow_abbrev=False,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("scan", parents=[common], allow_abbrev=False,
                   help="classify captures by missing-sample count")

    imp = sub.add_parser("impute", parents=[common], allow_abbrev=False,
                         help="fill missing samples and write completed captures")
    imp.add_argument("--output", required=True, type=Path)
    imp.add_argument("--provenance", action="store_true",
                     help="append an observed/imputed column to every row")
    imp.add_argument("--jobs", type=_positive_int, default=os.cpu_count() or 1)

    ev = sub.add_parser("eval", parents=[common], allow_abbrev=False,
                        help="score KNN against baselines on injected gaps")
    ev.add_argument("--gap-mode", choices=[m.value for m in GapMode], default="trailing")
    ev.add_argument("--gap-count", type=_positive_int,
                    help="rows to remove; default: one fill quota of the sensor")
    ev.add_argument("--gap-position", type=int, help="first removed row for internal_at")
    ev.add_argument("--seed", type=int, default=0)
    return parser


def _config(args) -> ImputationConfig:
    return ImputationConfig(args.k, Weighting.parse(args.weighting), args.gap_threshold)


def _check_input(args) -> None:
    if not args.input.exists():
        raise UsageError(f"input path does not exist: {args.input}")


def cmd_scan(args) -> int:
    _check_input(args)
    stats, listing = scan_directory(
        args.input, args.sensor, args.activity, args.duration_s, args.gap_threshold
    )
    for rel, report, error in sorted(listing, key=lambda item: item[0]):
        if report is None:
            print(f"{rel}\tfailed\t{error}")
        else:
            print(f"{rel}\t{report.bucket.value}\tmissing={report.missing_count}")
    if listing:
        print()
    print(stats.format_table())
    return EXIT_FAILURE if stats.failed else EXIT_OK


def cmd_impute(args) -> int:
    _check_input(args)
    summary = run_pipeline(
        args.input,
        args.output,
        _config(args),
        sensor=args.sensor,
        activity=args.activity,
        duration_s=args.duration_s,
        provenance=args.provenance,
        jobs=args.jobs,
    )
    print(summary.format_text())
    return summary.exit_code


def cmd_eval(args) -> int:
    _check_input(args)
    if args.gap_mode == "internal_at" and args.gap_position is None:
        raise UsageError("--gap-mode internal_at needs --gap-position")
    config = _config(args)
    lines = []
    failed = False
    for src in discover_captures(args.input, args.sensor, args.activity):
        try:
            capture = load_source(src, args.duration_s)
            if detect_gaps(capture, config.gap_threshold).missing_count:
                continue
            count = args.gap_count or capture.sensor.fill_quota
            spec = GapSpec(args.gap_mode, count, args.gap_position, args.seed)
            table = compare_baselines(capture, spec, config)
        except (OSError, ValueError) as exc:
            print(f"{src.relpath}: {type(exc).__name__}: {exc}", file=sys.stderr)
            failed = True
            continue
        lines.extend(format_metrics(table, str(src.relpath)))
    if not lines:
        print("no complete captures to evaluate", file=sys.stderr)
        return EXIT_FAILURE
    print(METRICS_HEADER)
    print("\n".join(lines))
    return EXIT_FAILURE if failed else EXIT_OK


COMMANDS = {"scan": cmd_scan, "impute": cmd_impute, "eval": cmd_eval}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"imufill: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ImputationError as exc:
        print(f"imufill: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
