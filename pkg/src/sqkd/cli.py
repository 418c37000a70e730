"""Command-line front end: rate evaluation, thresholds, curves, verification.

Four subcommands:

* ``rate`` evaluates the key-rate bound at one error rate,
* ``threshold`` finds the maximal tolerable error rate for a model,
* ``curve`` exports the full report grid over an error range,
* ``verify`` runs the randomized numerical verification suites.

Output is CSV (reals at 12 significant digits) or JSON (full precision)
on stdout or to ``--output``. With a fixed seed every command is
byte-deterministic. Exit codes: 0 success, 1 failed check or runtime
error, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Sequence

from .keyrate import (
    KeyRateReport,
    QxModel,
    ThresholdAtBoundary,
    key_rate,
    keyrate_curve,
    noise_threshold,
)
from .verification import DEFAULT_D_E, run_all_checks

__all__ = ["main", "build_parser"]

_MODEL_HELP = "channel model: equal, depolarizing, half, or explicit:<value>"


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _add_output_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--format", choices=("csv", "json"), default="csv", help="output format")
    sub.add_argument("--output", default=None, metavar="PATH", help="write to a file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sqkd",
        description="Key-rate bounds and attack-reduction verification for semi-quantum key distribution.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    rate = commands.add_parser("rate", help="evaluate the key-rate bound at one error rate")
    rate.add_argument("--q", type=float, required=True, help="Z error rate in [0, 0.5]")
    rate.add_argument("--qx-model", required=True, metavar="MODEL", help=_MODEL_HELP)
    _add_output_flags(rate)

    threshold = commands.add_parser("threshold", help="find the maximal tolerable error rate")
    threshold.add_argument("--qx-model", required=True, metavar="MODEL", help=_MODEL_HELP)
    threshold.add_argument("--tol", type=float, default=1e-6, help="bisection precision (default 1e-6)")
    _add_output_flags(threshold)

    curve = commands.add_parser("curve", help="export key-rate reports over an error-rate grid")
    curve.add_argument("--q-min", type=float, default=0.0, help="grid start (default 0)")
    curve.add_argument("--q-max", type=float, default=0.5, help="grid end (default 0.5)")
    curve.add_argument("--steps", type=int, default=51, help="number of grid points (default 51)")
    curve.add_argument("--qx-model", required=True, metavar="MODEL", help=_MODEL_HELP)
    _add_output_flags(curve)

    verify = commands.add_parser("verify", help="run the randomized verification suites")
    verify.add_argument(
        "--trials",
        type=int,
        default=100,
        help="attacks per equivalence suite and per grid point of the entropy suites (default 100)",
    )
    verify.add_argument("--seed", type=int, required=True, help="nonnegative 64-bit RNG seed")
    verify.add_argument(
        "--d-e",
        default=",".join(str(d) for d in DEFAULT_D_E),
        metavar="LIST",
        help="comma-separated ancilla dimensions to cycle through (default 2,3,4)",
    )
    _add_output_flags(verify)
    return parser


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _json_text(payload) -> str:
    return json.dumps(payload, indent=2) + "\n"


REPORT_HEADER = ("Q", "Q_X", "epsilon", "delta", "s_tau_bound", "branch", "g", "r")


def _report_row(report: KeyRateReport) -> list[str]:
    values = report.as_dict()
    return [
        value if isinstance(value, str) else _fmt(value)
        for value in (values[column] for column in REPORT_HEADER)
    ]


def _render_reports(reports: Sequence[KeyRateReport], fmt: str) -> str:
    if fmt == "json":
        payload = [r.as_dict() for r in reports]
        return _json_text(payload if len(payload) != 1 else payload[0])
    return _csv_text(REPORT_HEADER, [_report_row(r) for r in reports])


def _parse_d_e(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise ValueError(f"cannot parse ancilla dimension list {text!r}") from None
    if not dims:
        raise ValueError("ancilla dimension list is empty")
    for d in dims:
        if not 2 <= d <= 8:
            raise ValueError(f"ancilla dimension {d} outside [2, 8]")
    return dims


def _run(args: argparse.Namespace) -> tuple[str, bool]:
    """Produce the rendered output text and whether all checks passed."""
    if args.command == "rate":
        model = QxModel.parse(args.qx_model)
        return _render_reports([key_rate(args.q, model)], args.format), True

    if args.command == "threshold":
        model = QxModel.parse(args.qx_model)
        value = noise_threshold(model, tol=args.tol)
        if args.format == "json":
            payload = {"model": str(model), "threshold": value, "threshold_percent": 100.0 * value}
            return _json_text(payload), True
        return (
            _csv_text(
                ("model", "threshold", "threshold_percent"),
                [[str(model), _fmt(value), _fmt(100.0 * value)]],
            ),
            True,
        )

    if args.command == "curve":
        model = QxModel.parse(args.qx_model)
        reports = keyrate_curve(args.q_min, args.q_max, args.steps, model)
        return _render_reports(reports, args.format), True

    if args.command == "verify":
        if args.seed < 0:
            raise ValueError(f"seed must be nonnegative, got {args.seed}")
        reports = run_all_checks(args.trials, args.seed, _parse_d_e(args.d_e))
        ok = all(r.passed for r in reports)
        if args.format == "json":
            payload = [
                {
                    "check": r.check,
                    "trials": r.trials,
                    "max_residual": r.max_residual,
                    "tolerance": r.tolerance,
                    "passed": r.passed,
                }
                for r in reports
            ]
            return _json_text(payload), ok
        rows = [
            [r.check, str(r.trials), _fmt(r.max_residual), _fmt(r.tolerance), str(r.passed).lower()]
            for r in reports
        ]
        return _csv_text(("check", "trials", "max_residual", "tolerance", "passed"), rows), ok

    raise ValueError(f"unknown command {args.command!r}")


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        text, ok = _run(args)
        _emit(text, args.output)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ThresholdAtBoundary, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0 if ok else 1
