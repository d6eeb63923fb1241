"""Command-line front end: ``analyze``, ``verify``, ``converge`` and ``suite``.

Exit codes: 0 when every requested check passes, 1 when any fails, 2 for
unreadable or inconsistent input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import acceptance
from . import oracle as orc
from . import report
from .errors import CompopError

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _read_input(path):
    if path is None or path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _emit(text, path):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _load(args):
    return report.parse_problem(_read_input(args.input), args.truncation, args.tolerance, args.seed)


def cmd_run(args, verify):
    spec = _load(args)
    if args.filter:
        spec.tasks = [t for t in spec.tasks if t["task"] == args.filter]
    out = report.run(spec, verify=verify, jobs=args.jobs, timings=args.timings)
    _emit(report.dumps(out), args.out)
    if args.csv:
        est = orc.compression_norm_curve(spec.phi, spec.A, spec.b if spec.affine else None, spec.truncation)
        Path(args.csv).write_text(report.curve_csv(est))
    return EXIT_OK if out["passed"] else EXIT_FAIL


def cmd_converge(args):
    spec = _load(args)
    est = orc.compression_norm_curve(spec.phi, spec.A, spec.b if spec.affine else None, spec.truncation)
    check = report._oracle_check(spec)
    summary = {"values": est.values, "bound_kind": est.bound_kind, "converged": est.converged, "final": est.final, "check": check}
    csv_text = report.curve_csv(est)
    if args.csv:
        Path(args.csv).write_text(csv_text)
        _emit(report.dumps(summary), args.out)
    else:
        _emit(csv_text, args.out)
    return EXIT_OK if check["passed"] else EXIT_FAIL


def cmd_suite(args):
    rows = acceptance.run_suite(args.seed or 0, args.filter)
    for row in rows:
        status = "PASS" if row.passed else "FAIL"
        print(f"{row.number:>2}  {status}  {row.name}")
    if args.out:
        payload = {
            "seed": args.seed or 0,
            "rows": [{"number": r.number, "name": r.name, "tags": list(r.tags), "passed": r.passed, "detail": r.detail} for r in rows],
            "passed": all(r.passed for r in rows),
        }
        Path(args.out).write_text(report.dumps(payload))
    return EXIT_OK if all(r.passed for r in rows) else EXIT_FAIL


def build_parser():
    parser = argparse.ArgumentParser(prog="compop", description="Composition operators on spaces of entire functions.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, problem=True):
        if problem:
            p.add_argument("--input", help="problem JSON file ('-' or omitted reads stdin)")
            p.add_argument("--csv", help="write the compression-norm curve as CSV here")
            p.add_argument("--tolerance", type=float, help="override the relative tolerance")
            p.add_argument("--truncation", type=int, help="override the truncation degree N")
            p.add_argument("--jobs", type=int, default=1, help="tasks run concurrently")
            p.add_argument("--timings", action="store_true", help="add wall-clock seconds per task")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--seed", type=int, help="seed for randomized checks")
        p.add_argument("--filter", help="restrict to one task (problem commands) or a row name, number or tag (suite)")

    common(sub.add_parser("analyze", help="closed-form answers only"))
    common(sub.add_parser("verify", help="closed forms plus oracle cross-checks"))
    common(sub.add_parser("converge", help="compression-norm curve as CSV"))
    common(sub.add_parser("suite", help="built-in acceptance suite"), problem=False)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "analyze":
            return cmd_run(args, verify=False)
        if args.command == "verify":
            return cmd_run(args, verify=True)
        if args.command == "converge":
            return cmd_converge(args)
        return cmd_suite(args)
    except (CompopError, OSError, json.JSONDecodeError) as exc:
        code = getattr(exc, "code", type(exc).__name__)
        print(json.dumps({"error": code, "message": str(exc)}), file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
