"""Command-line interface: certify spec files, run the catalog, print
reports. Exit codes: 0 pass, 1 check failure / expectation mismatch,
2 input or schema error."""

from __future__ import annotations

import argparse
import sys

from .certify import GROUPS, RunConfig, run_certify
from .chart import ChartError, SamplingExhaustedError
from .expr import ParseError
from .grw import catalog_get, catalog_names
from .report import (DEGENERATE, INFORMATIONAL, PASS, SKIPPED,
                     emit_report, render_text)
from .schema import SpecFileError


def _add_run_flags(parser):
    parser.add_argument("--points", type=int, default=50,
                        help="sample points per run (default 50)")
    parser.add_argument("--seed", type=int, default=0,
                        help="sampling seed (default 0)")
    parser.add_argument("--tol", type=float, default=None,
                        help="override both hypothesis and conclusion tolerances")
    parser.add_argument("--hypothesis-tol", type=float, default=1e-7)
    parser.add_argument("--conclusion-tol", type=float, default=1e-7)
    parser.add_argument("--cluster-tol", type=float, default=1e-6)
    parser.add_argument("--kappa", type=float, default=1.0,
                        help="gravitational coupling (default 1)")
    parser.add_argument("--workers", type=int, default=1,
                        help="worker threads for point evaluation")
    parser.add_argument("--checks", type=str, default=None,
                        help=f"comma list of groups to run "
                             f"(default all: {','.join(GROUPS)})")
    parser.add_argument("--basepoint", type=str, default=None,
                        help="comma list of coordinates overriding the "
                             "spec-file basepoint")
    parser.add_argument("--json", type=str, default=None, metavar="PATH",
                        help="also write the report as JSON to PATH")
    parser.add_argument("--quiet", action="store_true",
                        help="suppress the text report on stdout")


def _config_from_args(args, checks=None) -> RunConfig:
    hyp = args.tol if args.tol is not None else args.hypothesis_tol
    conc = args.tol if args.tol is not None else args.conclusion_tol
    if checks is None and args.checks:
        checks = tuple(s.strip() for s in args.checks.split(",") if s.strip())
    basepoint = None
    if args.basepoint:
        basepoint = tuple(float(v) for v in args.basepoint.split(","))
    return RunConfig(points=args.points, seed=args.seed,
                     hypothesis_tol=hyp, conclusion_tol=conc,
                     cluster_tol=args.cluster_tol, kappa=args.kappa,
                     workers=args.workers, checks=checks,
                     basepoint=basepoint)


def _finish(report, args) -> int:
    if not args.quiet:
        sys.stdout.write(render_text(report))
    if args.json:
        emit_report(report, "json", args.json)
    return 0 if report.verdict == PASS else 1


def _expectation_mismatches(report, expected) -> list[str]:
    problems = []
    if "verdict" in expected and report.verdict != expected["verdict"]:
        problems.append(f"verdict {report.verdict!r}, "
                        f"expected {expected['verdict']!r}")
    if "fluid" in expected:
        rec = report.find("fluid-decompose")
        branch = (DEGENERATE if rec.status == DEGENERATE else
                  ("nondegenerate" if rec.ok else "anomalous"))
        if branch != expected["fluid"]:
            problems.append(f"fluid branch {branch!r}, "
                            f"expected {expected['fluid']!r}")
    for name in expected.get("ok", ()):
        rec = report.find(name)
        if rec.status == SKIPPED or rec.ok is not True:
            problems.append(f"{name}: expected within tolerance, "
                            f"got status {rec.status} ok={rec.ok}")
    for name in expected.get("not_ok", ()):
        rec = report.find(name)
        if rec.status == SKIPPED or rec.ok is not False:
            problems.append(f"{name}: expected out of tolerance, "
                            f"got status {rec.status} ok={rec.ok}")
    for name in expected.get("informational", ()):
        rec = report.find(name)
        if rec.status not in (INFORMATIONAL, SKIPPED):
            problems.append(f"{name}: expected informational, "
                            f"got status {rec.status}")
    return problems


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="grwcert",
        description="Certify curvature identities of warped-product "
                    "space-times from symbolic metric charts.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_certify = sub.add_parser("certify", help="run every selected suite "
                                               "on a JSON chart file")
    p_certify.add_argument("file", help="chart spec file (JSON, schema 1)")
    _add_run_flags(p_certify)

    p_catalog = sub.add_parser("catalog", help="list or run built-in metrics")
    catalog_sub = p_catalog.add_subparsers(dest="catalog_command",
                                           required=True)
    catalog_sub.add_parser("list", help="print catalog names")
    p_run = catalog_sub.add_parser("run", help="certify a catalog metric "
                                               "and compare expectations")
    p_run.add_argument("name", help="catalog metric name")
    _add_run_flags(p_run)

    p_ladder = sub.add_parser(
        "ladder", help="run only sanity, fluid, hypotheses and the "
                       "identity ladder on a chart file")
    p_ladder.add_argument("file")
    _add_run_flags(p_ladder)

    args = parser.parse_args(argv)
    try:
        if args.command == "certify":
            report = run_certify(args.file, _config_from_args(args))
            return _finish(report, args)
        if args.command == "ladder":
            config = _config_from_args(
                args, checks=("sanity", "fluid", "hypotheses", "ladder"))
            report = run_certify(args.file, config)
            return _finish(report, args)
        if args.command == "catalog":
            if args.catalog_command == "list":
                for name in catalog_names():
                    print(name)
                return 0
            try:
                entry = catalog_get(args.name)
            except KeyError as err:
                print(err.args[0], file=sys.stderr)
                return 2
            report = run_certify(entry.chart, _config_from_args(args))
            if not args.quiet:
                sys.stdout.write(render_text(report))
            if args.json:
                emit_report(report, "json", args.json)
            problems = _expectation_mismatches(report, entry.expected)
            if problems:
                print("expectation mismatches:", file=sys.stderr)
                for line in problems:
                    print(f"  {line}", file=sys.stderr)
                return 1
            print(f"catalog {args.name}: outcomes match expectations")
            return 0
        parser.error(f"unknown command {args.command!r}")
    except (SpecFileError, ChartError, ParseError, FileNotFoundError,
            SamplingExhaustedError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
