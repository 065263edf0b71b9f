"""Command line: ``mgroupoid {validate,check,witness,check-all} ...``.

Exit codes: 0 all checks pass, 1 some check fails, 2 usage or parse error.
A GSPEC argument may also be ``fixture:NAME`` for a built-in fixture.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from . import amenability as am
from . import fixtures
from . import treeing as tr
from .funkit import ALGEBRAIC_TOL, SPECTRAL_TOL
from .groupoid import FiniteGroupoid, GroupoidError, validate
from .io import ParseError, load_function, load_gspec, load_treeing, write_json
from .report import CheckReport, merge
from .suites import (SUITES, SuiteConfig, check_all, suite_amen, suite_cnd, suite_haagerup,
                     suite_pd, suite_treeing, suite_vn, validate_report)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--seed", type=int, default=0, help="seed for randomised probes")
    p.add_argument("--samples", type=int, default=200, help="random instances per suite")
    p.add_argument("--tol-algebraic", type=float, default=ALGEBRAIC_TOL)
    p.add_argument("--tol-spectral", type=float, default=SPECTRAL_TOL)
    p.add_argument("--out", type=Path, default=None, help="directory for witness files")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mgroupoid",
                                     description="Finite measured groupoid checks and witnesses.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check the groupoid axioms of a GSPEC file")
    p.add_argument("gspec")
    _common(p)

    p = sub.add_parser("check", help="run a named check suite")
    p.add_argument("suite", help="one of " + ", ".join(SUITES))
    p.add_argument("gspec")
    p.add_argument("files", nargs="*", help="function (pd, cnd, amen) or treeing (treeing, haagerup) JSON")
    p.add_argument("--stages", type=int, default=3)
    _common(p)

    p = sub.add_parser("witness", help="build a Haagerup or amenability witness sequence")
    p.add_argument("source", choices=("treeing", "amen"))
    p.add_argument("gspec")
    p.add_argument("rest", nargs="+", metavar="ARG", help="[treeing.json] stages")
    _common(p)

    p = sub.add_parser("check-all", help="every suite on every built-in fixture")
    _common(p)
    return parser


def _config(args, stages: int = 3) -> SuiteConfig:
    if args.samples < 1:
        raise UsageError("--samples must be positive")
    return SuiteConfig(seed=args.seed, samples=args.samples, tol_algebraic=args.tol_algebraic,
                       tol_spectral=args.tol_spectral, stages=stages)


def _load(path: str) -> FiniteGroupoid:
    if path.startswith("fixture:"):
        try:
            return fixtures.get(path.split(":", 1)[1])
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from None
    return load_gspec(path)


def _valid_groupoid(path: str) -> FiniteGroupoid:
    G = _load(path)
    problems = validate(G)
    if problems:
        raise GroupoidError(problems)
    return G


def _one_file(files: Sequence[str], what: str) -> str:
    if len(files) != 1:
        raise UsageError(f"expected exactly one {what} file, got {len(files)}")
    return files[0]


def cmd_validate(args) -> CheckReport:
    try:
        G = _load(args.gspec)
    except GroupoidError as exc:
        rep = CheckReport("validate", Path(args.gspec).stem)
        rep.add("groupoid.axioms", False, float(len(exc.violations)), exc.violations)
        return rep
    return validate_report(G)


def cmd_check(args) -> CheckReport:
    if args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}")
    cfg = _config(args, args.stages)
    G = _valid_groupoid(args.gspec)
    if args.suite == "pd":
        return suite_pd(load_function(G, _one_file(args.files, "function")), cfg)
    if args.suite == "cnd":
        return suite_cnd(load_function(G, _one_file(args.files, "function")), cfg)
    if args.suite == "treeing":
        return suite_treeing(G, load_treeing(G, _one_file(args.files, "treeing")), cfg)
    if args.suite == "haagerup":
        return suite_haagerup(G, load_treeing(G, _one_file(args.files, "treeing")), cfg)
    if args.suite == "vn":
        if args.files:
            raise UsageError("the vn suite takes no input files")
        return suite_vn(G, cfg)
    F = load_function(G, _one_file(args.files, "function")) if args.files else None
    return suite_amen(G, cfg, F)


def _stages_arg(value: str) -> int:
    try:
        m = int(value)
    except ValueError:
        raise UsageError(f"stage count must be an integer, got {value!r}") from None
    if m < 1:
        raise UsageError("stage count must be positive")
    return m


def cmd_witness(args) -> CheckReport:
    G = _valid_groupoid(args.gspec)
    cfg = _config(args)
    if args.source == "treeing":
        if len(args.rest) != 2:
            raise UsageError("usage: witness treeing GSPEC TREEING.json STAGES")
        Q = load_treeing(G, args.rest[0])
        m = _stages_arg(args.rest[1])
        rep = suite_treeing(G, Q, cfg)
        if rep.failed:
            rep.suite = "witness-treeing"
            return rep
        stages = tr.haagerup_from_treeing(G, Q, m)
        rep = suite_haagerup(G, Q, cfg, stages)
        rep.suite = "witness-treeing"
        payload = [s.to_json() for s in stages]
        name = "treeing_witness.json"
    else:
        if len(args.rest) != 1:
            raise UsageError("usage: witness amen GSPEC STAGES")
        m = _stages_arg(args.rest[0])
        fields = am.interpolating_fields(G, m)[1:]
        report = am.amenability_witness_check(fields)
        rep = CheckReport("witness-amen", G.name or Path(args.gspec).stem)
        for k, (xi, dev) in enumerate(zip(fields, report.deviations), start=1):
            norm_dev = max(abs(v - 1.0) for v in am.fibre_norms(xi).values())
            rep.within(f"amen.stage[{k}].unit_field", norm_dev, cfg.tol_algebraic)
            rep.add(f"amen.stage[{k}].deviation", True, dev, {"support": report.support_counts[k - 1]})
        rep.add("amen.deviation_nonincreasing", report.nonincreasing, 0.0, report.note)
        payload = [xi.to_json() for xi in fields]
        name = "amen_witness.json"
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        write_json(args.out / name, payload)
    return rep


def cmd_check_all(args) -> CheckReport:
    cfg = _config(args)
    reports = check_all(list(fixtures.all_fixtures().values()), fixtures.TREEINGS, cfg)
    return merge("check-all", reports)


COMMANDS = {"validate": cmd_validate, "check": cmd_check, "witness": cmd_witness,
            "check-all": cmd_check_all}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits with 2 on usage errors
        return int(exc.code or 0)
    try:
        report = COMMANDS[args.command](args)
    except (UsageError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GroupoidError as exc:
        report = CheckReport(args.command, Path(args.gspec).stem)
        report.add("groupoid.axioms", False, float(len(exc.violations)), exc.violations)
    print(report.render(args.format))
    return report.exit_status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
