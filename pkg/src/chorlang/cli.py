"""Command-line driver: check, run, project, simulate, explore and conformance.

Exit codes: 0 success, 1 diagnostics (syntax or typing), 2 projection failure
or a deadlocked system, 3 conformance failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import conformance as qc
from .chor import show_chor, show_type
from .network import explore, show_net, show_system, simulate, sys_label_json
from .parser import ParseError, SourceFile, parse
from .projection import ProjectionFailure, project, project_system
from .semantics import run, show_redex
from .statics import ChorTypeError, check_program

OK, DIAGNOSTICS, PROJECTION, CONFORMANCE = 0, 1, 2, 3


def default_seed() -> int:
    return int(os.environ.get("QC_SEED", "0"))


class _Abort(Exception):
    def __init__(self, code: int) -> None:
        self.code = code


def _load(path: str, typecheck: bool = True) -> SourceFile:
    text = Path(path).read_text()
    try:
        sf = parse(text)
    except ParseError as err:
        for d in err.diagnostics:
            print(d.render(path), file=sys.stderr)
        raise _Abort(DIAGNOSTICS) from None
    if typecheck:
        try:
            check_program(sf.main, sf.table, sf.declared)
        except ChorTypeError as err:
            print(f"{path}: error[{err.rule}]: {err.message}", file=sys.stderr)
            raise _Abort(DIAGNOSTICS) from None
    return sf


def _write_jsonl(path: str, rows) -> None:
    with open(path, "w") as out:
        for row in rows:
            out.write(json.dumps(row, sort_keys=True) + "\n")


def cmd_check(args: argparse.Namespace) -> int:
    sf = _load(args.file, typecheck=False)
    try:
        t = check_program(sf.main, sf.table, sf.declared)
    except ChorTypeError as err:
        print(f"{args.file}: error[{err.rule}]: {err.message}", file=sys.stderr)
        return DIAGNOSTICS
    print(show_type(t))
    return OK


def cmd_run(args: argparse.Namespace) -> int:
    sf = _load(args.file, not args.unchecked)
    report = run(sf.main, sf.table, args.fuel, args.strategy, args.seed)
    for r, c in report.trace if args.verbose else ():
        print(f"{show_redex(r)} => {show_chor(c)}")
    if report.terminals and len(report.terminals) > 1:
        for c in sorted(map(show_chor, report.terminals)):
            print(f"terminal: {c}")
    else:
        print(show_chor(report.final))
    print(f"status: {report.status}, steps: {len(report.trace)}")
    if args.trace:
        _write_jsonl(args.trace, ({"step": i, "redex": show_redex(r), "choreography": show_chor(c)}
                                  for i, (r, c) in enumerate(report.trace, 1)))
    return OK if report.status in ("value", "fuel") else DIAGNOSTICS


def _system(sf: SourceFile, path: str):
    try:
        return project_system(sf.main, sf.locations)
    except ProjectionFailure as err:
        print(f"{path}: projection failed: {err}", file=sys.stderr)
        raise _Abort(PROJECTION) from None


def cmd_project(args: argparse.Namespace) -> int:
    sf = _load(args.file, not args.unchecked)
    locs = sf.locations if args.all or not args.loc else args.loc
    status = OK
    for loc in locs:
        try:
            print(f"{loc} |> {show_net(project(sf.main, loc))}")
        except ProjectionFailure as err:
            print(f"{loc} |> undefined: {err}")
            status = PROJECTION
    return status


def cmd_simulate(args: argparse.Namespace) -> int:
    sf = _load(args.file, not args.unchecked)
    system = _system(sf, args.file)
    report = simulate(system, sf.table, args.fuel, args.seed)
    for label, s in report.trace if args.verbose else ():
        print(f"{sys_label_json(label)} => {show_system(s)}")
    print(show_system(report.final))
    print(f"status: {report.status}, steps: {len(report.trace)}")
    if args.trace:
        _write_jsonl(args.trace, ({"step": i, "label": sys_label_json(l),
                                   "system": {loc: show_net(e) for loc, e in s}}
                                  for i, (l, s) in enumerate(report.trace, 1)))
    return PROJECTION if report.status == "deadlock" else OK


def cmd_explore(args: argparse.Namespace) -> int:
    sf = _load(args.file, not args.unchecked)
    ex = explore(_system(sf, args.file), sf.table, args.depth)
    print(f"states: {len(ex.states)}, edges: {len(ex.edges)}, all-values: {len(ex.all_values)}, "
          f"deadlocked: {len(ex.deadlocked)}, frontier: {len(ex.frontier)}")
    for tag, ids in (("all-values", ex.all_values), ("deadlocked", ex.deadlocked)):
        for i in sorted(ids):
            print(f"{tag}: {show_system(ex.states[i])}")
    if args.graph:
        Path(args.graph).write_text(json.dumps(ex.graph_json(), indent=2) + "\n")
    return PROJECTION if ex.deadlocked else OK


def cmd_conformance(args: argparse.Namespace) -> int:
    reports = qc.run_suite(args.suite, args.seed, args.cases)
    for r in reports:
        print(r.summary())
    if args.report:
        doc = {"suite": args.suite, "seed": args.seed, "cases": args.cases,
               "ok": all(r.ok for r in reports), "theorems": [r.to_json() for r in reports]}
        Path(args.report).write_text(json.dumps(doc, indent=2) + "\n")
    return OK if all(r.ok for r in reports) else CONFORMANCE


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chorlang", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def with_file(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("file", help="a .chor source file")
        if name != "check":
            p.add_argument("--unchecked", action="store_true",
                           help="skip type checking before running")
        return p

    with_file("check", "type-check a program and print its type").set_defaults(fn=cmd_check)

    p = with_file("run", "evaluate with the choreographic semantics")
    p.add_argument("--strategy", choices=("leftmost", "random", "exhaustive"), default="leftmost")
    p.add_argument("--fuel", type=int, default=1000)
    p.add_argument("--seed", type=int, default=default_seed())
    p.add_argument("--trace", metavar="OUT.jsonl")
    p.add_argument("-v", "--verbose", action="store_true", help="print every step")
    p.set_defaults(fn=cmd_run)

    p = with_file("project", "print each location's network program")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--loc", action="append", metavar="L")
    group.add_argument("--all", action="store_true")
    p.set_defaults(fn=cmd_project)

    p = with_file("simulate", "run one schedule of the projected system")
    p.add_argument("--seed", type=int, default=None,
                   help="random schedule seed (default: QC_SEED, else the first enabled step)")
    p.add_argument("--fuel", type=int, default=1000)
    p.add_argument("--trace", metavar="OUT.jsonl")
    p.add_argument("-v", "--verbose", action="store_true", help="print every step")
    p.set_defaults(fn=cmd_simulate)

    p = with_file("explore", "explore every schedule of the projected system")
    p.add_argument("--depth", type=int, default=40)
    p.add_argument("--graph", metavar="OUT.json")
    p.set_defaults(fn=cmd_explore)

    p = sub.add_parser("conformance", help="run the property suites on generated programs")
    p.add_argument("--suite", choices=qc.SUITES, default="all")
    p.add_argument("--seed", type=int, default=default_seed())
    p.add_argument("--cases", type=int, default=50)
    p.add_argument("--report", metavar="OUT.json")
    p.set_defaults(fn=cmd_conformance)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "command", None) == "simulate" and args.seed is None and "QC_SEED" in os.environ:
        args.seed = default_seed()
    try:
        return args.fn(args)
    except _Abort as abort:
        return abort.code
    except OSError as err:
        print(f"chorlang: {err}", file=sys.stderr)
        return DIAGNOSTICS


if __name__ == "__main__":
    sys.exit(main())
