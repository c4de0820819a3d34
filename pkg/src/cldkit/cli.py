"""Command-line interface.

Exit codes: 0 success, 1 validation or verification failure, 2 usage
error, 3 runtime error (unreadable files, numeric blowup, cycle cap).
Results go to stdout, diagnostics to stderr, and nothing timestamped is
ever printed, so identical inputs give identical bytes.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import dsl, engine, export, loops, signs
from .errors import (
    CycleLimitError,
    NumericBlowupError,
    ToolkitError,
    UnknownPolarityError,
    UnknownReferenceError,
    UnverifiedLoopError,
)
from .model import Link, LoopClass, Model, Polarity, validate
from .scenario import parse_scenario


class _Fail(Exception):
    def __init__(self, code: int, message: str | None = None):
        super().__init__(message)
        self.code = code
        self.message = message


def _color(args, text: str, code: str) -> str:
    if getattr(args, "color", False):
        return f"\x1b[{code}m{text}\x1b[0m"
    return text


def _read_file(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise _Fail(3, f"cannot read {path}: {exc.strerror or exc}")


def _write_file(path: str, content: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(content)
    except OSError as exc:
        raise _Fail(3, f"cannot write {path}: {exc.strerror or exc}")


def _load_model(args, path: str) -> Model:
    result = dsl.parse_model(_read_file(path))
    for diag in result.diagnostics:
        color = "31" if diag.severity is dsl.Severity.ERROR else "33"
        print(f"{path}:{_color(args, diag.render(), color)}", file=sys.stderr)
    if result.model is None:
        raise _Fail(1)
    problems = validate(result.model)
    if problems:
        for v in problems:
            print(f"{path}: error[{v.code}] {v.location}: {v.message}", file=sys.stderr)
        raise _Fail(1)
    return result.model


def _table(rows: list[tuple], headers: tuple[str, ...]) -> str:
    widths = [len(h) for h in headers]
    cells = [[str(c) for c in row] for row in rows]
    for row in cells:
        for i, c in enumerate(row):
            widths[i] = max(widths[i], len(c))
    out = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)).rstrip()]
    for row in cells:
        out.append("  ".join(c.ljust(widths[i]) for i, c in enumerate(row)).rstrip())
    return "\n".join(out)


def _seq_str(sequence) -> str:
    return "(" + ",".join(str(v) for v in sequence) + ")"


# ---------------------------------------------------------------------------
# Subcommands

def _cmd_check(args) -> int:
    result = dsl.parse_model(_read_file(args.model))
    for diag in result.diagnostics:
        color = "31" if diag.severity is dsl.Severity.ERROR else "33"
        print(f"{args.model}:{_color(args, diag.render(), color)}", file=sys.stderr)
    if result.model is None:
        return 1
    problems = validate(result.model)
    if problems:
        for v in problems:
            print(f"{args.model}: error[{v.code}] {v.location}: {v.message}", file=sys.stderr)
        return 1
    model = result.model
    warnings = len(result.warnings)
    note = f", {warnings} warnings" if warnings else ""
    print(
        f"ok: {model.name}: {len(model.variables)} variables, "
        f"{len(model.links)} links, {len(model.loops)} loops{note}"
    )
    return 0


def _cmd_loops(args) -> int:
    model = _load_model(args, args.model)
    if args.all:
        try:
            found = loops.enumerate_cycles(model, max_len=args.max_len)
        except CycleLimitError as exc:
            raise _Fail(3, str(exc))
        names = loops.match_declared(model, found)
        records = [
            (names.get(f.sequence), f.sequence, f.minus_count, f.loop_class)
            for f in found
        ]
    else:
        records = []
        for verdict, decl in zip(loops.verify_declared(model), model.loops):
            cls = verdict.computed_class if verdict.found else None
            minus = (
                loops.classify(model, decl.sequence)[0] if verdict.found else None
            )
            records.append((decl.name, decl.sequence, minus, cls))

    if args.json:
        doc = [
            {
                "name": name,
                "sequence": list(seq),
                "minus_count": minus,
                "class": cls.value if cls else None,
            }
            for name, seq, minus, cls in records
        ]
        print(json.dumps(doc, indent=2))
        return 0

    rows = [
        (
            name or "-",
            _seq_str(seq),
            len(seq),
            "?" if minus is None else minus,
            cls.value if cls else "not found",
        )
        for name, seq, minus, cls in records
    ]
    print(_table(rows, ("name", "sequence", "len", "minus", "class")))
    counts = {}
    for _, _, _, cls in records:
        key = cls.value if cls else "not found"
        counts[key] = counts.get(key, 0) + 1
    summary = ", ".join(f"{v} {k}" for k, v in sorted(counts.items()))
    print(f"{len(records)} loops: {summary}")
    return 0


def _cmd_verify(args) -> int:
    model = _load_model(args, args.model)
    verdicts = loops.verify_declared(model)
    declared = {d.name: d for d in model.loops}
    rows = []
    all_ok = True
    for v in verdicts:
        decl = declared[v.loop_name]
        if not v.found:
            missing = " ".join(f"{a}->{b}" for a, b in v.missing_edges)
            status = _color(args, f"missing {missing}", "31")
            all_ok = False
        elif not v.class_matches:
            status = _color(
                args,
                f"mismatch: declared {decl.kind.value}, computed {v.computed_class.value}",
                "31",
            )
            all_ok = False
        else:
            status = _color(args, "ok", "32")
        rows.append((v.loop_name, _seq_str(decl.sequence), decl.kind.value, status))
    print(_table(rows, ("name", "sequence", "declared", "status")))
    found = sum(1 for v in verdicts if v.found)
    matched = sum(1 for v in verdicts if v.class_matches)
    classes = [v.computed_class for v in verdicts if v.found]
    summary = (
        f"{found}/{len(verdicts)} found, {matched}/{len(verdicts)} class match "
        f"({sum(1 for c in classes if c is LoopClass.REINFORCING)} reinforcing, "
        f"{sum(1 for c in classes if c is LoopClass.BALANCING)} balancing)"
    )
    print(summary)
    return 0 if all_ok else 1


def _parse_fixes(fixes: list[str]) -> dict[tuple[int, int], Polarity]:
    parsed = {}
    for text in fixes:
        try:
            pair_part, sym = text.rsplit(":", 1)
            a, b = pair_part.split("->")
            pol = Polarity(sym.strip())
            if pol is Polarity.UNKNOWN:
                raise ValueError
            parsed[(int(a.strip()), int(b.strip()))] = pol
        except (ValueError, KeyError):
            raise _Fail(2, f"bad --fix {text!r}; expected the form 2->15:+ or 19->8:-")
    return parsed


def _cmd_infer_signs(args) -> int:
    model = _load_model(args, args.model)
    fixes = _parse_fixes(args.fix or [])
    if fixes:
        new_links = []
        for link in model.links:
            if link.pair in fixes:
                link = Link(link.source, link.target, fixes.pop(link.pair), link.anchor)
            new_links.append(link)
        if fixes:
            missing = ", ".join(f"{a}->{b}" for a, b in fixes)
            raise _Fail(1, f"--fix names links not in the model: {missing}")
        model = model.with_links(new_links)
    try:
        system = signs.build_system(model)
    except UnverifiedLoopError as exc:
        raise _Fail(1, str(exc))
    solution = signs.solve(system, prefer_plus=True)
    print(f"unknowns: {len(system.unknowns)}")
    print(f"constraints: {len(system.constraints)}")
    print(f"rank: {solution.rank}")
    print(f"nullspace dimension: {solution.nullspace_dim}")
    if not solution.consistent:
        witness = ", ".join(solution.conflict_witness or ())
        print(f"consistent: no (conflicting loops: {witness})")
        return 1
    print("consistent: yes")
    applied = signs.apply_solution(model, solution)
    if args.emit:
        for link in applied.links:
            anchor = f' "{link.anchor}"' if link.anchor else ""
            print(f"link {link.source} -> {link.target} {link.polarity.symbol}{anchor}")
    elif system.unknowns:
        rows = [
            (f"{a}->{b}", solution.assignment[(a, b)].symbol)
            for a, b in system.unknowns
        ]
        print(_table(rows, ("link", "sign")))
    return 0


def _cmd_analyze(args) -> int:
    model = _load_model(args, args.model)
    try:
        var_counts = loops.loop_participation(model, over=args.over)
        link_counts = loops.link_participation(model, over=args.over)
    except CycleLimitError as exc:
        raise _Fail(3, str(exc))
    if model.variables:
        rows = [
            (vid, model.variables_by_id[vid].name, count)
            for vid, count in var_counts.items()
        ]
        rows.sort(key=lambda r: (-r[2], r[0]))
        print(_table(rows, ("id", "variable", "loops")))
    if model.links:
        print()
        link_rows = [(f"{a}->{b}", count) for (a, b), count in link_counts.items()]
        link_rows.sort(key=lambda r: (-r[1], r[0]))
        print(_table(link_rows, ("link", "loops")))
    if args.dot:
        _write_file(args.dot, export.export_dot(model))
    if args.json:
        _write_file(args.json, export.export_json(model))
    return 0


def _cmd_simulate(args) -> int:
    model = _load_model(args, args.model)
    result = parse_scenario(_read_file(args.scenario), model)
    for diag in result.diagnostics:
        print(f"{args.scenario}:{diag.render()}", file=sys.stderr)
    if result.spec is None:
        return 2
    try:
        system = engine.compile(model, result.spec)
    except (UnknownPolarityError, UnknownReferenceError) as exc:
        raise _Fail(1, str(exc))
    try:
        trajectory = engine.integrate(system)
    except NumericBlowupError as exc:
        raise _Fail(3, str(exc))
    csv = engine.export_csv(trajectory, result.spec.outputs)
    if args.out:
        _write_file(args.out, csv)
        for vid in result.spec.outputs:
            series = trajectory.series(vid)
            name = model.variables_by_id[vid].name
            print(
                f"{vid}:{name} initial={series[0]:.9g} final={series[-1]:.9g} "
                f"min={series.min():.9g} max={series.max():.9g}"
            )
    else:
        sys.stdout.write(csv)
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cldkit",
        description="Causal-loop-diagram toolkit: parse, verify, analyze, simulate.",
    )
    parser.add_argument("--color", action="store_true", help="ANSI-colored human output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="parse and validate a model file")
    p.add_argument("model")
    p.set_defaults(fn=_cmd_check)

    p = sub.add_parser("loops", help="list declared loops or enumerate all cycles")
    p.add_argument("model")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--all", action="store_true", help="enumerate every elementary cycle")
    group.add_argument("--declared", action="store_true", help="declared loops only (default)")
    p.add_argument("--max-len", type=int, default=None, help="cap cycle length for --all")
    p.add_argument("--json", action="store_true", help="JSON array instead of a table")
    p.set_defaults(fn=_cmd_loops)

    p = sub.add_parser("verify", help="check declared loops against the graph")
    p.add_argument("model")
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("infer-signs", help="solve unknown link polarities from loop classes")
    p.add_argument("model")
    p.add_argument(
        "--fix",
        action="append",
        metavar="A->B:SIGN",
        help="pin one link's polarity before solving (repeatable)",
    )
    p.add_argument("--emit", action="store_true", help="print paste-ready link lines")
    p.set_defaults(fn=_cmd_infer_signs)

    p = sub.add_parser("analyze", help="participation metrics and exports")
    p.add_argument("model")
    p.add_argument("--over", choices=("declared", "enumerated"), default="declared")
    p.add_argument("--dot", metavar="PATH", help="write a DOT rendering")
    p.add_argument("--json", metavar="PATH", help="write a JSON export")
    p.set_defaults(fn=_cmd_analyze)

    p = sub.add_parser("simulate", help="run a scenario and emit CSV")
    p.add_argument("model")
    p.add_argument("scenario")
    p.add_argument("--out", metavar="PATH", help="write CSV here and print a summary")
    p.set_defaults(fn=_cmd_simulate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except _Fail as exc:
        if exc.message:
            print(f"error: {exc.message}", file=sys.stderr)
        return exc.code
    except ToolkitError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
