"""Command-line entry point: run, check, engine-eval and bench."""

from __future__ import annotations

import argparse
import sys
from typing import Dict, List, Optional, Sequence, Set

from . import rules as R
from .analysis import check_updates, static_check
from .bench import BENCH_NAMES, run_bench
from .desugar import desugar_all
from .engine import EngineError, eval_naive, eval_seminaive, eval_wellfounded
from .runtime import DEFAULT_STEP_BUDGET, MODES, Machine, RuntimeFailure, StepBudgetExceeded
from .syntax import DiagnosticError, parse_facts, parse_program, pretty
from .syntax import ast as A
from .values import canon_key, format_value

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME, EXIT_STATIC, EXIT_BUDGET = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rulelang", description="Rules integrated with sets, functions, updates and objects.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="execute a program")
    run.add_argument("program")
    run.add_argument("--facts", action="append", default=[], metavar="FILE",
                     help="fact file; may be repeated")
    run.add_argument("--bind", action="append", default=[], metavar="PRED=NAME",
                     help="bind fact predicate PRED to global variable NAME before the program runs")
    run.add_argument("--mode", choices=MODES, default="no-alias")
    run.add_argument("--dump", action="append", default=[], metavar="NAME",
                     help="print global variable NAME after the run; may be repeated")
    run.add_argument("--step-budget", type=int, default=DEFAULT_STEP_BUDGET)
    run.add_argument("--emit-core", action="store_true", help="print the desugared program and stop")

    check = sub.add_parser("check", help="run static checks")
    check.add_argument("program")
    check.add_argument("--mode", choices=MODES, default="no-alias")
    check.add_argument("--explain-updates", action="store_true", help="list update sites")
    check.add_argument("--explain-rules", nargs="?", const="", default=None, metavar="NAME",
                       help="show classification, dependencies and strata of rule set NAME (all when omitted)")

    ev = sub.add_parser("engine-eval", help="evaluate the global rule sets of a file on facts")
    ev.add_argument("program")
    ev.add_argument("facts", nargs="*", metavar="FACTS")
    ev.add_argument("--method", choices=("naive", "seminaive", "wellfounded"), default="seminaive")
    ev.add_argument("--query", action="append", default=[], metavar="PRED",
                    help="print only these predicates (default: all derived ones)")

    b = sub.add_parser("bench", help="run a benchmark")
    b.add_argument("name", choices=BENCH_NAMES)
    b.add_argument("--spec", action="append", default=[], metavar="KEY=VALUE")
    b.add_argument("--repeat", type=int, default=1)
    b.add_argument("--out", metavar="FILE", help="also write the report lines to FILE")
    return p


def _pairs(items: Sequence[str], what: str) -> Dict[str, str]:
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key or not value:
            raise UsageError(f"{what} expects KEY=VALUE, got {item!r}")
        out[key] = value
    return out


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as f:
        return f.read()


def _load_facts(paths: Sequence[str]) -> Dict[str, Set[tuple]]:
    facts: Dict[str, Set[tuple]] = {}
    for path in paths:
        for pred, tuples in parse_facts(_read(path)).items():
            facts.setdefault(pred, set()).update(tuples)
    return facts


def dump_lines(name: str, value, resolve) -> List[str]:
    """``name: v`` lines; a set prints one line per element in canonical order."""
    v = resolve(value)
    if isinstance(v, frozenset):
        return [f"{name}: {format_value(x)}" for x in sorted(v, key=canon_key)]
    if isinstance(v, list):
        return [f"{name}: {format_value(x)}" for x in v]
    return [f"{name}: {format_value(v)}"]


def _diagnostics(diags, out) -> None:
    for d in diags:
        print(str(d), file=out)


def cmd_run(args, out, err) -> int:
    binds = _pairs(args.bind, "--bind")
    source = _read(args.program)
    facts = _load_facts(args.facts)
    if not binds:
        binds = {p: p for p in facts}
    missing = [p for p in binds if p not in facts]
    if missing:
        raise UsageError(f"no facts for predicate(s) {', '.join(sorted(missing))}")
    prog = parse_program(source, extra_globals=list(binds.values()) + list(args.dump))
    core = desugar_all(prog)
    if args.emit_core:
        print(pretty(core), file=out, end="")
        return EXIT_OK
    diags = static_check(core, args.mode)
    if diags:
        _diagnostics(diags, err)
        return EXIT_STATIC
    m = Machine(core, args.mode, args.step_budget)
    for pred, name in sorted(binds.items()):
        tuples = facts[pred]
        if tuples and all(len(t) == 1 for t in tuples):
            m.bind_global(name, {t[0] for t in tuples})
        else:
            m.bind_global(name, tuples)
    m.run()
    lines = []
    for name in args.dump:
        try:
            value = m.global_value(name, deep=False)
        except KeyError:
            print(f"error: global variable {name} has no value", file=err)
            return EXIT_RUNTIME
        lines.extend(dump_lines(name, value, m.resolve))
    for line in lines:
        print(line, file=out)
    return EXIT_OK


def _names(preds) -> str:
    return ", ".join(sorted(str(p) for p in preds)) or "-"


def _explain_rules(core: A.Program, which: str, out) -> bool:
    decls = [(None, rs) for rs in core.rulesets] + [(c.name, rs) for c in core.classes for rs in c.rulesets]
    found = False
    for cls, rs in decls:
        title = f"{cls}.{rs.name}" if cls else rs.name
        if which and which not in (rs.name, title):
            continue
        found = True
        info = R.classify(rs)
        print(f"rules {title}", file=out)
        print(f"  base parameters: {_names(info.base_params)}", file=out)
        print(f"  base variables: {_names(info.base_vars)}", file=out)
        print(f"  derived parameters: {_names(info.derived_params)}", file=out)
        print(f"  derived variables: {_names(info.derived_vars)}", file=out)
        for p in sorted(info.derived_preds, key=str):
            print(f"  {p} depends on: {_names(info.dependency.get(p, ()))}", file=out)
        try:
            strata = R.stratify(rs.rules)
            print("  strata: " + " | ".join(_names(s) for s in strata), file=out)
        except R.NotStratified:
            print("  strata: none, negation through recursion (well-founded semantics)", file=out)
    return found


def cmd_check(args, out, err) -> int:
    core = desugar_all(parse_program(_read(args.program)))
    if args.explain_rules is not None and not _explain_rules(core, args.explain_rules, out):
        raise UsageError(f"no rule set named {args.explain_rules}")
    if args.explain_updates:
        report = check_updates(core, args.mode)
        for site in report.sites:
            where = f"{site.loc[0]}:{site.loc[1]}" if site.loc else "-"
            print(f"{where} {site.statement} {site.target} {site.kind}", file=out)
    diags = static_check(core, args.mode)
    if diags:
        _diagnostics(diags, err)
        return EXIT_STATIC
    return EXIT_OK


def cmd_engine_eval(args, out, err) -> int:
    prog = parse_program(_read(args.program))
    rules = tuple(r for rs in prog.rulesets for r in rs.rules)
    facts_by_name = _load_facts(args.facts)
    preds = R.preds_of(rules)
    facts = {p: facts_by_name[p.name] for p in preds if p.name in facts_by_name}
    fn = {"naive": eval_naive, "seminaive": eval_seminaive, "wellfounded": eval_wellfounded}[args.method]
    try:
        result = fn(rules, facts)
    except R.NotStratified as e:
        print(f"error: {e}; use --method wellfounded", file=err)
        return EXIT_STATIC
    derived = sorted({r.head.pred for r in rules}, key=str)
    wanted = set(args.query) or {p.name for p in derived}
    for p in derived:
        if p.name not in wanted:
            continue
        for t in sorted(result.relation(p), key=canon_key):
            print(f"{p.name}: {format_value(t)}", file=out)
        for t in sorted(result.undefined.get(p, ()), key=canon_key):
            print(f"{p.name}?: {format_value(t)}", file=out)
    return EXIT_OK


def cmd_bench(args, out, err) -> int:
    raw = _pairs(args.spec, "--spec")
    try:
        spec = {k: int(v) for k, v in raw.items()}
    except ValueError:
        raise UsageError("--spec values must be integers")
    lines = []
    for _ in range(max(1, args.repeat)):
        try:
            report = run_bench(args.name, spec)
        except (TypeError, KeyError, ValueError) as e:
            raise UsageError(f"bad benchmark spec: {e}")
        lines.append(report.line())
        print(lines[-1], file=out)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write("\n".join(lines) + "\n")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "check": cmd_check, "engine-eval": cmd_engine_eval, "bench": cmd_bench}


def main(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, out, err)
    except UsageError as e:
        print(f"usage error: {e}", file=err)
        return EXIT_USAGE
    except OSError as e:
        print(f"error: {e}", file=err)
        return EXIT_USAGE
    except DiagnosticError as e:
        _diagnostics(e.diagnostics, err)
        return EXIT_STATIC
    except StepBudgetExceeded as e:
        print(f"error: {e}", file=err)
        return EXIT_BUDGET
    except (RuntimeFailure, EngineError) as e:
        print(f"runtime error: {e}", file=err)
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
