"""Surface syntax: lexing, parsing, name resolution, well-formedness, printing."""

from __future__ import annotations

from typing import Dict, Iterable, Set

from . import ast
from .diagnostics import (
    FACT_ARITY, FACT_SYNTAX, Diagnostic, DiagnosticError, FactError, ParseError, diag,
)
from .lexer import tokenize
from .parser import parse_surface
from .printer import program as pretty
from .resolve import resolve_program
from .wellformed import check_program, check_rule

__all__ = [
    "ast", "parse_program", "parse_facts", "pretty", "Diagnostic", "DiagnosticError",
    "ParseError", "FactError", "check_rule",
]


def parse_program(source: str, allow_internal_names: bool = False,
                  extra_globals: Iterable[str] = ()) -> ast.Program:
    """Parse and check a program.

    Raises :class:`ParseError` carrying every diagnostic found.  Names in
    ``extra_globals`` are treated as global variables in rule sets even when
    the program text never mentions them (used when facts are bound to
    globals from outside).
    """
    surface, declared, _, _ = parse_surface(source, allow_internal_names)
    prog, _globals = resolve_program(surface, declared, extra_globals)
    problems = check_program(prog)
    if problems:
        raise ParseError(problems)
    return prog


def parse_facts(source: str) -> Dict[str, Set[tuple]]:
    """Read ``name(lit, ..., lit).`` facts; literals are integers or quoted strings."""
    toks = tokenize(source)
    facts: Dict[str, Set[tuple]] = {}
    arity: Dict[str, int] = {}
    i = 0

    def fail(msg, t):
        raise FactError([diag(FACT_SYNTAX, msg, t.loc)])

    while toks[i].kind != "eof":
        t = toks[i]
        if t.kind != "name":
            fail(f"expected predicate name, found {t.text!r}", t)
        name = t.text
        i += 1
        if toks[i].text != "(":
            fail("expected '('", toks[i])
        i += 1
        args = []
        while toks[i].text != ")":
            neg = False
            if toks[i].text == "-":
                neg = True
                i += 1
            a = toks[i]
            if a.kind == "int":
                args.append(-a.value if neg else a.value)
            elif a.kind == "str" and not neg:
                args.append(a.value)
            else:
                fail(f"expected integer or string literal, found {a.text!r}", a)
            i += 1
            if toks[i].text == ",":
                i += 1
            elif toks[i].text != ")":
                fail("expected ',' or ')'", toks[i])
        i += 1
        if toks[i].text != ".":
            fail("expected '.' after fact", toks[i])
        i += 1
        if arity.setdefault(name, len(args)) != len(args):
            raise FactError([diag(FACT_ARITY, f"arity mismatch for {name}", t.loc)])
        facts.setdefault(name, set()).add(tuple(args))
    return facts
