from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

# Stable error codes; tests assert on these.
SYNTAX = "E001"
UNSAFE_RULE = "E100"
DUPLICATE_DERIVED = "E101"
SELF_IN_GLOBAL_RULES = "E102"
ARITY_MISMATCH = "E103"
UNSAFE_NEGATION = "E104"
UNKNOWN_CLASS = "E105"
RESERVED_CLASS = "E106"
DEF_IN_EXPRESSION = "E107"
DEFUN_AS_STATEMENT = "E108"
MISPLACED_RETURN = "E109"
MISPLACED_SET_EXPR = "E110"
NESTED_PATTERN = "E111"
UNKNOWN_RULESET = "E112"
DUPLICATE_DEFINITION = "E113"
BAD_TARGET = "E114"
FACT_SYNTAX = "E120"
FACT_ARITY = "E121"
DERIVED_UPDATE = "E200"
INFER_BAD_KWARG = "E201"
INFER_BAD_QUERY = "E202"
INFER_UNKNOWN_RULESET = "E203"


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    line: Optional[int] = None
    col: Optional[int] = None

    def __str__(self) -> str:
        where = f"{self.line}:{self.col}: " if self.line is not None else ""
        return f"{where}{self.code} {self.message}"


class DiagnosticError(Exception):
    """Raised with one or more diagnostics; ``diagnostics`` holds them in source order."""

    def __init__(self, diagnostics: Iterable[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))

    @property
    def codes(self) -> list:
        return [d.code for d in self.diagnostics]


class ParseError(DiagnosticError):
    pass


class FactError(DiagnosticError):
    pass


def diag(code: str, message: str, loc=None) -> Diagnostic:
    if loc is None:
        return Diagnostic(code, message)
    return Diagnostic(code, message, loc[0], loc[1])
