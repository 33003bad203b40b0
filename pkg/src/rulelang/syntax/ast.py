"""Abstract syntax for programs, rule sets, statements, expressions and patterns.

Nodes are frozen dataclasses; child sequences are tuples, so structural
equality is plain ``==``.  Source locations are carried in ``loc`` but are
excluded from comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Any, Iterator, Optional, Union

Loc = Optional[tuple]  # (line, column)


# --------------------------------------------------------------------- rules

@dataclass(frozen=True)
class GlobalPred:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class SelfPred:
    name: str

    def __str__(self) -> str:
        return f"self.{self.name}"


@dataclass(frozen=True)
class ParamPred:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class FieldPred:
    """Predicate stored in a field of a concrete object (after instantiation) or of the
    global-variable object ``owner == 'gv'`` (after global lowering)."""

    owner: Any  # 'gv' or an Addr
    name: str

    def __str__(self) -> str:
        owner = "a_gv" if self.owner == "gv" else repr(self.owner)
        return f"{owner}.{self.name}"


PredRef = Union[GlobalPred, SelfPred, ParamPred, FieldPred]


@dataclass(frozen=True)
class LogicVar:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    value: Any

    def __str__(self) -> str:
        from ..values import format_value
        return format_value(self.value)


Term = Union[LogicVar, Const]


@dataclass(frozen=True)
class Atom:
    pred: PredRef
    args: tuple

    def __str__(self) -> str:
        return f"{self.pred}({', '.join(str(a) for a in self.args)})"


@dataclass(frozen=True)
class Literal:
    atom: Atom
    negated: bool = False

    def __str__(self) -> str:
        return ("not " if self.negated else "") + str(self.atom)


@dataclass(frozen=True)
class Rule:
    head: Atom
    body: tuple = ()  # of Literal
    loc: Loc = field(default=None, compare=False, repr=False)

    def __str__(self) -> str:
        if not self.body:
            return str(self.head)
        return f"{self.head} if {', '.join(str(h) for h in self.body)}"


@dataclass(frozen=True)
class RuleSetDecl:
    name: str
    rules: tuple
    loc: Loc = field(default=None, compare=False, repr=False)


# --------------------------------------------------------------- expressions

@dataclass(frozen=True)
class Lit:
    value: Any


@dataclass(frozen=True)
class Name:
    """A variable.  ``kind`` is 'global', 'local', or 'param' (method parameters,
    ``self``, and names bound by iteration or quantification)."""

    id: str
    kind: str = "global"


@dataclass(frozen=True)
class GlobalObj:
    """The address of the object holding global variables."""


@dataclass(frozen=True)
class Field:
    obj: Any
    name: str


@dataclass(frozen=True)
class TupleExpr:
    items: tuple


@dataclass(frozen=True)
class CallExpr:
    obj: Any
    method: str
    args: tuple


@dataclass(frozen=True)
class Unary:
    op: str  # not, isTuple, len, neg
    operand: Any


@dataclass(frozen=True)
class Binary:
    op: str  # is, plus, select, minus, times, lt, le
    left: Any
    right: Any


@dataclass(frozen=True)
class IsInstance:
    operand: Any
    cls: str


@dataclass(frozen=True)
class And:
    left: Any
    right: Any


@dataclass(frozen=True)
class Or:
    left: Any
    right: Any


@dataclass(frozen=True)
class Some:
    iters: tuple  # of Iterator
    cond: Any


@dataclass(frozen=True)
class Each:
    iters: tuple
    cond: Any


# ------------------------------------------------------------------ patterns

@dataclass(frozen=True)
class PVar:
    """Pattern variable, not prefixed with '='.  ``var`` is a Name or Field."""
    var: Any


@dataclass(frozen=True)
class PEq:
    """'='-prefixed variable: matches the variable's current value."""
    var: Any


@dataclass(frozen=True)
class PWild:
    pass


@dataclass(frozen=True)
class PExpr:
    expr: Any


@dataclass(frozen=True)
class TuplePat:
    elems: tuple


@dataclass(frozen=True)
class Iter:
    pattern: Any  # PVar or TuplePat
    source: Any


# ---------------------------------------------------------------- statements

def _loc() -> Any:
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Skip:
    loc: Loc = _loc()


@dataclass(frozen=True)
class Assign:
    target: Any  # Name or Field
    value: Any
    loc: Loc = _loc()


@dataclass(frozen=True)
class NewObj:
    target: Any
    cls: str
    loc: Loc = _loc()


@dataclass(frozen=True)
class Compr:
    target: Any
    elem: Any
    iters: tuple
    cond: Any
    loc: Loc = _loc()


@dataclass(frozen=True)
class Aggregate:
    target: Any
    op: str  # count, sum, min, max
    source: Any
    loc: Loc = _loc()


@dataclass(frozen=True)
class Seq:
    stmts: tuple
    loc: Loc = _loc()


@dataclass(frozen=True)
class If:
    cond: Any
    then: Any
    orelse: Any
    loc: Loc = _loc()


@dataclass(frozen=True)
class For:
    pattern: Any
    source: Any
    body: Any
    loc: Loc = _loc()


@dataclass(frozen=True)
class While:
    cond: Any
    body: Any
    loc: Loc = _loc()


@dataclass(frozen=True)
class IfSome:
    iters: tuple
    cond: Any
    body: Any
    loc: Loc = _loc()


@dataclass(frozen=True)
class WhileSome:
    iters: tuple
    cond: Any
    body: Any
    loc: Loc = _loc()


@dataclass(frozen=True)
class MethodCall:
    obj: Any
    method: str
    args: tuple
    loc: Loc = _loc()


@dataclass(frozen=True)
class SuperCall:
    """Call of the parent-class definition of ``method`` on ``self``; ``cls`` is the
    class whose body contains the call."""

    cls: str
    method: str
    args: tuple
    loc: Loc = _loc()


@dataclass(frozen=True)
class Query:
    pred: str
    pattern: Optional[TuplePat] = None


@dataclass(frozen=True)
class Infer:
    targets: tuple
    obj: Any  # None for a global rule set
    queries: tuple  # of Query
    kwargs: tuple  # of (name, expr)
    ruleset: str
    loc: Loc = _loc()


# Extended syntax: forms that only appear while a program runs.

@dataclass(frozen=True)
class ForInTuple:
    pattern: Any
    values: tuple
    body: Any
    loc: Loc = _loc()


@dataclass(frozen=True)
class Return:
    """Marks the end of an inlined method body."""
    loc: Loc = _loc()


# ------------------------------------------------------------ program level

@dataclass(frozen=True)
class Method:
    name: str
    params: tuple
    body: Any  # Statement for def, Expression for defun
    is_function: bool = False
    loc: Loc = _loc()


@dataclass(frozen=True)
class ClassDecl:
    name: str
    parent: Optional[str]
    rulesets: tuple
    methods: tuple
    loc: Loc = _loc()


@dataclass(frozen=True)
class Program:
    rulesets: tuple
    classes: tuple
    main: Any


BUILTIN_CLASSES = ("set", "sequence")

STATEMENT_TYPES = (Skip, Assign, NewObj, Compr, Aggregate, Seq, If, For, While, IfSome,
                   WhileSome, MethodCall, SuperCall, Infer, ForInTuple, Return)


def children(node: Any) -> Iterator[Any]:
    """Yield direct sub-nodes (dataclass instances) of an AST node."""
    for f in fields(node):
        if f.name == "loc":
            continue
        yield from _flatten(getattr(node, f.name))


def _flatten(v: Any) -> Iterator[Any]:
    if isinstance(v, tuple):
        for x in v:
            yield from _flatten(x)
    elif hasattr(v, "__dataclass_fields__"):
        yield v


def walk(node: Any) -> Iterator[Any]:
    """Pre-order traversal over every dataclass node reachable from ``node``."""
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(list(children(n))))


def seq(*stmts: Any) -> Any:
    """Sequence constructor that flattens nested sequences and drops skips."""
    out: list = []
    for s in stmts:
        if isinstance(s, Seq):
            out.extend(x for x in s.stmts if not isinstance(x, Skip))
        elif not isinstance(s, Skip):
            out.append(s)
    if not out:
        return Skip()
    if len(out) == 1:
        return out[0]
    return Seq(tuple(out))


__all__ = [n for n in dir() if not n.startswith("_")] + ["replace"]
