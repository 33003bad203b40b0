"""Translate a rule into a Python nested-loop join.

Compilation works on the rule's *shape*: argument patterns and polarity with
predicates abstracted away, so instances of one rule on different receivers
share generated code.  The caller supplies, for each positive hypothesis,
either the relation (when no position is bound on entry) or a hash index
keyed by the bound positions, and a set for each negated hypothesis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Tuple

from ..syntax import ast as A


@dataclass(frozen=True)
class Access:
    """How one hypothesis is read.  ``positions`` are the bound argument
    positions used as index key; empty means a full scan."""

    pred: object
    negated: bool
    positions: tuple
    arity: int


@dataclass
class CompiledRule:
    rule: A.Rule
    order: List[int]          # hypothesis indices in join order
    accesses: List[Access]    # aligned with ``order``
    fn: Callable
    head_pred: object


_CACHE: Dict[tuple, Tuple[Callable, list, list]] = {}


def _shape(rule: A.Rule) -> tuple:
    names: Dict[str, int] = {}

    def arg(a):
        if isinstance(a, A.LogicVar):
            return ("v", names.setdefault(a.name, len(names)))
        return ("c", type(a.value).__name__, a.value)

    body = tuple((l.negated, tuple(arg(a) for a in l.atom.args)) for l in rule.body)
    head = tuple(arg(a) for a in rule.head.args)
    return body, head


def join_order(rule: A.Rule) -> List[int]:
    """Positive hypotheses left to right; each negated one as soon as all of
    its variables are bound."""
    order: List[int] = []
    bound: set = set()
    pending = [i for i, l in enumerate(rule.body) if l.negated]

    def flush():
        for i in list(pending):
            vs = {a.name for a in rule.body[i].atom.args if isinstance(a, A.LogicVar)}
            if vs <= bound:
                order.append(i)
                pending.remove(i)

    flush()
    for i, l in enumerate(rule.body):
        if l.negated:
            continue
        order.append(i)
        bound.update(a.name for a in l.atom.args if isinstance(a, A.LogicVar))
        flush()
    order.extend(pending)  # unsafe negation; rejected earlier by well-formedness
    return order


def compile_rule(rule: A.Rule) -> CompiledRule:
    order = join_order(rule)
    key = (_shape(rule), tuple(order))
    if key not in _CACHE:
        _CACHE[key] = _generate(rule, order)
    fn, positions, _ = _CACHE[key]
    accesses = [Access(rule.body[i].atom.pred, rule.body[i].negated, positions[k],
                       len(rule.body[i].atom.args)) for k, i in enumerate(order)]
    return CompiledRule(rule, order, accesses, fn, rule.head.pred)


def _generate(rule: A.Rule, order: List[int]):
    consts: list = []

    def const(v) -> str:
        consts.append(v)
        return f"K[{len(consts) - 1}]"

    var_name: Dict[str, str] = {}
    lines = ["def _rule(S, K, out):"]
    indent = 1
    positions_out: list = []
    # the last positive hypothesis, when nothing follows it, feeds the head
    # directly through a generator instead of an explicit loop body
    last = len(order) - 1
    fuse = last >= 0 and not rule.body[order[last]].negated

    def term(a, k=None, local=None):
        if isinstance(a, A.LogicVar):
            if a.name in var_name:
                return var_name[a.name]
            return f"t{k}[{local[a.name]}]"
        return const(a.value)

    for k, i in enumerate(order):
        lit = rule.body[i]
        args = lit.atom.args
        pad = "    " * indent
        src = f"S[{k}]"
        if lit.negated:
            items = [term(a) for a in args]
            tup = "(" + ", ".join(items) + ("," if len(items) == 1 else "") + ")"
            lines.append(f"{pad}if {tup} in {src}:")
            lines.append(f"{pad}    continue" if indent > 1 else f"{pad}    return")
            positions_out.append(())
            continue
        bound_pos, key_items, binds, checks = [], [], [], []
        local_first: Dict[str, int] = {}
        for p, a in enumerate(args):
            if isinstance(a, A.Const):
                bound_pos.append(p)
                key_items.append(const(a.value))
            elif a.name in var_name:
                bound_pos.append(p)
                key_items.append(var_name[a.name])
            elif a.name in local_first:
                checks.append(f"t{k}[{p}] == t{k}[{local_first[a.name]}]")
            else:
                local_first[a.name] = p
                binds.append((a.name, p))
        positions_out.append(tuple(bound_pos))
        if not bound_pos:
            it = src
        else:
            key = key_items[0] if len(key_items) == 1 else "(" + ", ".join(key_items) + ")"
            it = f"{src}.get({key}, ())"
        if fuse and k == last:
            head = [term(a, k, local_first) for a in rule.head.args]
            tup = "(" + ", ".join(head) + ("," if len(head) == 1 else "") + ")"
            cond = f" if {' and '.join(checks)}" if checks else ""
            lines.append(f"{pad}out.update([{tup} for t{k} in {it}{cond}])")
            break
        lines.append(f"{pad}for t{k} in {it}:")
        indent += 1
        pad = "    " * indent
        if checks:
            lines.append(f"{pad}if not ({' and '.join(checks)}):")
            lines.append(f"{pad}    continue")
        for name, p in binds:
            v = f"v{len(var_name)}"
            var_name[name] = v
            lines.append(f"{pad}{v} = t{k}[{p}]")
    else:
        pad = "    " * indent
        head = [term(a) for a in rule.head.args]
        tup = "(" + ", ".join(head) + ("," if len(head) == 1 else "") + ")"
        lines.append(f"{pad}out.add({tup})")
    src = "\n".join(lines) + "\n"
    ns: dict = {}
    exec(compile(src, "<rule>", "exec"), ns)
    fn = ns["_rule"]
    k_tuple = tuple(consts)
    return (lambda S, out, _f=fn, _k=k_tuple: _f(S, _k, out)), positions_out, src


def generated_source(rule: A.Rule) -> str:
    order = join_order(rule)
    return _generate(rule, order)[2]
