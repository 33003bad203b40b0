"""Rule-set analyses: base/derived classification, dependencies, slicing,
instantiation with a receiver, and stratification."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional

import networkx as nx

from .syntax import ast as A


class NotStratified(Exception):
    """Raised when a cycle of the predicate graph goes through a negated hypothesis."""

    def __init__(self, preds):
        self.preds = preds
        super().__init__("rules are not stratified: negation inside a cycle through "
                         + ", ".join(sorted(str(p) for p in preds)))


def is_param(pred) -> bool:
    return isinstance(pred, A.ParamPred)


def preds_of(rules: Iterable[A.Rule]) -> set:
    out = set()
    for r in rules:
        out.add(r.head.pred)
        out.update(l.atom.pred for l in r.body)
    return out


def direct_deps(rules: Iterable[A.Rule]) -> Dict[object, set]:
    deps: Dict[object, set] = {}
    for r in rules:
        deps.setdefault(r.head.pred, set()).update(l.atom.pred for l in r.body)
    return deps


def _closure(deps: Dict[object, set]) -> Dict[object, FrozenSet]:
    out = {}
    for p in deps:
        seen, stack = set(), list(deps[p])
        while stack:
            q = stack.pop()
            if q in seen:
                continue
            seen.add(q)
            stack.extend(deps.get(q, ()))
        out[p] = frozenset(seen)
    return out


@dataclass(frozen=True)
class RuleSetInfo:
    name: str
    rules: tuple
    base_params: FrozenSet
    base_vars: FrozenSet
    derived_vars: FrozenSet
    derived_params: FrozenSet
    dependency: Dict[object, FrozenSet] = field(hash=False, compare=False)

    @property
    def base_preds(self) -> FrozenSet:
        return self.base_params | self.base_vars

    @property
    def derived_preds(self) -> FrozenSet:
        return self.derived_vars | self.derived_params


def classify(ruleset) -> RuleSetInfo:
    """Partition the predicates of a rule set (a RuleSetDecl or an iterable of
    rules) into base and derived, each split into parameters and variables."""
    name = getattr(ruleset, "name", "")
    rules = tuple(getattr(ruleset, "rules", ruleset))
    derived = {r.head.pred for r in rules}
    base = preds_of(rules) - derived
    return RuleSetInfo(
        name=name,
        rules=rules,
        base_params=frozenset(p for p in base if is_param(p)),
        base_vars=frozenset(p for p in base if not is_param(p)),
        derived_vars=frozenset(p for p in derived if not is_param(p)),
        derived_params=frozenset(p for p in derived if is_param(p)),
        dependency=_closure(direct_deps(rules)),
    )


def fully_depends(info: RuleSetInfo, derived, given: Iterable) -> bool:
    given = set(given)
    return all(q in given for q in info.dependency.get(derived, ()) if q in info.base_preds)


def slice_rules(rules: Iterable[A.Rule], known_base: Iterable) -> tuple:
    """Rules defining the derived predicates that depend only on known base
    predicates.  Those predicates' dependencies are themselves fully known,
    so the result is closed under dependency."""
    rules = tuple(rules)
    info = classify(rules)
    known = set(known_base)
    ok = {p for p in info.derived_preds if fully_depends(info, p, known)}
    return tuple(r for r in rules if r.head.pred in ok)


# ``slice`` is the conventional name; keep the builtin reachable elsewhere.
slice = slice_rules  # noqa: A001


def substitute_preds(rules: Iterable[A.Rule], fn) -> tuple:
    def atom(a):
        return A.Atom(fn(a.pred), a.args)
    return tuple(A.Rule(atom(r.head), tuple(A.Literal(atom(l.atom), l.negated) for l in r.body), r.loc)
                 for r in rules)


@dataclass(frozen=True)
class InstRuleSet:
    """A rule set with ``self`` replaced by a receiver address (or the global
    object for global rule sets)."""

    origin: tuple  # (class name or None, rule set name, receiver)
    rules: tuple
    info: RuleSetInfo = field(compare=False, hash=False, repr=False)


def instantiate(ruleset, receiver, origin_class: Optional[str] = None) -> InstRuleSet:
    """``self.f`` becomes field ``f`` of ``receiver``; globals become fields of
    the global object; parameters are preserved."""

    def sub(p):
        if isinstance(p, A.SelfPred):
            if receiver is None:
                raise ValueError(f"{p} in a rule set without receiver")
            return A.FieldPred(receiver, p.name)
        if isinstance(p, A.GlobalPred):
            return A.FieldPred("gv", p.name)
        return p

    rules = substitute_preds(ruleset.rules, sub)
    return InstRuleSet((origin_class, ruleset.name, receiver), rules, classify(rules))


def _graph(rules) -> "nx.DiGraph":
    g = nx.DiGraph()
    for r in rules:
        g.add_node(r.head.pred)
        for l in r.body:
            g.add_node(l.atom.pred)
            neg = g.get_edge_data(l.atom.pred, r.head.pred, {}).get("neg", False)
            g.add_edge(l.atom.pred, r.head.pred, neg=neg or l.negated)
    return g


def stratify(rules: Iterable[A.Rule]) -> List[FrozenSet]:
    """Predicate strata in evaluation order.  Base predicates form no stratum
    of their own.  Raises NotStratified when negation occurs inside a cycle."""
    rules = tuple(rules)
    g = _graph(rules)
    cond = nx.condensation(g)
    members = nx.get_node_attributes(cond, "members")
    for comp, preds in members.items():
        for u, v, d in g.subgraph(preds).edges(data=True):
            if d["neg"]:
                raise NotStratified(preds)
    heads = {r.head.pred for r in rules}
    order = list(nx.topological_sort(cond))
    # merge components into layers: a component goes to the lowest layer above
    # every negative predecessor and no lower than any positive predecessor
    layer: Dict[int, int] = {}
    for c in order:
        lvl = 0
        for pred_c in cond.predecessors(c):
            neg = any(g.edges[u, v]["neg"] for u in members[pred_c] for v in members[c]
                      if g.has_edge(u, v))
            lvl = max(lvl, layer[pred_c] + (1 if neg else 0))
        layer[c] = lvl
    out: Dict[int, set] = {}
    for c, lvl in layer.items():
        derived = members[c] & heads
        if derived:
            out.setdefault(lvl, set()).update(derived)
    return [frozenset(out[k]) for k in sorted(out)]


def is_stratified(rules) -> bool:
    try:
        stratify(rules)
        return True
    except NotStratified:
        return False
