"""Bottom-up evaluation: naive, semi-naive, and well-founded."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Set

from .. import rules as R
from ..values import Addr
from .compile import CompiledRule, compile_rule


class EngineError(Exception):
    pass


@dataclass
class EngineInput:
    rules: tuple
    facts: Dict[object, Set[tuple]] = field(default_factory=dict)


@dataclass
class EngineOutput:
    extensions: Dict[object, frozenset]
    undefined: Dict[object, frozenset] = field(default_factory=dict)

    def relation(self, pred) -> frozenset:
        return self.extensions.get(pred, frozenset())


def _addr_any(v) -> bool:
    return True


def _bad_component(v, reject: Callable) -> bool:
    if type(v) is Addr:
        return reject(v)
    if type(v) is tuple:
        return any(_bad_component(x, reject) for x in v)
    return False


def _arities(rules) -> Dict[object, int]:
    out: Dict[object, int] = {}
    for r in rules:
        for a in [r.head] + [l.atom for l in r.body]:
            out.setdefault(a.pred, len(a.args))
    return out


def _prepare(inp, facts, reject_addr) -> tuple:
    if isinstance(inp, EngineInput):
        rules, facts = tuple(inp.rules), inp.facts
    else:
        rules = tuple(inp)
    facts = facts or {}
    reject = reject_addr or _addr_any
    arity = _arities(rules)
    base: Dict[object, set] = {}
    for pred, tuples in facts.items():
        n = arity.get(pred)
        rel = set()
        for t in tuples:
            if _bad_component(t, reject):
                raise EngineError(f"address {t!r} inside a tuple of {pred} cannot be matched by rules")
            if n is None or len(t) == n:
                rel.add(t)
        base[pred] = rel
    for p in arity:
        base.setdefault(p, set())
    return rules, base


class _Store:
    """Relations with hash indexes kept up to date as tuples are added."""

    def __init__(self, rels: Dict[object, set]):
        self.rels = rels
        self.indexes: Dict[tuple, dict] = {}

    def rel(self, pred) -> set:
        return self.rels.setdefault(pred, set())

    def index(self, pred, positions: tuple) -> dict:
        key = (pred, positions)
        idx = self.indexes.get(key)
        if idx is None:
            idx = build_index(self.rel(pred), positions)
            self.indexes[key] = idx
        return idx

    def add(self, pred, tuples: set) -> None:
        self.rel(pred).update(tuples)
        for (p, positions), idx in self.indexes.items():
            if p == pred:
                _index_into(idx, tuples, positions)


def build_index(rel: Iterable[tuple], positions: tuple) -> dict:
    idx: dict = {}
    _index_into(idx, rel, positions)
    return idx


def _index_into(idx: dict, rel: Iterable[tuple], positions: tuple) -> None:
    if len(positions) == 1:
        p = positions[0]
        for t in rel:
            idx.setdefault(t[p], []).append(t)
    else:
        for t in rel:
            idx.setdefault(tuple(t[p] for p in positions), []).append(t)


def _sources(cr: CompiledRule, store: _Store, neg: Mapping, delta_at: Optional[int] = None,
             delta: Optional[dict] = None, delta_idx: Optional[dict] = None) -> list:
    out = []
    for k, acc in enumerate(cr.accesses):
        if acc.negated:
            out.append(neg.get(acc.pred, ()) if neg is not None else store.rel(acc.pred))
        elif k == delta_at:
            d = delta[acc.pred]
            if acc.positions:
                key = (acc.pred, acc.positions)
                if key not in delta_idx:
                    delta_idx[key] = build_index(d, acc.positions)
                out.append(delta_idx[key])
            else:
                out.append(d)
        elif acc.positions:
            out.append(store.index(acc.pred, acc.positions))
        else:
            out.append(store.rel(acc.pred))
    return out


def _fire(cr: CompiledRule, sources: list, head_rel: set) -> set:
    out: set = set()
    cr.fn(sources, out)
    out -= head_rel
    return out


def _seminaive_stratum(compiled: List[CompiledRule], preds: frozenset, store: _Store,
                       neg: Optional[Mapping]) -> None:
    new: Dict[object, set] = {p: set() for p in preds}
    for cr in compiled:
        derived = _fire(cr, _sources(cr, store, neg), store.rel(cr.head_pred))
        new[cr.head_pred] |= derived
    recursive = [(cr, [k for k, acc in enumerate(cr.accesses)
                       if not acc.negated and acc.pred in preds]) for cr in compiled]
    recursive = [(cr, ks) for cr, ks in recursive if ks]
    while True:
        delta = {p: ts for p, ts in new.items() if ts}
        if not delta:
            return
        for p, ts in delta.items():
            store.add(p, ts)
        new = {p: set() for p in preds}
        delta_idx: dict = {}
        for cr, ks in recursive:
            head_rel = store.rel(cr.head_pred)
            for k in ks:
                if cr.accesses[k].pred not in delta:
                    continue
                srcs = _sources(cr, store, neg, k, delta, delta_idx)
                out = _fire(cr, srcs, head_rel)
                new[cr.head_pred] |= out


def _naive_stratum(compiled: List[CompiledRule], preds: frozenset, store: _Store,
                   neg: Optional[Mapping]) -> None:
    base = {p: set(store.rel(p)) for p in preds}
    current = {p: set(ts) for p, ts in base.items()}
    while True:
        # rebuild from scratch each round: I_{k+1} = facts ∪ T_P(I_k)
        round_store = _Store({**store.rels, **{p: set(ts) for p, ts in current.items()}})
        nxt = {p: set(ts) for p, ts in base.items()}
        empty: set = set()
        for cr in compiled:
            nxt[cr.head_pred] |= _fire(cr, _sources(cr, round_store, neg), empty)
        if nxt == current:
            break
        current = nxt
    for p, ts in current.items():
        store.rels[p] = ts
    store.indexes = {k: v for k, v in store.indexes.items() if k[0] not in preds}


def _evaluate(rules: tuple, base: Dict[object, set], stratum_fn) -> Dict[object, set]:
    strata = R.stratify(rules)
    store = _Store(base)
    compiled = [compile_rule(r) for r in rules]
    for preds in strata:
        crs = [cr for cr in compiled if cr.head_pred in preds]
        stratum_fn(crs, preds, store, None)
    return store.rels


def _output(rels: Dict[object, set]) -> EngineOutput:
    return EngineOutput({p: frozenset(ts) for p, ts in rels.items()})


def eval_naive(inp, facts=None, reject_addr=None) -> EngineOutput:
    """Stratified least model, recomputing the immediate consequences of the
    whole current interpretation each round."""
    rules, base = _prepare(inp, facts, reject_addr)
    return _output(_evaluate(rules, base, _naive_stratum))


def eval_seminaive(inp, facts=None, reject_addr=None) -> EngineOutput:
    """Stratified least model using delta relations."""
    rules, base = _prepare(inp, facts, reject_addr)
    return _output(_evaluate(rules, base, _seminaive_stratum))


def _gamma(compiled, heads, base, assumed: Dict[object, set]) -> Dict[object, set]:
    """Least model with every negated hypothesis read against ``assumed``."""
    store = _Store({p: set(ts) for p, ts in base.items()})
    neg = {p: frozenset(ts) for p, ts in assumed.items()}
    _seminaive_stratum(compiled, heads, store, neg)
    return store.rels


def eval_wellfounded(inp, facts=None, reject_addr=None) -> EngineOutput:
    """Well-founded model by the alternating fixpoint.  Stratified inputs
    take the stratified path, which yields the same (total) model."""
    rules, base = _prepare(inp, facts, reject_addr)
    if R.is_stratified(rules):
        return _output(_evaluate(rules, base, _seminaive_stratum))
    compiled = [compile_rule(r) for r in rules]
    heads = frozenset(r.head.pred for r in rules)
    true = {p: set(ts) for p, ts in base.items()}  # underestimate: no derived atoms
    while True:
        possible = _gamma(compiled, heads, base, true)
        nxt = _gamma(compiled, heads, base, possible)
        if nxt == true:
            break
        true = nxt
    undefined = {p: frozenset(possible.get(p, set()) - true.get(p, set())) for p in heads}
    out = _output(true)
    out.undefined = {p: ts for p, ts in undefined.items() if ts}
    return out
