"""Inference over heap values and automatic maintenance.

``inf_sub`` evaluates one instantiated rule set against the current heap and
returns the heap updates it implies; ``maint_sub`` folds it over the
maintenance stack, letting upper frames win on overlapping fields.  Updates
are computed from one heap state and applied together afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Tuple

from .. import rules as R
from ..engine import EngineError, eval_wellfounded
from ..engine.evaluate import _arities
from ..syntax import ast as A
from ..values import GLOBAL_ADDR, Addr
from .heap import Heap


class RuntimeFailure(Exception):
    """Execution got stuck; ``reason`` says why."""

    def __init__(self, reason: str, loc=None):
        self.reason = reason
        self.loc = loc
        where = f"{loc[0]}:{loc[1]}: " if loc else ""
        super().__init__(where + reason)


# an update key is ('f', addr, field) for a field or ('s', addr) for set content
NEW = "new"


def field_of(pred) -> Tuple[Addr, str]:
    owner = GLOBAL_ADDR if pred.owner == "gv" else pred.owner
    return owner, pred.name


def _to_facts(elems: Iterable, arity: int) -> set:
    if arity == 1:
        return {(v,) for v in elems}
    return {v for v in elems if type(v) is tuple and len(v) == arity}


def _to_heap(rel: Iterable[tuple], arity: int) -> frozenset:
    if arity == 1:
        return frozenset(t[0] for t in rel)
    return frozenset(rel)


@dataclass
class Prepared:
    """Per-instance data reused across evaluations."""

    inst: R.InstRuleSet
    arity: Dict[Any, int]
    base_vars: tuple
    base_params: tuple
    derived_vars: tuple
    derived_params: tuple


class Inference:
    """Evaluation of instantiated rule sets against a heap, with a one-entry
    cache per instance keyed by the identities and versions of its inputs."""

    def __init__(self, heap: Heap):
        self.heap = heap
        self._prepared: Dict[int, Prepared] = {}
        self._last: Dict[tuple, tuple] = {}
        self.evaluations = 0

    def prepare(self, inst: R.InstRuleSet) -> Prepared:
        p = self._prepared.get(id(inst))
        if p is None or p.inst is not inst:
            info = inst.info
            key = lambda x: str(x)  # noqa: E731 - deterministic order
            p = Prepared(inst, _arities(inst.rules),
                         tuple(sorted(info.base_vars, key=key)),
                         tuple(sorted(info.base_params, key=key)),
                         tuple(sorted(info.derived_vars, key=key)),
                         tuple(sorted(info.derived_params, key=key)))
            self._prepared[id(inst)] = p
        return p

    def _var_set(self, pred) -> Optional[Addr]:
        owner, name = field_of(pred)
        obj = self.heap.objs.get(owner)
        if type(obj) is not dict:
            return None
        v = obj.get(name)
        return v if self.heap.is_set(v) else None

    def evaluate(self, inst: R.InstRuleSet, args: Optional[Dict[Any, Any]] = None) -> Dict[Any, frozenset]:
        """Results (heap form) for every defined derived predicate of ``inst``."""
        p = self.prepare(inst)
        heap = self.heap
        known: List[Tuple[Any, Addr]] = []
        for pred in p.base_vars:
            a = self._var_set(pred)
            if a is not None:
                known.append((pred, a))
        if args:
            for pred in p.base_params:
                v = args.get(pred)
                if heap.is_set(v):
                    known.append((pred, v))
        sig = tuple((pred, a, heap.versions[a]) for pred, a in known)
        ckey = (id(inst), bool(args))
        hit = self._last.get(ckey)
        if hit is not None and hit[0] == sig and hit[2] is inst:
            return hit[1]
        sliced = R.slice_rules(inst.rules, [pred for pred, _ in known])
        facts = {}
        for pred, a in known:
            n = p.arity.get(pred)
            if n is not None:
                facts[pred] = _to_facts(heap.objs[a], n)
        result: Dict[Any, frozenset] = {}
        if sliced:
            self.evaluations += 1
            try:
                out = eval_wellfounded(sliced, facts,
                                       reject_addr=lambda a: heap.types.get(a) in ("set", "sequence"))
            except EngineError as e:
                raise RuntimeFailure(str(e))
            for r in sliced:
                pred = r.head.pred
                if pred not in result:
                    result[pred] = _to_heap(out.relation(pred), p.arity[pred])
        self._last[ckey] = (sig, result, inst)
        return result

    def inf_sub(self, inst: R.InstRuleSet, args=None) -> Tuple[Dict[tuple, Any], Dict[Any, frozenset]]:
        """The heap updates for the derived variables of ``inst`` and its results."""
        p = self.prepare(inst)
        result = self.evaluate(inst, args)
        updates: Dict[tuple, Any] = {}
        for pred in p.derived_vars:
            owner, name = field_of(pred)
            if pred in result:
                cur = self.heap.objs[owner].get(name) if type(self.heap.objs.get(owner)) is dict else None
                if type(cur) is Addr:
                    updates[("s", cur)] = result[pred]
                else:
                    updates[("f", owner, name)] = (NEW, result[pred])
            else:
                updates[("f", owner, name)] = None
        return updates, result


def maint_sub(inference: Inference, stack: List[tuple]) -> Dict[tuple, Any]:
    theta: Dict[tuple, Any] = {}
    for frame in stack:
        layer: Dict[tuple, Any] = {}
        for inst in frame:
            layer.update(inference.inf_sub(inst)[0])
        theta.update(layer)  # the upper frame takes precedence
    return theta


class Applier:
    """Applies update maps, skipping writes that would leave the heap unchanged."""

    def __init__(self, heap: Heap):
        self.heap = heap
        self._stamp: Dict[Addr, tuple] = {}

    def write_set(self, a: Addr, content: frozenset) -> None:
        st = self._stamp.get(a)
        heap = self.heap
        if st is not None and st[1] is content and heap.versions.get(a) == st[0] \
                and heap.types.get(a) == "set":
            return
        heap.set_content(a, content)
        self._stamp[a] = (heap.versions[a], content)

    def new_set(self, content: frozenset) -> Addr:
        a = self.heap.new_set(content)
        self._stamp[a] = (self.heap.versions[a], content)
        return a

    def apply(self, theta: Dict[tuple, Any]) -> None:
        heap = self.heap
        for key, val in theta.items():
            if key[0] == "s":
                self.write_set(key[1], val)
                continue
            _, owner, name = key
            obj = heap.objs[owner]
            if val is None:
                if name not in obj or obj[name] is not None:
                    obj[name] = None
            else:
                obj[name] = self.new_set(val[1])


def query_pred(inst: R.InstRuleSet, name: str):
    """The derived predicate of ``inst`` named by an infer query."""
    for pred in inst.info.derived_preds:
        if pred.name == name:
            return pred
    return None


def param_pred(inst: R.InstRuleSet, name: str):
    for pred in inst.info.base_params:
        if pred.name == name:
            return pred
    return None


__all__ = ["RuntimeFailure", "Inference", "Applier", "maint_sub", "field_of", "query_pred",
           "param_pred", "A"]
