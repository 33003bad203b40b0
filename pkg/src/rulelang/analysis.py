"""Compile-time checks on desugared programs.

``check_updates`` classifies every statement that writes a heap field or
mutates a set held in a field: an update of a base predicate, an update of a
derived predicate (an error in no-alias mode, a runtime guard otherwise), or
an update unrelated to any rule set.  Only directly named fields are
recognised; updates through aliases are left to the runtime.

``local_infer_check`` validates ``infer`` calls against the rule set they name.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

from . import rules as R
from .syntax import ast as A
from .syntax.diagnostics import (
    DERIVED_UPDATE, INFER_BAD_KWARG, INFER_BAD_QUERY, INFER_UNKNOWN_RULESET, Diagnostic, diag,
)

BASE_UPDATE = "base-update"
DERIVED_ERROR = "derived-update-error"
UNRELATED = "unrelated"


@dataclass(frozen=True)
class UpdateSite:
    loc: Optional[tuple]
    target: str  # 'a_gv.f', 'self.f' or '?' when the receiver is not a named field
    kind: str
    statement: str  # assign, new, add, del, infer


@dataclass
class UpdateSiteReport:
    mode: str
    sites: List[UpdateSite] = field(default_factory=list)
    diagnostics: List[Diagnostic] = field(default_factory=list)

    def of_kind(self, kind: str) -> List[UpdateSite]:
        return [s for s in self.sites if s.kind == kind]


@dataclass
class _Scope:
    """Predicate names relevant to one body: global ones, and the enclosing
    class's ``self`` ones (``None`` for the main program)."""

    global_base: frozenset
    global_derived: frozenset
    self_base: frozenset = frozenset()
    self_derived: frozenset = frozenset()


def _pred_names(decls) -> Tuple[set, set, set, set]:
    gb, gd, sb, sd = set(), set(), set(), set()
    for rs in decls:
        info = R.classify(rs)
        for p in info.base_vars:
            (sb if isinstance(p, A.SelfPred) else gb).add(p.name)
        for p in info.derived_vars:
            (sd if isinstance(p, A.SelfPred) else gd).add(p.name)
    return gb, gd, sb, sd


def _class_chain(prog: A.Program, name: str) -> List[A.ClassDecl]:
    classes = {c.name: c for c in prog.classes}
    out, c = [], classes.get(name)
    while c is not None:
        out.append(c)
        c = classes.get(c.parent) if c.parent else None
    return out


def visible_rulesets(prog: A.Program, cls: Optional[str]) -> Dict[str, A.RuleSetDecl]:
    """Rule sets reachable by name from code in class ``cls`` (or globally)."""
    if cls is None:
        return {rs.name: rs for rs in prog.rulesets}
    out: Dict[str, A.RuleSetDecl] = {}
    for c in _class_chain(prog, cls):
        for rs in c.rulesets:
            out.setdefault(rs.name, rs)
    return out


def _scopes(prog: A.Program) -> Tuple[_Scope, Dict[str, _Scope]]:
    all_decls = list(prog.rulesets) + [rs for c in prog.classes for rs in c.rulesets]
    gb, gd, _, _ = _pred_names(all_decls)
    top = _Scope(frozenset(gb), frozenset(gd))
    per_class = {}
    for c in prog.classes:
        _, _, sb, sd = _pred_names(visible_rulesets(prog, c.name).values())
        per_class[c.name] = _Scope(top.global_base, top.global_derived, frozenset(sb), frozenset(sd))
    return top, per_class


def _bodies(prog: A.Program) -> Iterator[Tuple[Optional[str], object]]:
    yield None, prog.main
    for c in prog.classes:
        for m in c.methods:
            if not m.is_function:
                yield c.name, m.body


def _statements(s) -> Iterator[object]:
    for n in A.walk(s):
        if isinstance(n, A.STATEMENT_TYPES):
            yield n


def _classify_field(e, scope: _Scope) -> Tuple[str, str]:
    """Name and kind of a field expression used as an update target."""
    if isinstance(e, A.Field) and isinstance(e.obj, A.GlobalObj):
        name = f"a_gv.{e.name}"
        if e.name in scope.global_derived:
            return name, DERIVED_ERROR
        return name, BASE_UPDATE if e.name in scope.global_base else UNRELATED
    if isinstance(e, A.Field) and isinstance(e.obj, A.Name) and e.obj.id == "self":
        name = f"self.{e.name}"
        if e.name in scope.self_derived:
            return name, DERIVED_ERROR
        return name, BASE_UPDATE if e.name in scope.self_base else UNRELATED
    return "?", UNRELATED


def check_updates(core: A.Program, mode: str = "no-alias") -> UpdateSiteReport:
    report = UpdateSiteReport(mode)
    top, per_class = _scopes(core)
    for cls, body in _bodies(core):
        scope = top if cls is None else per_class[cls]
        for s in _statements(body):
            found: List[Tuple[object, str]] = []
            if isinstance(s, (A.Assign, A.NewObj)) and isinstance(s.target, A.Field):
                found.append((s.target, "assign" if isinstance(s, A.Assign) else "new"))
            elif isinstance(s, A.MethodCall) and s.method in ("add", "del"):
                found.append((s.obj, s.method))
            elif isinstance(s, A.Infer):
                found.extend((t, "infer") for t in s.targets if isinstance(t, A.Field))
            elif isinstance(s, A.For) and isinstance(s.pattern, A.PVar) \
                    and isinstance(s.pattern.var, A.Field):
                found.append((s.pattern.var, "assign"))
            for target, what in found:
                if isinstance(target, A.Name):
                    continue  # local receiver: not a named field
                name, kind = _classify_field(target, scope)
                report.sites.append(UpdateSite(s.loc, name, kind, what))
                if kind == DERIVED_ERROR and mode == "no-alias":
                    report.diagnostics.append(
                        diag(DERIVED_UPDATE, f"update to derived predicate {name}", s.loc))
    return report


def local_infer_check(core: A.Program) -> List[Diagnostic]:
    out: List[Diagnostic] = []
    for cls, body in _bodies(core):
        for s in _statements(body):
            if not isinstance(s, A.Infer):
                continue
            if s.obj is None:
                scope_cls = None
            elif isinstance(s.obj, A.Name) and s.obj.id == "self" and cls is not None:
                scope_cls = cls
            else:
                continue  # receiver class unknown until run time
            rs = visible_rulesets(core, scope_cls).get(s.ruleset)
            if rs is None:
                out.append(diag(INFER_UNKNOWN_RULESET, f"unknown rule set {s.ruleset}", s.loc))
                continue
            info = R.classify(rs)
            params = {p.name for p in info.base_params}
            derived = {p.name for p in info.derived_preds}
            for name, _ in s.kwargs:
                if name not in params:
                    out.append(diag(INFER_BAD_KWARG,
                                    f"{name} is not a base predicate parameter of {s.ruleset}", s.loc))
            for q in s.queries:
                if q.pred not in derived:
                    out.append(diag(INFER_BAD_QUERY,
                                    f"{q.pred} is not a derived predicate of {s.ruleset}", s.loc))
    return out


def static_check(core: A.Program, mode: str = "no-alias") -> List[Diagnostic]:
    """All compile-time diagnostics for a desugared program, in source order."""
    diags = check_updates(core, mode).diagnostics + local_infer_check(core)
    return sorted(diags, key=lambda d: (d.line or 0, d.col or 0, d.code))
