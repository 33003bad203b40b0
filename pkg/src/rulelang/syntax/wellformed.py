"""Static well-formedness checks on a resolved program."""

from __future__ import annotations

from typing import List

from . import ast as A
from .diagnostics import (
    ARITY_MISMATCH, DUPLICATE_DEFINITION, DUPLICATE_DERIVED, RESERVED_CLASS,
    SELF_IN_GLOBAL_RULES, UNKNOWN_CLASS, UNSAFE_NEGATION, UNSAFE_RULE, Diagnostic, diag,
)


def _vars(atom: A.Atom) -> list:
    return [a.name for a in atom.args if isinstance(a, A.LogicVar)]


def _shown(v: str) -> str:
    return "_" if v.startswith("_") and v[1:].isdigit() else v


def check_rule(rule: A.Rule) -> List[Diagnostic]:
    out = []
    positive = set()
    for lit in rule.body:
        if not lit.negated:
            positive.update(_vars(lit.atom))
    anywhere = positive | {v for lit in rule.body for v in _vars(lit.atom)}
    for v in _vars(rule.head):
        if v not in anywhere:
            out.append(diag(UNSAFE_RULE, f"unsafe rule: {_shown(v)} not in any hypothesis", rule.loc))
            break
    else:
        for v in _vars(rule.head):
            if v not in positive:
                out.append(diag(UNSAFE_RULE,
                                f"unsafe rule: {_shown(v)} not in any positive hypothesis", rule.loc))
                break
    for lit in rule.body:
        if lit.negated:
            missing = [v for v in _vars(lit.atom) if v not in positive]
            if missing:
                out.append(diag(UNSAFE_NEGATION,
                                f"unsafe negation: {_shown(missing[0])} in 'not {lit.atom.pred}' "
                                "does not occur in a positive hypothesis", rule.loc))
    return out


def derived_preds(rs: A.RuleSetDecl) -> set:
    return {r.head.pred for r in rs.rules}


def check_ruleset(rs: A.RuleSetDecl, global_scope: bool) -> List[Diagnostic]:
    out: List[Diagnostic] = []
    arity: dict = {}
    for rule in rs.rules:
        out.extend(check_rule(rule))
        for atom in [rule.head] + [l.atom for l in rule.body]:
            if global_scope and isinstance(atom.pred, A.SelfPred):
                out.append(diag(SELF_IN_GLOBAL_RULES,
                                f"rule set {rs.name} is global but uses {atom.pred}", rule.loc))
            n = len(atom.args)
            prev = arity.setdefault(atom.pred, n)
            if prev != n:
                out.append(diag(ARITY_MISMATCH,
                                f"predicate {atom.pred} used with arity {prev} and {n} "
                                f"in rule set {rs.name}", rule.loc))
    return out


def check_program(prog: A.Program) -> List[Diagnostic]:
    out: List[Diagnostic] = []
    classes = {}
    for c in prog.classes:
        if c.name in A.BUILTIN_CLASSES:
            out.append(diag(RESERVED_CLASS, f"class name {c.name} is reserved", c.loc))
        if c.name in classes:
            out.append(diag(DUPLICATE_DEFINITION, f"class {c.name} defined twice", c.loc))
        classes[c.name] = c
    known = set(classes) | set(A.BUILTIN_CLASSES)
    for c in prog.classes:
        if c.parent is not None and c.parent not in classes:
            out.append(diag(UNKNOWN_CLASS, f"class {c.name} extends unknown class {c.parent}", c.loc))
        seen = set()
        for m in c.methods:
            if m.name in seen:
                out.append(diag(DUPLICATE_DEFINITION, f"method {m.name} defined twice in {c.name}",
                                m.loc))
            seen.add(m.name)
    # inheritance cycles
    for c in prog.classes:
        cur, steps = c.parent, 0
        while cur in classes and steps <= len(classes):
            cur = classes[cur].parent
            steps += 1
        if steps > len(classes):
            out.append(diag(UNKNOWN_CLASS, f"inheritance cycle through {c.name}", c.loc))

    bodies = [prog.main] + [m.body for c in prog.classes for m in c.methods if not m.is_function]
    for body in bodies:
        for n in A.walk(body):
            if isinstance(n, A.NewObj) and n.cls not in known:
                out.append(diag(UNKNOWN_CLASS, f"new of unknown class {n.cls}", n.loc))
            if isinstance(n, A.IsInstance) and n.cls not in known:
                out.append(diag(UNKNOWN_CLASS, f"isinstance with unknown class {n.cls}"))

    rs_names = set()
    owner_of_global: dict = {}
    for rs in prog.rulesets:
        if rs.name in rs_names:
            out.append(diag(DUPLICATE_DEFINITION, f"rule set {rs.name} defined twice", rs.loc))
        rs_names.add(rs.name)
        out.extend(check_ruleset(rs, global_scope=True))
    for c in prog.classes:
        names = set()
        for rs in c.rulesets:
            if rs.name in names:
                out.append(diag(DUPLICATE_DEFINITION,
                                f"rule set {rs.name} defined twice in {c.name}", rs.loc))
            names.add(rs.name)
            out.extend(check_ruleset(rs, global_scope=False))
    # each global is derived in at most one rule set in the program
    all_rs = [(None, rs) for rs in prog.rulesets] + [(c.name, rs) for c in prog.classes
                                                     for rs in c.rulesets]
    for owner, rs in all_rs:
        for p in derived_preds(rs):
            if isinstance(p, A.GlobalPred):
                where = (owner, rs.name)
                if p.name in owner_of_global and owner_of_global[p.name] != where:
                    out.append(diag(DUPLICATE_DERIVED,
                                    f"global {p.name} is derived in more than one rule set", rs.loc))
                owner_of_global.setdefault(p.name, where)
    # each field is derived in at most one rule set per class, counting inherited ones
    for c in prog.classes:
        owner: dict = {}
        chain, cur = [], c
        while cur is not None and cur not in chain:
            chain.append(cur)
            cur = classes.get(cur.parent) if cur.parent else None
        visible = {}
        for cls in chain:  # a subclass rule set shadows a parent one of the same name
            for rs in cls.rulesets:
                visible.setdefault(rs.name, rs)
        for rs in visible.values():
            for p in derived_preds(rs):
                if isinstance(p, A.SelfPred):
                    key = rs.name
                    if p.name in owner and owner[p.name] != key:
                        out.append(diag(DUPLICATE_DERIVED,
                                        f"field {p.name} is derived in more than one rule set "
                                        f"of class {c.name}", rs.loc))
                    owner.setdefault(p.name, key)
    return _dedupe(out)


def _dedupe(diags):
    seen, out = set(), []
    for d in diags:
        if d not in seen:
            seen.add(d)
            out.append(d)
    return out
