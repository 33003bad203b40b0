"""Random safe Datalog programs for engine property tests."""

from __future__ import annotations

import random

from rulelang import rules as R
from rulelang.syntax import parse_program

BASE = ("b0", "b1")
DERIVED = ("p0", "p1", "p2", "p3")
VARS = ("X", "Y", "Z")


def _atom(rng, pred, arity, pool):
    return f"{pred}({', '.join(rng.choice(pool) for _ in range(arity))})"


def random_program(seed: int, max_preds: int = 4, max_rules: int = 6, constants: int = 8,
                   negation: bool = True):
    """Returns (rules, facts) with facts keyed by the predicate objects.  Every
    rule is safe; negation may make the program non-stratified."""
    rng = random.Random(seed)
    derived = DERIVED[:rng.randint(1, max_preds - 1)]
    preds = BASE[:max(1, max_preds - len(derived))] + derived
    arity = {p: rng.randint(1, 2) for p in preds}
    lines = []
    n_rules = rng.randint(len(derived), max_rules)
    for k in range(n_rules):
        head = derived[k] if k < len(derived) else rng.choice(derived)
        body, bound = [], []
        for _ in range(rng.randint(1, 3)):
            p = rng.choice(preds)
            vs = [rng.choice(VARS) for _ in range(arity[p])]
            body.append(f"{p}({', '.join(vs)})")
            bound += vs
        if negation and rng.random() < 0.3:
            p = rng.choice(preds)
            body.append("not " + _atom(rng, p, arity[p], bound))
        hv = [rng.choice(bound) for _ in range(arity[head])]
        lines.append(f"{head}({', '.join(hv)}) if {', '.join(body)}")
    prog = parse_program("rules g { " + "; ".join(lines) + " }")
    rules = prog.rulesets[0].rules
    facts = {}
    for p in R.preds_of(rules) - {r.head.pred for r in rules}:
        n = arity[p.name]
        facts[p] = {tuple(rng.randrange(constants) for _ in range(n))
                    for _ in range(rng.randint(0, 12))}
    return rules, facts
