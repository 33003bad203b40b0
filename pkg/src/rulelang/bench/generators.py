"""Deterministic input generators for the benchmarks.

Graphs are sampled uniformly without replacement; acyclic graphs only use
pairs (u, v) with u < v.  The RBAC workload scales the operation totals of
the original experiment by ``users / 5000`` and shuffles them.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Dict, Iterable, List, Set, Tuple


@dataclass(frozen=True)
class GraphSpec:
    vertices: int
    edges: int
    cyclic: bool = True
    seed: int = 0

    def capacity(self) -> int:
        n = self.vertices
        return n * n if self.cyclic else n * (n - 1) // 2


def gen_graph(spec: GraphSpec) -> List[Tuple[int, int]]:
    """Exactly ``spec.edges`` distinct edges over vertices 0..n-1, sorted."""
    if spec.vertices <= 0 or spec.edges < 0:
        raise ValueError("vertices must be positive and edges nonnegative")
    cap = spec.capacity()
    if spec.edges > cap:
        raise ValueError(f"{spec.edges} edges do not fit in {cap} possible pairs")
    rng = random.Random(spec.seed)
    n = spec.vertices
    if spec.edges * 3 > cap:
        pairs = [(u, v) for u in range(n) for v in range(n) if spec.cyclic or u < v]
        return sorted(rng.sample(pairs, spec.edges))
    out: Set[Tuple[int, int]] = set()
    while len(out) < spec.edges:
        u, v = rng.randrange(n), rng.randrange(n)
        if not spec.cyclic:
            if u == v:
                continue
            u, v = min(u, v), max(u, v)
        out.add((u, v))
    return sorted(out)


def format_facts(pred: str, tuples: Iterable[tuple]) -> str:
    """Fact-file text, one ``pred(a, b).`` per line."""
    def lit(v):
        return "'" + v.replace("\\", "\\\\").replace("'", "\\'") + "'" if isinstance(v, str) else str(v)
    return "".join(f"{pred}({', '.join(lit(v) for v in t)}).\n" for t in tuples)


def gen_family(people: int, seed: int = 0, max_parents: int = 2) -> List[Tuple[int, int]]:
    """``par(c, p)`` facts: every person but the first few gets 1..max_parents
    parents among earlier people, so ancestry is acyclic."""
    rng = random.Random(seed)
    out = set()
    roots = max(1, people // 8)
    for c in range(roots, people):
        for p in rng.sample(range(c), min(c, rng.randint(1, max_parents))):
            out.add((c, p))
    return sorted(out)


def gen_moves(positions: int, moves: int, seed: int = 0) -> List[Tuple[int, int]]:
    """A random move graph; self-loops allowed."""
    return gen_graph(GraphSpec(positions, min(moves, positions * positions), True, seed))


# ------------------------------------------------------------------ RBAC

# operation totals of the original workload, for 5000 users
RBAC_TOTALS = {"AddUser": 50, "DeleteUser": 50, "AddRole": 5, "DeleteRole": 5,
               "AssignUser": 55, "DeassignUser": 55, "AddInheritance": 5, "DeleteInheritance": 5}
RBAC_FULL_USERS = 5000


@dataclass(frozen=True)
class RbacWorkloadSpec:
    users: int = 500
    roles: int = 50
    ur_pairs: int = 550
    rh_pairs: int = 55
    queries: int = 50
    seed: int = 0
    height: int = 5
    max_roles_per_user: int = 10


def scaled_totals(spec: RbacWorkloadSpec) -> Dict[str, int]:
    """Per-operation totals scaled to ``spec.users``, rounding halves up and
    keeping at least one of each."""
    f = spec.users / RBAC_FULL_USERS
    return {op: max(1, math.floor(n * f + 0.5)) for op, n in RBAC_TOTALS.items()}


@dataclass
class RbacWorkload:
    setup: List[tuple]   # (method, *args) building the initial state
    script: List[tuple]  # shuffled updates and AuthorizedUsers queries


class _State:
    def __init__(self):
        self.users: Set[int] = set()
        self.roles: Set[int] = set()
        self.ur: Set[tuple] = set()
        self.rh: Set[tuple] = set()
        self.level: Dict[int, int] = {}


def rbac_workload(spec: RbacWorkloadSpec) -> RbacWorkload:
    """Initial population plus a random interleaving of the scaled update
    totals and ``spec.queries`` queries.  Role hierarchy pairs only connect
    consecutive levels of ``spec.height`` levels, so the hierarchy stays
    acyclic with height at most ``spec.height``.  Arguments of each operation
    are drawn against the state reached so far."""
    rng = random.Random(spec.seed)
    st = _State()
    setup: List[tuple] = []
    next_user, next_role = 0, 0

    def new_role():
        nonlocal next_role
        r = next_role
        next_role += 1
        st.level[r] = rng.randrange(spec.height)
        return r

    for _ in range(spec.users):
        setup.append(("AddUser", next_user))
        st.users.add(next_user)
        next_user += 1
    for _ in range(spec.roles):
        r = new_role()
        setup.append(("AddRole", r))
        st.roles.add(r)

    def ur_candidate():
        per_user: Dict[int, int] = {}
        for u, _ in st.ur:
            per_user[u] = per_user.get(u, 0) + 1
        users = sorted(u for u in st.users if per_user.get(u, 0) < spec.max_roles_per_user)
        roles = sorted(st.roles)
        for _ in range(1000):
            if not users or not roles:
                return None
            p = (rng.choice(users), rng.choice(roles))
            if p not in st.ur:
                return p
        return None

    def rh_candidate():
        roles = sorted(st.roles)
        for _ in range(1000):
            if len(roles) < 2:
                return None
            a, d = rng.choice(roles), rng.choice(roles)
            if st.level[d] == st.level[a] + 1 and (a, d) not in st.rh:
                return (a, d)
        return None

    for _ in range(spec.ur_pairs):
        p = ur_candidate()
        if p is None:
            break
        setup.append(("AssignUser",) + p)
        st.ur.add(p)
    for _ in range(spec.rh_pairs):
        p = rh_candidate()
        if p is None:
            break
        setup.append(("AddInheritance",) + p)
        st.rh.add(p)

    kinds = [op for op, n in scaled_totals(spec).items() for _ in range(n)]
    kinds += ["AuthorizedUsers"] * spec.queries
    rng.shuffle(kinds)
    script: List[tuple] = []
    for op in kinds:
        if op == "AddUser":
            u = next_user
            next_user += 1
            st.users.add(u)
            script.append((op, u))
        elif op == "DeleteUser":
            if not st.users:
                continue
            u = rng.choice(sorted(st.users))
            st.users.discard(u)
            st.ur = {p for p in st.ur if p[0] != u}
            script.append((op, u))
        elif op == "AddRole":
            r = new_role()
            st.roles.add(r)
            script.append((op, r))
        elif op == "DeleteRole":
            if not st.roles:
                continue
            r = rng.choice(sorted(st.roles))
            st.roles.discard(r)
            st.ur = {p for p in st.ur if p[1] != r}
            st.rh = {p for p in st.rh if r not in p}
            script.append((op, r))
        elif op == "AssignUser":
            p = ur_candidate()
            if p is not None:
                st.ur.add(p)
                script.append((op,) + p)
        elif op == "DeassignUser":
            if st.ur:
                p = rng.choice(sorted(st.ur))
                st.ur.discard(p)
                script.append((op,) + p)
        elif op == "AddInheritance":
            p = rh_candidate()
            if p is not None:
                st.rh.add(p)
                script.append((op,) + p)
        elif op == "DeleteInheritance":
            if st.rh:
                p = rng.choice(sorted(st.rh))
                st.rh.discard(p)
                script.append((op,) + p)
        else:
            roles = sorted(st.roles)
            script.append((op, rng.choice(roles) if roles else 0))
    return RbacWorkload(setup, script)
