"""Independent reference computations used to check benchmark results."""

from __future__ import annotations

from collections import deque
from typing import Dict, Iterable, List, Set, Tuple


def closure(edges: Iterable[tuple]) -> Set[tuple]:
    """Transitive closure by Warshall's algorithm over the vertices used."""
    edges = set(edges)
    verts = sorted({v for e in edges for v in e}, key=repr)
    idx = {v: i for i, v in enumerate(verts)}
    n = len(verts)
    reach = [[False] * n for _ in range(n)]
    for u, v in edges:
        reach[idx[u]][idx[v]] = True
    for k in range(n):
        rk = reach[k]
        for i in range(n):
            ri = reach[i]
            if ri[k]:
                for j in range(n):
                    if rk[j]:
                        ri[j] = True
    return {(verts[i], verts[j]) for i in range(n) for j in range(n) if reach[i][j]}


def same_generation(par: Iterable[tuple]) -> Set[tuple]:
    """sg(x, y): x and y reach a common ancestor by parent chains of equal
    length (at least one step), enumerated level by level."""
    parents: Dict[object, Set[object]] = {}
    for c, p in par:
        parents.setdefault(c, set()).add(p)
    people = {v for t in par for v in t}
    out = set()
    for x in people:
        for y in people:
            fx, fy = {x}, {y}
            for _ in range(len(people)):
                fx = {p for v in fx for p in parents.get(v, ())}
                fy = {p for v in fy for p in parents.get(v, ())}
                if not fx or not fy:
                    break
                if fx & fy:
                    out.add((x, y))
                    break
    return out


def ancestors(par: Iterable[tuple]) -> Set[tuple]:
    """(x, y) with y a proper ancestor of x."""
    return closure(par)


def retrograde(moves: Iterable[tuple]) -> Tuple[Set, Set, Set]:
    """(won, lost, drawn) positions of the game where a player unable to move
    loses, by backward induction from terminal positions."""
    moves = set(moves)
    positions = {v for m in moves for v in m}
    succ: Dict[object, Set] = {p: set() for p in positions}
    pred: Dict[object, Set] = {p: set() for p in positions}
    for u, v in moves:
        succ[u].add(v)
        pred[v].add(u)
    remaining = {p: len(succ[p]) for p in positions}
    won, lost = set(), set()
    queue = deque(p for p in positions if remaining[p] == 0)
    lost.update(queue)
    while queue:
        q = queue.popleft()
        for p in pred[q]:
            if p in won or p in lost:
                continue
            if q in lost:
                won.add(p)
                queue.append(p)
            else:
                remaining[p] -= 1
                if remaining[p] == 0:
                    lost.add(p)
                    queue.append(p)
    return won, lost, positions - won - lost


class RbacOracle:
    """Plain-Python RBAC state answering AuthorizedUsers by breadth-first
    search over the role hierarchy."""

    def __init__(self):
        self.users: Set = set()
        self.roles: Set = set()
        self.ur: Set[tuple] = set()
        self.rh: Set[tuple] = set()

    def apply(self, op: str, *args):
        if op == "AddUser":
            self.users.add(args[0])
        elif op == "DeleteUser":
            self.users.discard(args[0])
            self.ur = {p for p in self.ur if p[0] != args[0]}
        elif op == "AddRole":
            self.roles.add(args[0])
        elif op == "DeleteRole":
            r = args[0]
            self.roles.discard(r)
            self.ur = {p for p in self.ur if p[1] != r}
            self.rh = {p for p in self.rh if r not in p}
        elif op == "AssignUser":
            self.ur.add(tuple(args))
        elif op == "DeassignUser":
            self.ur.discard(tuple(args))
        elif op == "AddInheritance":
            self.rh.add(tuple(args))
        elif op == "DeleteInheritance":
            self.rh.discard(tuple(args))
        elif op == "AuthorizedUsers":
            return self.authorized_users(args[0])
        else:
            raise ValueError(op)
        return None

    def seniors(self, role) -> Set:
        """Roles r with (r, role) in the reflexive transitive hierarchy."""
        below: Dict[object, List] = {}
        for a, d in self.rh:
            below.setdefault(d, []).append(a)
        seen = {role} if role in self.roles else set()
        queue = deque([role])
        while queue:
            d = queue.popleft()
            for a in below.get(d, ()):
                if a not in seen:
                    seen.add(a)
                    queue.append(a)
        return seen

    def authorized_users(self, role) -> frozenset:
        seniors = self.seniors(role) & self.roles
        return frozenset(u for u, r in self.ur if u in self.users and r in seniors)
