"""Heap and heap-type map.

Objects are field maps (user classes and the global-variable object), sets,
or sequences.  Sets carry a version counter, bumped on every mutation, which
lets maintenance recognise unchanged inputs.
"""

from __future__ import annotations

from typing import Any, Dict, Iterable, List

from ..values import GLOBAL_ADDR, Addr, linearize

GLOBAL_CLASS = "$globals"
BUILTIN = ("set", "sequence")


class Heap:
    def __init__(self):
        self.types: Dict[Addr, str] = {}
        self.objs: Dict[Addr, Any] = {}
        self.versions: Dict[Addr, int] = {}
        self._next = 0
        self._sorted: Dict[Addr, tuple] = {}
        g = self.alloc(GLOBAL_CLASS)
        assert g == GLOBAL_ADDR

    def alloc(self, cls: str) -> Addr:
        a = Addr(self._next)
        self._next += 1
        self.types[a] = cls
        if cls == "set":
            self.objs[a] = set()
        elif cls == "sequence":
            self.objs[a] = []
        else:
            self.objs[a] = {}
        self.versions[a] = 0
        return a

    def new_set(self, content: Iterable = ()) -> Addr:
        a = self.alloc("set")
        self.objs[a] = set(content)
        return a

    def type_of(self, v) -> Any:
        return self.types.get(v) if type(v) is Addr else None

    def is_set(self, v) -> bool:
        return type(v) is Addr and self.types.get(v) == "set"

    def bump(self, a: Addr) -> None:
        self.versions[a] += 1

    def set_content(self, a: Addr, content: Iterable) -> None:
        """Make ``a`` a set holding ``content`` (the object at ``a`` is replaced)."""
        self.types[a] = "set"
        self.objs[a] = set(content)
        self.bump(a)

    def elements(self, a: Addr) -> List:
        """Set elements in canonical order, or sequence elements in order."""
        obj = self.objs[a]
        if self.types[a] == "sequence":
            return list(obj)
        v = self.versions[a]
        hit = self._sorted.get(a)
        if hit is not None and hit[0] == v:
            return hit[1]
        out = linearize(obj)
        self._sorted[a] = (v, out)
        return out

    def __len__(self) -> int:
        return len(self.objs)
