"""Runtime values: None, booleans, integers, strings, addresses and tuples.

Booleans are dedicated singletons rather than Python ``bool`` so that
``True`` and ``1`` stay distinct inside sets and tuples.
"""

from __future__ import annotations

from typing import Any, Iterable


class Bool:
    __slots__ = ("value",)

    def __init__(self, value: bool):
        self.value = value

    def __repr__(self) -> str:
        return "True" if self.value else "False"

    def __reduce__(self):
        return (as_bool, (self.value,))


TRUE = Bool(True)
FALSE = Bool(False)


def as_bool(flag: bool) -> Bool:
    return TRUE if flag else FALSE


class Addr:
    """Opaque heap address; ordered by allocation index."""

    __slots__ = ("index",)

    def __init__(self, index: int):
        self.index = index

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Addr) and other.index == self.index

    def __hash__(self) -> int:
        return self.index * 1000003 + 17

    def __repr__(self) -> str:
        return f"@{self.index}"


GLOBAL_ADDR = Addr(0)

_TAG_NONE, _TAG_BOOL, _TAG_INT, _TAG_STR, _TAG_TUPLE, _TAG_ADDR = range(6)


def canon_key(v: Any) -> tuple:
    """Total order: None < Bool < Int < Str < Tuple < Address."""
    if v is None:
        return (_TAG_NONE,)
    t = type(v)
    if t is int:
        return (_TAG_INT, v)
    if t is str:
        return (_TAG_STR, v)
    if t is tuple:
        return (_TAG_TUPLE, tuple(canon_key(x) for x in v))
    if t is Bool:
        return (_TAG_BOOL, v.value)
    if t is Addr:
        return (_TAG_ADDR, v.index)
    raise TypeError(f"not a runtime value: {v!r}")


def linearize(values: Iterable[Any]) -> list:
    return sorted(values, key=canon_key)


def is_value(v: Any) -> bool:
    t = type(v)
    if v is None or t in (int, str, Bool, Addr):
        return True
    if t is tuple:
        return all(is_value(x) for x in v)
    return False


def is_ground(v: Any) -> bool:
    """True for values containing no address."""
    t = type(v)
    if t is Addr:
        return False
    if t is tuple:
        return all(is_ground(x) for x in v)
    return True


def identical(a: Any, b: Any) -> bool:
    # structural on immutables, identity on addresses
    return a == b and type(a) is type(b)


def format_value(v: Any) -> str:
    if v is None:
        return "None"
    t = type(v)
    if t is str:
        return "'" + v.replace("\\", "\\\\").replace("'", "\\'") + "'"
    if t is tuple:
        if len(v) == 1:
            return "(" + format_value(v[0]) + ",)"
        return "(" + ",".join(format_value(x) for x in v) + ")"
    return repr(v)


def from_python(v: Any) -> Any:
    """Convert plain Python data (bool, int, str, tuple, None) into runtime values."""
    if isinstance(v, bool):
        return as_bool(v)
    if isinstance(v, tuple):
        return tuple(from_python(x) for x in v)
    if v is None or isinstance(v, (int, str, Bool, Addr)):
        return v
    raise TypeError(f"cannot convert {v!r} to a runtime value")


def to_python(v: Any) -> Any:
    if type(v) is Bool:
        return v.value
    if type(v) is tuple:
        return tuple(to_python(x) for x in v)
    return v
