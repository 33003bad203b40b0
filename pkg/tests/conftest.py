"""Shared helpers: parse, desugar and run small programs."""

from __future__ import annotations

import pytest

from rulelang.desugar import desugar_all
from rulelang.runtime import Machine
from rulelang.syntax import parse_program


def core_of(source: str, extra_globals=()):
    return desugar_all(parse_program(source, extra_globals=extra_globals))


def run(source: str, mode: str = "no-alias", bindings=None, extra_globals=(), hook=None,
        step_budget=None) -> Machine:
    """Run ``source`` after binding ``bindings`` and return the machine."""
    bindings = bindings or {}
    core = core_of(source, tuple(extra_globals) + tuple(bindings))
    kw = {"hook": hook}
    if step_budget is not None:
        kw["step_budget"] = step_budget
    m = Machine(core, mode, **kw)
    for name, value in bindings.items():
        m.bind_global(name, value)
    m.run()
    return m


def value(m: Machine, name: str):
    return m.global_value(name)


@pytest.fixture
def runp():
    return run
