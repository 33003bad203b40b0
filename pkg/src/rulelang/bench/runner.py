"""Run the benchmark programs and report result checksums and timings."""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field
from importlib import resources
from typing import Any, Dict, Iterable, List, Optional

from ..desugar import desugar_all
from ..runtime import Machine
from ..syntax import parse_program
from ..values import canon_key, format_value
from .generators import GraphSpec, RbacWorkloadSpec, gen_family, gen_graph, gen_moves, rbac_workload

GRAPH_BENCHES = {"TC": "tc.rl", "TCrev": "tcrev.rl", "TCloop": "tcloop.rl"}
FACT_BENCHES = {"SG": ("sg.rl", "par"), "ModSG": ("modsg.rl", "par"), "Win": ("win.rl", "move")}
RBAC_BENCHES = {"RBACnonloc": "rbac_nonloc.rl", "RBACallloc": "rbac_allloc.rl",
                "RBACunion": "rbac_union.rl"}
BENCH_NAMES = tuple(GRAPH_BENCHES) + tuple(FACT_BENCHES) + tuple(RBAC_BENCHES)

# desk-scale defaults
DEFAULT_SPECS: Dict[str, Dict[str, int]] = {
    "TC": dict(vertices=1000, edges=10000, cyclic=1, seed=0),
    "TCrev": dict(vertices=1000, edges=10000, cyclic=1, seed=0),
    "TCloop": dict(vertices=12, edges=20, cyclic=1, seed=0),
    "SG": dict(people=200, seed=0),
    "ModSG": dict(people=200, seed=0),
    "Win": dict(positions=200, moves=400, seed=0),
    "RBACnonloc": dict(users=500, roles=50, ur_pairs=550, rh_pairs=55, queries=50, seed=0),
    "RBACallloc": dict(users=500, roles=50, ur_pairs=550, rh_pairs=55, queries=50, seed=0),
    "RBACunion": dict(users=500, roles=50, ur_pairs=550, rh_pairs=55, queries=50, seed=0),
}


@dataclass
class BenchReport:
    name: str
    checksum: str
    wall: float
    steps: int
    size: int
    spec: Dict[str, int] = field(default_factory=dict)
    result: Any = None

    def line(self) -> str:
        spec = ",".join(f"{k}={v}" for k, v in sorted(self.spec.items()))
        return (f"{self.name} spec={spec} size={self.size} steps={self.steps} "
                f"wall={self.wall:.3f}s checksum={self.checksum}")


def program_source(filename: str) -> str:
    return resources.files(__package__).joinpath("programs", filename).read_text()


def checksum(values: Iterable) -> str:
    """Hash of the canonical text of a collection, independent of its order."""
    lines = sorted((format_value(v) for v in values))
    h = hashlib.sha256()
    for line in lines:
        h.update(line.encode())
        h.update(b"\n")
    return h.hexdigest()[:16]


def load(filename: str, extra_globals=()):
    return desugar_all(parse_program(program_source(filename), extra_globals=extra_globals))


def _run_facts(filename: str, pred: str, facts: List[tuple]):
    core = load(filename, [pred])
    m = Machine(core)
    t0 = time.perf_counter()
    m.bind_global(pred, set(facts))
    m.run()
    wall = time.perf_counter() - t0
    return m.global_value("result"), wall, m.steps


def run_rbac(filename: str, spec: RbacWorkloadSpec):
    """Execute the workload against one RBAC variant.  Returns the list of
    AuthorizedUsers results in script order, the wall time and steps."""
    source = program_source(filename) + "\nh := new HierRBAC()\n"
    m = Machine(desugar_all(parse_program(source)))
    t0 = time.perf_counter()
    m.run()
    h = m.global_value("h", deep=False)
    wl = rbac_workload(spec)
    for op in wl.setup:
        m.call(h, op[0], *op[1:])
    answers = []
    for op in wl.script:
        r = m.call(h, op[0], *op[1:])
        if op[0] == "AuthorizedUsers":
            answers.append((op[1], m.resolve(r)))
    return answers, time.perf_counter() - t0, m.steps


def run_bench(name: str, spec: Optional[Dict[str, int]] = None) -> BenchReport:
    if name not in BENCH_NAMES:
        raise ValueError(f"unknown benchmark {name}; choose from {', '.join(BENCH_NAMES)}")
    s = dict(DEFAULT_SPECS[name])
    s.update(spec or {})
    if name in GRAPH_BENCHES:
        g = GraphSpec(s["vertices"], s["edges"], bool(s["cyclic"]), s["seed"])
        result, wall, steps = _run_facts(GRAPH_BENCHES[name], "edge", gen_graph(g))
    elif name in FACT_BENCHES:
        filename, pred = FACT_BENCHES[name]
        if pred == "par":
            facts = gen_family(s["people"], s["seed"])
        else:
            facts = gen_moves(s["positions"], s["moves"], s["seed"])
        result, wall, steps = _run_facts(filename, pred, facts)
    else:
        ws = RbacWorkloadSpec(**{k: v for k, v in s.items()})
        answers, wall, steps = run_rbac(RBAC_BENCHES[name], ws)
        result = answers
        rows = [(i, r, tuple(sorted(us, key=canon_key))) for i, (r, us) in enumerate(answers)]
        return BenchReport(name, checksum(rows), wall, steps, len(answers), s, result)
    result = result if result is not None else frozenset()
    return BenchReport(name, checksum(result), wall, steps, len(result), s, result)
