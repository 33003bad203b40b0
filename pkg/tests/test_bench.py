import pytest
from hypothesis import given, settings, strategies as st

from rulelang.bench import (
    GraphSpec, RbacOracle, RbacWorkloadSpec, closure, gen_family, gen_graph, rbac_workload,
    retrograde, run_bench, same_generation,
)
from rulelang.bench.generators import scaled_totals


def test_graph_examples():
    g = gen_graph(GraphSpec(4, 3, cyclic=False, seed=1))
    assert len(g) == 3 and all(u < v for u, v in g)
    assert len(set(gen_graph(GraphSpec(1000, 10000, True, 7)))) == 10000


def test_graph_infeasible():
    with pytest.raises(ValueError):
        gen_graph(GraphSpec(3, 4, cyclic=False))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 30), st.integers(0, 60), st.booleans(), st.integers(0, 2**63))
def test_graph_invariants(n, m, cyclic, seed):
    spec = GraphSpec(n, m, cyclic, seed)
    if m > spec.capacity():
        return
    g = gen_graph(spec)
    assert g == gen_graph(spec) and len(set(g)) == m
    assert all(0 <= u < n and 0 <= v < n for u, v in g)
    if not cyclic:
        assert all(u < v for u, v in g)


def test_family_is_acyclic():
    par = gen_family(40, 3)
    assert all(p < c for c, p in par)
    assert not any(a == b for a, b in closure(par))


def test_scaled_totals():
    t = scaled_totals(RbacWorkloadSpec(users=500))
    assert t["AddUser"] == 5 and t["AddRole"] == 1 and t["AssignUser"] == 6
    assert sum(t.values()) == 26


def test_rbac_workload_is_deterministic_and_valid():
    spec = RbacWorkloadSpec(users=50, roles=8, ur_pairs=60, rh_pairs=8, queries=5, seed=2)
    a, b = rbac_workload(spec), rbac_workload(spec)
    assert a == b
    o = RbacOracle()
    for op in a.setup + a.script:
        o.apply(*op)
    assert sum(op[0] == "AuthorizedUsers" for op in a.script) == 5


def test_oracles():
    assert same_generation({(1, 0), (2, 0)}) == {(1, 1), (1, 2), (2, 1), (2, 2)}
    assert retrograde({(1, 2)}) == ({1}, {2}, set())


def test_small_bench_runs_agree():
    spec = dict(vertices=20, edges=40, cyclic=1, seed=3)
    a, b, c = (run_bench(n, spec) for n in ("TC", "TCrev", "TCloop"))
    assert a.checksum == b.checksum == c.checksum
    assert a.result == frozenset(closure(a.result))


def test_report_line():
    r = run_bench("Win", dict(positions=10, moves=15, seed=1))
    assert r.line().startswith("Win spec=moves=15,positions=10,seed=1 ")
    assert f"checksum={r.checksum}" in r.line()
