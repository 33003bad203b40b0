import pytest
from hypothesis import given, settings, strategies as st

from rulelang.runtime import Machine, RuntimeFailure, StepBudgetExceeded
from rulelang.bench.oracles import closure

from conftest import core_of, run

TRANS = """rules trans_rs {
  path(x,y) if edge(x,y);
  path(x,y) if edge(x,z), path(z,y)
}
"""


def test_methods_functions_and_objects():
    m = run("class A { defun sq(x) = x * x\n def get(y) { return self.sq(y) + 1 } }\n"
            "a := new A(); v := a.get(3)")
    assert m.global_value("v") == 10


def test_setup_receives_constructor_arguments():
    m = run("class C { def setup(v) { self.v := v } }\nc := new C(5); w := c.v")
    assert m.global_value("w") == 5


def test_inheritance_and_super():
    m = run("class P { def setup() { self.a := 1 } }\n"
            "class Q extends P { def setup() { super.setup(); self.b := 2 } }\n"
            "q := new Q(); s := q.a + q.b; i := isinstance(q, P); j := isinstance(q, Q)")
    assert m.global_value("s") == 3
    # isinstance tests the exact class
    assert str(m.global_value("i")) == "False"
    assert str(m.global_value("j")) == "True"


def test_sequences_and_builtins():
    m = run("s := new sequence; s.add(3); s.add(1); s.add(3); n := s.length(); "
            "f := select((4,5), 2); x := {1}; x.del(5); k := x.size(); y := x.any()")
    assert m.global_value("s") == [3, 1, 3]
    assert (m.global_value("n"), m.global_value("f")) == (3, 5)
    assert (m.global_value("k"), m.global_value("y")) == (1, 1)


@pytest.mark.parametrize("src", ["x := 1 + 'a'", "o := new set; o.add(1); o.f := 2"])
def test_runtime_failures(src):
    with pytest.raises(RuntimeFailure):
        run(src)


def test_step_budget():
    with pytest.raises(StepBudgetExceeded):
        run("while True { x := 1 }", step_budget=500)


def test_maintenance_of_global_rules():
    m = run(TRANS + "edge := {(1,8),(2,9),(1,2)}; p := path")
    assert m.global_value("p") == frozenset({(1, 8), (2, 9), (1, 2), (1, 9)})


def test_maintenance_follows_updates():
    m = run(TRANS + "edge := {(1,2)}; a := {t: t in path}; edge.add((2,3)); "
            "b := {t: t in path}; edge.del((1,2)); c := {t: t in path}")
    assert m.global_value("a") == frozenset({(1, 2)})
    assert m.global_value("b") == frozenset({(1, 2), (2, 3), (1, 3)})
    assert m.global_value("c") == frozenset({(2, 3)})


def test_undefined_base_gives_none():
    m = run(TRANS + "edge := 5; p := path")
    assert m.global_value("p") is None


def test_derived_assignment_rejected_at_runtime():
    src = TRANS + "edge := {(1,2)}; path := {}"
    with pytest.raises(RuntimeFailure):
        run(src, mode="alias-checked")


def test_alias_update_rejected_in_alias_checked_mode():
    src = TRANS + "edge := {(1,2)}; q := path; q.add((5,5))"
    with pytest.raises(RuntimeFailure):
        run(src, mode="alias-checked")


def test_object_rules_and_infer():
    m = run("""
class G {
  def setup() { self.E := {} }
  rules r { self.reach(x,y) if self.E(x,y); self.reach(x,y) if self.E(x,z), self.reach(z,y) }
  def link(a, b) { self.E.add((a, b)) }
  def all() { return {t: t in self.reach} }
}
g := new G(); g.link(1, 2); g.link(2, 3); v := g.all()
""")
    assert m.global_value("v") == frozenset({(1, 2), (2, 3), (1, 3)})


def test_infer_with_parameters_and_patterns():
    m = run("rules tr { path(x,y) if edge(x,y); path(x,y) if edge(x,z), path(z,y) }\n"
            "E := {(1,2),(2,3)}; all := infer(path, edge=E, rules=tr); "
            "from1 := infer(path(1,_), edge=E, rules=tr)")
    assert m.global_value("all") == frozenset({(1, 2), (2, 3), (1, 3)})
    assert m.global_value("from1") == frozenset({2, 3})


def test_call_from_outside():
    m = run("class K { def setup() { self.s := {} } def put(v) { self.s.add(v) } "
            "def has(v) { return v in self.s } }\nk := new K()")
    k = m.global_value("k", deep=False)
    m.call(k, "put", 4)
    assert str(m.call(k, "has", 4)) == "True"
    assert str(m.call(k, "has", 5)) == "False"


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["add", "del"]),
                          st.tuples(st.integers(0, 5), st.integers(0, 5))), max_size=12))
def test_maintained_path_matches_closure(ops):
    m = Machine(core_of(TRANS + "p := path", ("edge",)))
    m.bind_global("edge", set())
    m.run()
    edges = set()
    e = m.global_value("edge", deep=False)
    for op, t in ops:
        m.run_statement(core_of(f"edge.{op}({t})", ("edge", "path")).main)
        (edges.add if op == "add" else edges.discard)(t)
        assert m.global_value("path") == frozenset(closure(edges))
    assert m.global_value("edge", deep=False) == e
