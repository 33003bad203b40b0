import pytest
from hypothesis import given, settings, strategies as st

from rulelang.syntax import DiagnosticError, parse_facts, parse_program, pretty


def codes(source):
    with pytest.raises(DiagnosticError) as e:
        parse_program(source)
    return [d.code for d in e.value.diagnostics]


@pytest.mark.parametrize("source, code", [
    ("rules r { p(x,y) if q(x) }", "E100"),
    ("rules r { p(x) if q(x), not s(y) }", "E104"),
    ("rules r { p(x) if q(x) }\nrules s { p(x) if q(x) }\nt := p", "E101"),
    ("rules r { self.p(x) if q(x) }", "E102"),
    ("rules r { p(x) if q(x); p(x,y) if q(x), q(y) }", "E103"),
    ("x := new Foo()", "E105"),
    ("class set { }", "E106"),
    ("class A extends B { }", "E105"),
    ("return 1", "E109"),
    ("x := (1", "E001"),
    ("class A { def f() { x := 1 } def f() { x := 2 } }", "E113"),
])
def test_diagnostic_codes(source, code):
    assert code in codes(source)


def test_diagnostic_location():
    with pytest.raises(DiagnosticError) as e:
        parse_program("x := 1;\nrules r { p(x,y) if q(x) }")
    d = e.value.diagnostics[0]
    assert (d.line, d.col) == (2, 11)
    assert str(d).startswith("2:11: E100")


def test_fig1_parses():
    src = """
class CoreRBAC {
  def setup() { self.USERS, self.ROLES, self.UR := {},{},{} }
  def AddRole(role) { self.ROLES.add(role) }
}
class HierRBAC extends CoreRBAC {
  def setup() { super.setup(); self.RH := {} }
  rules trans_rs {
    path(x,y) if edge(x,y);
    path(x,y) if edge(x,z), path(z,y)
  }
  def transRH() { return infer(path, edge=self.RH, rules=trans_rs) + {(r,r): r in self.ROLES} }
}
h := new HierRBAC()
"""
    prog = parse_program(src)
    assert [c.name for c in prog.classes] == ["CoreRBAC", "HierRBAC"]
    hier = prog.classes[1]
    assert hier.parent == "CoreRBAC"
    assert [rs.name for rs in hier.rulesets] == ["trans_rs"]
    assert len(hier.rulesets[0].rules) == 2


def test_global_resolution_depends_on_mentions():
    rules = "rules r { p(x) if q(x) }\n"
    alone = parse_program(rules)
    mentioned = parse_program(rules + "q := {1}; t := p")
    bound = parse_program(rules, extra_globals=["q", "p"])
    kinds = lambda prog: {type(a.pred).__name__ for r in prog.rulesets[0].rules
                          for a in [r.head] + [l.atom for l in r.body]}
    assert kinds(alone) == {"ParamPred"}
    assert "ParamPred" not in kinds(mentioned)
    assert kinds(mentioned) == kinds(bound)


def test_comments_and_patterns_parse():
    parse_program("# comment\nE := {(1,2)}; u := 1;\nfor (=u, r) in E { x := r };\n"
                  "b := (1, 2) not in E")


def test_pretty_roundtrip_of_surface_program():
    src = "rules r { p(x) if q(x), not s(x) }\nq := {1, 2}; s := {2}; t := p"
    once = pretty(parse_program(src))
    assert pretty(parse_program(once, allow_internal_names=True)) == once


def test_facts():
    assert parse_facts("e(1, 2).\ne('a', -3).\n# note\n") == {"e": {(1, 2), ("a", -3)}}
    for bad, code in [("e(1,2).\ne(3).", "E121"), ("e(1 2).", "E120"), ("e(x).", "E120")]:
        with pytest.raises(DiagnosticError) as e:
            parse_facts(bad)
        assert e.value.diagnostics[0].code == code


atoms = st.one_of(st.integers(-50, 50), st.text("abc xyz'\\", max_size=5))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(atoms, atoms), max_size=8))
def test_facts_roundtrip(tuples):
    from rulelang.bench import format_facts
    text = format_facts("e", tuples)
    assert parse_facts(text).get("e", set()) == set(tuples)
