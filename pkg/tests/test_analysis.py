from rulelang.analysis import BASE_UPDATE, DERIVED_ERROR, UNRELATED, check_updates, static_check

from conftest import core_of

TRANS = "rules trans_rs { path(x,y) if edge(x,y); path(x,y) if edge(x,z), path(z,y) }\n"


def test_derived_assignment_is_diagnostic_in_no_alias_mode():
    core = core_of(TRANS + "edge := {(1,2)};\npath := {}")
    diags = static_check(core, "no-alias")
    assert [(d.code, d.line) for d in diags] == [("E200", 3)]
    assert static_check(core, "alias-checked") == []


def test_site_kinds():
    core = core_of(TRANS + "edge := {(1,2)}; edge.add((2,3)); z := 1; p := path")
    rep = check_updates(core, "no-alias")
    kinds = {s.target: s.kind for s in rep.sites if s.target.startswith("a_gv.") and "$" not in s.target}
    assert kinds["a_gv.edge"] == BASE_UPDATE
    assert kinds["a_gv.z"] == UNRELATED
    assert kinds["a_gv.p"] == UNRELATED
    assert not rep.of_kind(DERIVED_ERROR)


def test_derived_add_in_method_flagged():
    core = core_of("class G { def setup() { self.E := {} }\n"
                   "rules r { self.R(x,y) if self.E(x,y) }\n"
                   "def bad() { self.R.add((1,1)) } }")
    diags = static_check(core, "no-alias")
    assert [d.code for d in diags] == ["E200"]


def test_infer_checks():
    bad_kw = core_of("rules tr { p(x) if e(x) }\nq := infer(p, f={1}, rules=tr)")
    bad_q = core_of("rules tr { p(x) if e(x) }\nq := infer(zz, e={1}, rules=tr)")
    unknown = core_of("q := infer(p, e={1}, rules=nope)")
    assert [d.code for d in static_check(bad_kw, "no-alias")] == ["E201"]
    assert [d.code for d in static_check(bad_q, "no-alias")] == ["E202"]
    assert [d.code for d in static_check(unknown, "no-alias")] == ["E203"]
