import pytest

from rulelang import rules as R
from rulelang.syntax import parse_program


def ruleset(src, extra=()):
    return parse_program(src, extra_globals=extra).rulesets[0]


def names(ps):
    return {p.name for p in ps}


def test_classify_params_and_globals():
    rs = ruleset("rules tc { path(x,y) if edge(x,y); path(x,y) if edge(x,z), path(z,y) }",
                 extra=["path"])
    info = R.classify(rs)
    assert names(info.base_params) == {"edge"}
    assert names(info.derived_vars) == {"path"}
    assert not info.base_vars and not info.derived_params


def test_dependency_and_fully_depends():
    rs = ruleset("rules r { a(x) if b(x); c(x) if a(x), d(x) }")
    info = R.classify(rs)
    a = next(p for p in info.derived_preds if p.name == "a")
    c = next(p for p in info.derived_preds if p.name == "c")
    b = next(p for p in info.base_preds if p.name == "b")
    d = next(p for p in info.base_preds if p.name == "d")
    assert R.fully_depends(info, a, [b])
    assert not R.fully_depends(info, c, [b])
    assert R.fully_depends(info, c, [b, d])


def test_slice_drops_rules_with_unknown_bases():
    rs = ruleset("rules r { a(x) if b(x); c(x) if a(x), d(x) }")
    b = next(p for p in R.preds_of(rs.rules) if p.name == "b")
    sliced = R.slice_rules(rs.rules, [b])
    assert [r.head.pred.name for r in sliced] == ["a"]


def test_stratify_layers():
    rs = ruleset("rules r { s(x) if e(x); t(x) if n(x), not s(x); u(x) if t(x) }")
    strata = [names(s) for s in R.stratify(rs.rules)]
    assert strata == [{"s"}, {"t", "u"}]


def test_not_stratified():
    rs = ruleset("rules w { win(x) if move(x,y), not win(y) }")
    assert not R.is_stratified(rs.rules)
    with pytest.raises(R.NotStratified):
        R.stratify(rs.rules)
