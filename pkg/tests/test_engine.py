import pytest
from hypothesis import given, settings, strategies as st

from rulelang import rules as R
from rulelang.bench.oracles import closure, retrograde
from rulelang.engine import EngineError, eval_naive, eval_seminaive, eval_wellfounded
from rulelang.syntax import parse_program
from rulelang.values import Addr

from randprog import random_program

TC = "rules tc { path(x,y) if edge(x,y); path(x,y) if edge(x,z), path(z,y) }"
WIN = "rules w { win(x) if move(x,y), not win(y) }"


def rules_of(src):
    return parse_program(src).rulesets[0].rules


def pred(rules, name):
    return next(p for p in R.preds_of(rules) if p.name == name)


def test_tc_small():
    rules = rules_of(TC)
    edge, path = pred(rules, "edge"), pred(rules, "path")
    out = eval_seminaive(rules, {edge: {(1, 2), (2, 3)}})
    assert out.relation(path) == {(1, 2), (2, 3), (1, 3)}
    assert out.undefined == {} or not any(out.undefined.values())


@settings(max_examples=50, deadline=None)
@given(st.sets(st.tuples(st.integers(0, 6), st.integers(0, 6)), max_size=20))
def test_tc_matches_closure(edges):
    rules = rules_of(TC)
    edge, path = pred(rules, "edge"), pred(rules, "path")
    for fn in (eval_naive, eval_seminaive, eval_wellfounded):
        assert fn(rules, {edge: edges}).relation(path) == closure(edges)


@pytest.mark.parametrize("seed", range(60))
def test_seminaive_equals_naive(seed):
    rules, facts = random_program(seed)
    if not R.is_stratified(rules):
        with pytest.raises(R.NotStratified):
            eval_naive(rules, facts)
        return
    a, b = eval_naive(rules, facts), eval_seminaive(rules, facts)
    assert a.extensions == b.extensions


@pytest.mark.parametrize("seed", range(40))
def test_wellfounded_is_total_on_stratified(seed):
    rules, facts = random_program(seed)
    if R.is_stratified(rules):
        w = eval_wellfounded(rules, facts)
        assert not any(w.undefined.values())
        assert w.extensions == eval_naive(rules, facts).extensions


def test_win_well_founded_small():
    rules = rules_of(WIN)
    move, win = pred(rules, "move"), pred(rules, "win")
    moves = {(1, 2), (2, 1), (2, 3), (4, 4)}
    out = eval_wellfounded(rules, {move: moves})
    assert out.relation(win) == {(2,)}
    assert out.undefined.get(win) == {(4,)}
    won, lost, drawn = retrograde(moves)
    assert (won, lost, drawn) == ({2}, {1, 3}, {4})


def test_stratified_negation():
    rules = rules_of("rules r { r(x) if n(x), not s(x); s(x) if e(x) }")
    n, e, r = pred(rules, "n"), pred(rules, "e"), pred(rules, "r")
    assert R.stratify(rules)[0] == {pred(rules, "s")}
    out = eval_seminaive(rules, {n: {(1,), (2,)}, e: {(2,)}})
    assert out.relation(r) == {(1,)}


def test_addresses_in_tuples_rejected_on_request():
    rules = rules_of(TC)
    edge = pred(rules, "edge")
    with pytest.raises(EngineError):
        eval_seminaive(rules, {edge: {(Addr(3), 1)}})
    out = eval_seminaive(rules, {edge: {(Addr(3), 1)}}, reject_addr=lambda a: False)
    assert (Addr(3), 1) in out.relation(pred(rules, "path"))


def test_constants_in_rules():
    rules = rules_of("rules r { q(y) if e(1, y); k(x) if e(x, 'a') }")
    e = pred(rules, "e")
    out = eval_seminaive(rules, {e: {(1, 2), (3, "a"), (1, "a")}})
    assert out.relation(pred(rules, "q")) == {(2,), ("a",)}
    assert out.relation(pred(rules, "k")) == {(3,), (1,)}
