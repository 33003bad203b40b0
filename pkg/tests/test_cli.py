import io

import pytest

from rulelang.cli import main

TRANS = "rules trans_rs { path(x,y) if edge(x,y); path(x,y) if edge(x,z), path(z,y) }\n"


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return write


def test_run_dump_sorted(files):
    prog = files("tc.rl", TRANS)
    facts = files("g.facts", "edge(2,3).\nedge(1,2).\n")
    code, out, _ = cli("run", prog, "--facts", facts, "--bind", "edge=edge", "--dump", "path")
    assert code == 0
    assert out == "path: (1,2)\npath: (1,3)\npath: (2,3)\n"


def test_run_exit_codes(files):
    assert cli("run", files("loop.rl", "while True { x := 1 }"), "--step-budget", "100")[0] == 4
    assert cli("run", files("bad.rl", "x := 1 + 'a'"))[0] == 2
    assert cli("run", files("syn.rl", "x := "))[0] == 3
    assert cli("run", "/no/such/file.rl")[0] == 1
    assert cli("frobnicate")[0] == 1
    assert cli("run", files("ok.rl", "x := 1"), "--bind", "nope")[0] == 1


def test_derived_update_modes(files):
    prog = files("d.rl", TRANS + "edge := {(1,2)};\npath := {}")
    code, _, err = cli("run", prog)
    assert code == 3 and "E200" in err
    code, _, err = cli("run", prog, "--mode", "alias-checked")
    assert code == 2 and "derived" in err
    assert cli("check", prog)[0] == 3
    assert cli("check", prog, "--mode", "alias-checked")[0] == 0


def test_emit_core_and_explain(files):
    prog = files("s.rl", TRANS + "edge := {(1,2)}; n := count(edge)")
    code, out, _ = cli("run", prog, "--emit-core")
    assert code == 0 and "count" not in out and "plus(" in out
    code, out, _ = cli("check", prog, "--explain-rules", "trans_rs", "--explain-updates")
    assert code == 0
    assert "base parameters: edge" not in out  # edge is a global here
    assert "base variables: a_gv.edge" in out and "base-update" in out
    assert cli("check", prog, "--explain-rules", "nope")[0] == 1


def test_engine_eval(files):
    rules = files("w.rl", "rules w { win(x) if move(x,y), not win(y) }")
    facts = files("m.facts", "move(1,2).\nmove(2,1).\nmove(2,3).\nmove(4,4).\n")
    code, out, _ = cli("engine-eval", rules, facts, "--method", "wellfounded", "--query", "win")
    assert code == 0 and out == "win: (2,)\nwin?: (4,)\n"
    assert cli("engine-eval", rules, facts)[0] == 3


def test_bench(tmp_path):
    out_file = tmp_path / "r.txt"
    code, out, _ = cli("bench", "TC", "--spec", "vertices=10", "--spec", "edges=20",
                       "--repeat", "2", "--out", str(out_file))
    assert code == 0 and len(out.splitlines()) == 2
    assert out_file.read_text() == out
    assert cli("bench", "TC", "--spec", "vertices")[0] == 1
