import json

import numpy as np
import pytest

from fclear import io
from fclear.cli import run
from fclear.errors import ParseError
from fclear.reductions import compile_objective, named_graph


@pytest.fixture
def workdir(tmp_path, three_bank):
    io.save_system(three_bank, tmp_path / "three_bank.json")
    (tmp_path / "p3.txt").write_text("3 2\n1 2\n2 3\n")
    return tmp_path


def out_json(capsys):
    return json.loads(capsys.readouterr().out)


def test_solve_picard(workdir, capsys):
    assert run(["solve", "--system", str(workdir / "three_bank.json")]) == 0
    res = out_json(capsys)
    assert res["status"] == "Converged"
    assert res["rates"] == {"u": 0.5, "w": 1.0, "v": 1.0}
    assert res["equity"]["v"] == 3.0


def test_solve_default_sets(workdir, capsys):
    assert run(["solve", "--system", str(workdir / "three_bank.json"), "--method", "default-sets"]) == 0
    assert len(out_json(capsys)["solutions"]) == 1


def test_compile_then_best(workdir, capsys):
    sysf = workdir / "sys.json"
    args = ["compile", "--graph", str(workdir / "p3.txt"), "--objective", "max-equity", "--multiplier", "4", "--out", str(sysf)]
    assert run(args) == 0
    assert out_json(capsys)["c"] == 4.0
    assert (workdir / "sys.manifest.json").exists()
    assert run(["enumerate", "--system", str(sysf), "--report", "best"]) == 0
    res = out_json(capsys)
    assert res["best"] == 2.0 and res["nodes"] == [0, 2]
    assert run(["enumerate", "--system", str(sysf), "--report", "summary"]) == 0
    assert out_json(capsys)["count"] == 8


def test_compile_decision_needs_k(workdir, capsys):
    assert run(["compile", "--graph", str(workdir / "p3.txt"), "--objective", "decision"]) == 2
    assert run(["compile", "--graph", str(workdir / "p3.txt"), "--objective", "bogus"]) == 2


def test_compile_representative_writes_rates(workdir, capsys):
    sysf = workdir / "rep.json"
    args = ["compile", "--graph", str(workdir / "p3.txt"), "--objective", "representative", "--k", "2", "--out", str(sysf)]
    assert run(args) == 0
    res = out_json(capsys)
    assert run(["evaluate", "--system", str(sysf), "--rates", res["r"]]) == 0
    assert out_json(capsys)["clearing"] is True


def test_oracle(workdir, capsys):
    assert run(["oracle", "--graph", str(workdir / "p3.txt")]) == 0
    assert out_json(capsys) == {"problem": "maxis", "value": 2, "witness": [1, 3]}
    assert run(["oracle", "--graph", str(workdir / "p3.txt"), "--problem", "minids"]) == 0
    assert out_json(capsys)["value"] == 1


def test_evaluate(workdir, capsys):
    rates = workdir / "r.json"
    rates.write_text(json.dumps({"rates": {"u": 0.5}}))
    args = ["evaluate", "--system", str(workdir / "three_bank.json"), "--rates", str(rates), "--objective", "max-equity", "--node", "v"]
    assert run(args) == 0
    res = out_json(capsys)
    assert res["clearing"] is True and res["value"] == 3.0
    rates.write_text(json.dumps({"rates": [1, 1, 1]}))
    assert run(["evaluate", "--system", str(workdir / "three_bank.json"), "--rates", str(rates)]) == 1
    assert out_json(capsys)["firstViolation"] == "u"


def test_depgraph_and_showcase(workdir, capsys):
    br = workdir / "br.json"
    assert run(["showcase", "--kind", "four-optima", "--out", str(workdir / "four.json")]) == 0
    capsys.readouterr()
    assert run(["showcase", "--kind", "exponential", "--g", "1", "--out", str(br)]) == 0
    capsys.readouterr()
    assert run(["depgraph", "--system", str(br), "--check", "red-cycle"]) == 1
    assert capsys.readouterr().out.strip() == "General: red cycle x0 -> y0 -> x0"
    assert run(["depgraph", "--system", str(workdir / "three_bank.json"), "--check", "red-cycle"]) == 0
    assert run(["depgraph", "--system", str(br), "--check", "edges"]) == 0
    assert "R x0 y0" in capsys.readouterr().out


def test_usage_errors(workdir, capsys):
    assert run(["solve", "--system", str(workdir / "missing.json")]) == 2
    assert run(["solve", "--system", str(workdir / "three_bank.json"), "--damping", "0"]) == 2
    assert run(["frobnicate"]) == 2
    (workdir / "bad.json").write_text("{")
    assert run(["solve", "--system", str(workdir / "bad.json")]) == 2


def test_io_round_trip(tmp_path, lossy_pair):
    io.save_system(lossy_pair, tmp_path / "s.json")
    back = io.load_system(tmp_path / "s.json")
    assert back.digest() == lossy_pair.digest()
    r = np.array([1.0, 3 / 7, 3 / 7, 1.0])
    np.testing.assert_allclose(io.rates_from_dict(back, io.rates_to_dict(back, r)), r)
    with pytest.raises(ParseError):
        io.system_from_dict({"banks": [{"id": 1, "external": 0}]})
    with pytest.raises(ParseError):
        io.rates_from_dict(back, {"rates": {"nobody": 1.0}})


def test_compiled_round_trip(tmp_path):
    c = compile_objective(named_graph("P3"), "MinEquity")
    io.save_compiled(c, tmp_path / "c.json")
    back, system = io.load_compiled(tmp_path / "c.json")
    assert back.objective == "MinEquity" and back.v_c == c.v_c
    assert [d.members for d in back.drivers] == [d.members for d in c.drivers]
    assert system.digest() == c.system.digest()
