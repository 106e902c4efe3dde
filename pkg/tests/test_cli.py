from __future__ import annotations

import json
import subprocess
import sys

import pytest

from kronbound.cli import EXIT_BUDGET, EXIT_FAIL, EXIT_OK, EXIT_USAGE, main

STRASSEN_SIGMA = '{"kind": "monomial", "a": 1, "q": {"log": [3, 2]}, "k0": 1}'


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    return code, json.loads(out)


@pytest.fixture
def strassen_a(tmp_path, capsys):
    path = tmp_path / "a.json"
    code, out, _ = run(capsys, "gen", "strassen", "--matrix", "a")
    assert code == EXIT_OK
    path.write_text(out)
    return str(path)


@pytest.fixture
def identity3(tmp_path):
    path = tmp_path / "i3.csv"
    path.write_text("1,0,0\n0,1,0\n0,0,1\n")
    return str(path)


def test_rank_expansion(capsys, strassen_a):
    code, rep = run_json(capsys, "rank-expansion", strassen_a)
    assert code == EXIT_OK
    assert rep["values"] == [1, 2, 2, 3, 3, 4, 4]
    assert set(rep) == {"cols", "values", "kruskal_rank", "rows"}
    code, rep = run_json(capsys, "rank-expansion", strassen_a, "--kmax", "3")
    assert rep["values"] == [1, 2, 2]


def test_rank_expansion_csv(capsys, identity3):
    code, out, _ = run(capsys, "rank-expansion", identity3, "--format", "csv")
    assert code == EXIT_OK
    assert out.splitlines()[0] == "k,rank_expansion"
    assert out.splitlines()[1:] == ["1,1", "2,2", "3,3"]


def test_certify_pass_and_fail(capsys, strassen_a, identity3):
    code, rep = run_json(capsys, "certify", strassen_a, "--sigma", STRASSEN_SIGMA)
    assert code == EXIT_OK and rep["valid"]
    code, rep = run_json(capsys, "certify", strassen_a, "--sigma", '{"kind": "identity"}')
    assert code == EXIT_FAIL and not rep["valid"]
    assert rep["certificates"][0]["first_violation"]["k"] == 3


def test_certify_with_composition(capsys, tmp_path):
    for name in ("a", "b"):
        code, out, _ = run(capsys, "gen", "toom", "--k", "2", "--matrix", "a")
        (tmp_path / f"{name}.json").write_text(out)
    sig = '{"kind": "monomial", "a": 1, "q": {"log": [3, 2]}, "k0": 1, "n": 3}'
    code, rep = run_json(capsys, "certify", str(tmp_path / "a.json"), str(tmp_path / "b.json"),
                         "--sigma", sig, "--compose", "both")
    assert code == EXIT_OK, rep
    assert rep["valid"]


def test_usage_errors(capsys, strassen_a):
    assert run(capsys, "certify", strassen_a)[0] == EXIT_USAGE
    assert run(capsys, "certify", strassen_a, "--sigma", '{"kind": "bogus"}')[0] == EXIT_USAGE
    assert run(capsys, "rank-expansion", "/nonexistent/file.json")[0] == EXIT_USAGE
    assert run(capsys, "frobnicate")[0] == EXIT_USAGE
    assert run(capsys, "gen", "strassen", "--format", "csv")[0] == EXIT_USAGE
    assert run(capsys, "compose", "--sigma", '{"kind": "identity"}')[0] == EXIT_USAGE


def test_budget_exit(capsys, strassen_a, monkeypatch):
    code, rep = run_json(capsys, "rank-expansion", strassen_a, "--budget", "10")
    assert code == EXIT_BUDGET
    assert "k_reached" in rep and "partial" in rep
    monkeypatch.setenv("KRONBOUND_BUDGET", "10")
    assert run(capsys, "rank-expansion", strassen_a)[0] == EXIT_BUDGET


def test_compose_and_warning(capsys):
    cl = '{"kind": "clamped-linear", "r": 4, "n": 7}'
    code, out, err = run(capsys, "compose", "--sigma", cl, cl, "--at", "13")
    rep = json.loads(out)
    assert code == EXIT_OK
    assert rep["rows"][0]["value"] == pytest.approx(4.0)
    assert "warning" in err
    code, rep = run_json(capsys, "compose", "--method", "lshaped", "--sigma", cl, cl, "--k-range", "1:3")
    assert [r["k"] for r in rep["rows"]] == [1, 2, 3]


def test_phi(capsys):
    f = json.dumps({"kind": "table", "points": [[1, 1], [5, 5]]})
    code, rep = run_json(capsys, "phi", "R", "--f", f, "--g", f, "--t", "4")
    assert code == EXIT_OK and rep["value"] == pytest.approx(4)
    code, rep = run_json(capsys, "phi", "size", "--f", f, "--g", f, "--lshape", "1,1,2,2")
    assert rep["value"] == pytest.approx(3)
    assert run(capsys, "phi", "R", "--f", f, "--g", f)[0] == EXIT_USAGE


def test_comm_bound(capsys):
    code, rep = run_json(capsys, "comm-bound", "--alg", "strassen", "--n", "8", "--M", "4")
    assert code == EXIT_OK
    assert rep["reports"][0]["value"] == pytest.approx(2 * 343 * 4 / 9)
    code, rep = run_json(capsys, "comm-bound", "--alg", "toom", "--k", "3", "--d", "1", "--M", "1")
    assert rep["reports"][0]["value"] == pytest.approx(11)
    code, rep = run_json(capsys, "comm-bound", "--alg", "strassen", "--n", "16", "--P", "2,7,49")
    assert [r["mode"] for r in rep["reports"]] == ["parallel"] * 3


def test_table1(capsys):
    code, rep = run_json(capsys, "table1")
    assert code == EXIT_OK
    rows = rep["rows"]
    assert {r["problem"] for r in rows} == {"strassen", "toom2"}
    assert all(set(r) == set(rows[0]) for r in rows)


def test_grid_demo_deterministic(capsys):
    a = run_json(capsys, "grid-demo", "--trials", "20", "--seed", "5", "--shape", "3x4")
    b = run_json(capsys, "grid-demo", "--trials", "20", "--seed", "5", "--shape", "3x4")
    assert a == b and a[0] == EXIT_OK and a[1]["ok"]
    assert run(capsys, "grid-demo", "--shape", "3by4")[0] == EXIT_USAGE


def test_console_script():
    res = subprocess.run([sys.executable, "-m", "kronbound.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "kronbound" in res.stdout


def test_comm_bound_symtensor(capsys):
    code, rep = run_json(capsys, "comm-bound", "--alg", "symtensor", "--stv", "1,0,3", "--nonsym", "0,0,1",
                         "--n", "2", "--M", "4")
    assert code == EXIT_OK
    assert rep["params"]["no_bound"] == ["C"] and rep["params"]["partial_operands"]
    assert rep["shape"]["R"] == 32
    # E(4,4,4) = min over A, B of sigma^dagger(4): A is k, B is (4k)^{4/3}
    assert rep["reports"][0]["intermediates"]["emax"] == pytest.approx(4.0)
