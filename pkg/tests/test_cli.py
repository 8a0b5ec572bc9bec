import json

import numpy as np
import pytest

from univmc.cli import main
from univmc.io import load_edges, load_matrix, save_matrix


def flat_matrix(path, n):
    u = np.full(n, 1 / np.sqrt(n))
    u[1::2] *= -1
    save_matrix(path, np.outer(u, np.full(n, 1 / np.sqrt(n))))


def test_gen_graph_and_spectrum(tmp_path, capsys):
    e = tmp_path / "e.txt"
    assert main(["--seed", "3", "gen-graph", "--family", "dregular", "--n1", "20", "--d", "4", "--out", str(e)]) == 0
    om = load_edges(e)
    assert om.is_regular and om.degree == 4
    js = tmp_path / "s.json"
    assert main(["spectrum", "--edges", str(e), "--json", str(js)]) == 0
    rep = json.loads(js.read_text())
    assert rep["sigma1"] == pytest.approx(4.0) and rep["d"] == 4
    capsys.readouterr()
    assert main(["--json", "spectrum", "--edges", str(e)]) == 0
    assert json.loads(capsys.readouterr().out)["n_edges"] == 80


@pytest.mark.parametrize("args", [
    ["--family", "er", "--n1", "10", "--p", "0.5", "--trim-factor", "2"],
    ["--family", "block", "--n1", "10", "--n2", "8", "--p", "0.6", "--q", "0.2"],
])
def test_gen_graph_other_families(tmp_path, args):
    e = tmp_path / "e.txt"
    assert main(["gen-graph", *args, "--out", str(e)]) == 0
    assert load_edges(e).size > 0


def test_gen_graph_missing_parameter(tmp_path, capsys):
    assert main(["gen-graph", "--family", "dregular", "--n1", "10", "--out", str(tmp_path / "e.txt")]) == 2
    assert "--d is required" in capsys.readouterr().err


def test_certify_exit_codes(tmp_path):
    m, e = tmp_path / "m.txt", tmp_path / "e.txt"
    flat_matrix(m, 40)
    main(["--seed", "1", "gen-graph", "--family", "dregular", "--n1", "40", "--d", "12", "--out", str(e)])
    js = tmp_path / "c.json"
    assert main(["certify", "--matrix", str(m), "--rank", "1", "--edges", str(e), "--json", str(js)]) == 0
    rep = json.loads(js.read_text())
    assert rep["passed"] is True and rep["certificate"]["supported_on_omega"] is True
    main(["--seed", "1", "gen-graph", "--family", "dregular", "--n1", "40", "--d", "1", "--out", str(e)])
    assert main(["certify", "--matrix", str(m), "--rank", "1", "--edges", str(e)]) == 1


def test_check_incoherence(tmp_path):
    m, e, js = tmp_path / "m.txt", tmp_path / "e.txt", tmp_path / "r.json"
    flat_matrix(m, 12)
    main(["gen-graph", "--family", "dregular", "--n1", "12", "--d", "4", "--out", str(e)])
    assert main(["check-incoherence", "--matrix", str(m), "--rank", "1", "--edges", str(e), "--json", str(js)]) == 0
    rep = json.loads(js.read_text())
    assert rep["mu0"] == pytest.approx(1.0) and rep["a1_pass"] and rep["delta_method"] == "exact-enumeration"


def test_approx_and_complete(tmp_path):
    rng = np.random.default_rng(0)
    M = rng.standard_normal((30, 2)) @ rng.standard_normal((2, 30))
    m, e, x, js = (tmp_path / s for s in ("m.txt", "e.txt", "x.txt", "r.json"))
    save_matrix(m, M)
    main(["gen-graph", "--family", "dregular", "--n1", "30", "--d", "15", "--out", str(e)])
    assert main(["approx", "--observed", str(m), "--edges", str(e), "--rank", "2", "--out", str(x)]) == 0
    assert load_matrix(x).shape == (30, 30)
    assert main(["complete", "--observed", str(m), "--edges", str(e), "--truth", str(m), "--out", str(x),
                 "--json", str(js)]) == 0
    rep = json.loads(js.read_text())
    assert rep["success"] is True and "X" not in rep
    assert np.linalg.norm(load_matrix(x) - M) <= 0.01 * np.linalg.norm(M)


def test_counterexample(tmp_path):
    e = tmp_path / "e.txt"
    e.write_text("8 8 16\n" + "".join(f"{i} {j}\n" for i in range(5, 9) for j in range(1, 5)))
    a, b, js = tmp_path / "a.txt", tmp_path / "b.txt", tmp_path / "r.json"
    assert main(["counterexample", "--n", "8", "--edges", str(e), "--out-a", str(a), "--out-b", str(b),
                 "--json", str(js)]) == 0
    rep = json.loads(js.read_text())
    assert rep["rows"] == [1, 2] and rep["agreement_residual"] <= 1e-12
    assert rep["failure"]["non_recovery_confirmed"] is True
    assert not np.allclose(load_matrix(a), load_matrix(b))


def test_counterexample_too_many_samples(tmp_path, capsys):
    e = tmp_path / "e.txt"
    e.write_text("8 8 17\n" + "".join(f"{i} {j}\n" for i in range(5, 9) for j in range(1, 5)) + "1 1\n")
    assert main(["counterexample", "--n", "8", "--edges", str(e), "--out-a", str(tmp_path / "a"),
                 "--out-b", str(tmp_path / "b")]) == 2
    assert "exceeds" in capsys.readouterr().err


def test_sweep_and_real(tmp_path):
    out, agg = tmp_path / "s.csv", tmp_path / "a.json"
    assert main(["--seed", "2", "sweep", "--n", "20", "--r", "2", "--budgets", "1.0", "--p-grid", "0.5,1.0",
                 "--trials", "2", "--out", str(out), "--aggregate", str(agg)]) == 0
    assert out.read_text().startswith("# univmc-sweep v1 SweepRow")
    rep = json.loads(agg.read_text())
    assert len(rep["cells"]) == 2 and "1.0" in rep["transition"]
    m = tmp_path / "m.txt"
    save_matrix(m, np.outer(np.arange(1, 21), np.ones(20)))
    assert main(["real", "--matrix", str(m), "--budgets", "1.8", "--p-grid", "0.9", "--out",
                 str(tmp_path / "r.csv")]) == 0


def test_bad_matrix_file_reports_line(tmp_path, capsys):
    m = tmp_path / "bad.txt"
    m.write_text("2 2\n1 2\n3\n")
    assert main(["real", "--matrix", str(m), "--out", str(tmp_path / "r.csv")]) == 2
    assert ":3:" in capsys.readouterr().err
