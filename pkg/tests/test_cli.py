import json
import subprocess
import sys

import numpy as np
import pytest

from sparsecert import cli
from sparsecert.errors import ConstructionError
from sparsecert.guarantees import construct_counterexample
from sparsecert.matrixio import read_matrix, write_matrix
from sparsecert.rng import Xorshift64Star
from sparsecert.sensing import random_sparse_signal

from .conftest import planted_two_bases


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def boundary_file(tmp_path):
    path = tmp_path / "boundary.txt"
    write_matrix(path, construct_counterexample(2).phi.phi)
    return path


class TestCoherence:
    def test_identity(self, tmp_path, capsys):
        write_matrix(tmp_path / "eye.txt", np.eye(4))
        code, out, _ = run(capsys, "--json", "coherence", tmp_path / "eye.txt")
        rep = json.loads(out)
        assert code == 0 and rep["mu"] == 0.0
        assert [v["K"] for v in rep["verdicts"]] == [1, 2, 3, 4]
        assert all(v["holds"] for v in rep["verdicts"])

    def test_boundary(self, boundary_file, capsys):
        code, out, _ = run(capsys, "coherence", boundary_file, "--json")
        rep = json.loads(out)
        assert code == 0
        assert rep["mu"] == pytest.approx(1 / 3, abs=1e-12)
        assert {v["K"]: v["holds"] for v in rep["verdicts"]} == {1: True, 2: False}
        assert rep["welch_bound"] == pytest.approx(1 / 3)

    def test_text_output(self, boundary_file, capsys):
        code, out, _ = run(capsys, "coherence", boundary_file)
        assert code == 0 and "K = 2: mu < 0.333333 -> no" in out

    def test_malformed(self, tmp_path, capsys):
        (tmp_path / "bad.txt").write_text("2 2\n1 0\n0 oops\n")
        code, _, err = run(capsys, "coherence", tmp_path / "bad.txt")
        assert code == 2 and "line 3" in err

    def test_missing_file(self, tmp_path, capsys):
        assert run(capsys, "coherence", tmp_path / "nope.txt")[0] == 2

    def test_normalization(self, tmp_path, capsys):
        write_matrix(tmp_path / "raw.txt", [[3.0, 1.0], [4.0, 0.0]])
        code, _, err = run(capsys, "coherence", tmp_path / "raw.txt")
        assert code == 3 and "--normalize" in err
        code, out, _ = run(capsys, "--normalize", "--json", "coherence", tmp_path / "raw.txt")
        assert code == 0 and json.loads(out)["mu"] == pytest.approx(0.6)


class TestRun:
    def test_one_sparse(self, tmp_path, capsys):
        phi = np.eye(3)
        write_matrix(tmp_path / "phi.txt", phi)
        write_matrix(tmp_path / "x.txt", [[0.0], [2.5], [0.0]])
        code, out, _ = run(capsys, "--json", "run", tmp_path / "phi.txt", tmp_path / "x.txt", 1)
        rep = json.loads(out)
        assert code == 0 and rep["support"] == [1]
        assert rep["values"] == [2.5] and rep["residual_norm"] <= 1e-10

    def test_incoherent_instance_with_trace(self, tmp_path, capsys):
        rng = Xorshift64Star(3)
        phi = planted_two_bases(16, rng)
        x = random_sparse_signal(32, 2, rng)
        write_matrix(tmp_path / "phi.txt", phi.phi)
        write_matrix(tmp_path / "x.txt", x.dense()[None, :])  # row layout also accepted
        code, out, _ = run(capsys, "--json", "run", tmp_path / "phi.txt", tmp_path / "x.txt", 2, "--trace")
        lines = out.strip().splitlines()
        assert code == 0 and len(lines) == 3
        trace = [json.loads(l) for l in lines[:2]]
        assert [r["k"] for r in trace] == [1, 2]
        assert trace[1]["residual_norm"] <= trace[0]["residual_norm"]
        assert json.loads(lines[2])["support"] == list(x.support)

    def test_measurements_mode(self, tmp_path, capsys):
        write_matrix(tmp_path / "phi.txt", np.eye(2))
        write_matrix(tmp_path / "y.txt", [[0.0, -1.0]])
        code, out, _ = run(capsys, "run", tmp_path / "phi.txt", tmp_path / "y.txt", 1, "--measurements")
        assert code == 0 and "support = [1]" in out

    def test_dimension_mismatch(self, tmp_path, capsys):
        write_matrix(tmp_path / "phi.txt", np.eye(3))
        write_matrix(tmp_path / "x.txt", [[1.0, 2.0]])
        assert run(capsys, "run", tmp_path / "phi.txt", tmp_path / "x.txt", 1)[0] == 2
        write_matrix(tmp_path / "x.txt", [[1.0, 2.0], [3.0, 4.0]])
        assert run(capsys, "run", tmp_path / "phi.txt", tmp_path / "x.txt", 1)[0] == 2
        write_matrix(tmp_path / "x.txt", [[1.0, 2.0, 3.0]])
        assert run(capsys, "run", tmp_path / "phi.txt", tmp_path / "x.txt", 7)[0] == 2

    def test_rank_deficiency(self, tmp_path, capsys):
        write_matrix(tmp_path / "phi.txt", [[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        write_matrix(tmp_path / "x.txt", [[1.0, 0.0, 0.0]])
        code, _, err = run(capsys, "run", tmp_path / "phi.txt", tmp_path / "x.txt", 2)
        assert code == 4 and "support" in err


class TestRic:
    def test_boundary(self, boundary_file, capsys):
        code, out, _ = run(capsys, "ric", boundary_file, 2, "--json")
        rep = json.loads(out)
        assert code == 0 and rep["delta"] == pytest.approx(1 / 3, abs=1e-12)
        assert rep["delta"] <= rep["coherence_bound"] + 1e-10

    def test_cap(self, tmp_path, capsys):
        write_matrix(tmp_path / "eye.txt", np.eye(30))
        assert run(capsys, "ric", tmp_path / "eye.txt", 10)[0] == 2


class TestCounterexample:
    def test_k1(self, tmp_path, capsys):
        code, out, _ = run(capsys, "counterexample", 1, tmp_path)
        assert code == 0 and "mu = 1.0 " in out
        assert read_matrix(tmp_path / "counterexample_K1.txt").shape == (1, 2)

    def test_k4(self, tmp_path, capsys):
        code, out, _ = run(capsys, "--json", "counterexample", 4, tmp_path / "new")
        rep = json.loads(out)
        assert code == 0 and abs(rep["mu"] - 1 / 7) <= 1e-9 and rep["rank"] == 7
        _, text, _ = run(capsys, "counterexample", 4, tmp_path / "again")
        assert "mu = 0.142857142857 " in text
        assert rep["null_residual"] <= 1e-9 and rep["ambiguity_gap"] <= 1e-9
        assert "x1" in (rep["omp_from_x1"], rep["omp_from_x2"]) or rep["omp_from_x1"] == "neither"
        side = json.loads((tmp_path / "new" / "counterexample_K4.json").read_text())
        assert side["K"] == 4
        phi = read_matrix(tmp_path / "new" / "counterexample_K4.txt")
        assert np.linalg.norm(phi @ (np.array(side["x1"]) - np.array(side["x2"]))) <= 1e-9

    def test_square(self, tmp_path, capsys):
        assert run(capsys, "counterexample", 2, tmp_path, "--square")[0] == 0
        assert read_matrix(tmp_path / "counterexample_K2.txt").shape == (4, 4)

    def test_unwritable(self, tmp_path, capsys):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        assert run(capsys, "counterexample", 2, blocker / "sub")[0] == 2

    def test_bad_k(self, tmp_path, capsys):
        assert run(capsys, "counterexample", 0, tmp_path)[0] == 2

    def test_construction_error(self, tmp_path, capsys, monkeypatch):
        def broken(K, trimmed=True):
            raise ConstructionError("eigensolver returned two zero eigenvalues")
        monkeypatch.setattr(cli, "construct_counterexample", broken)
        assert run(capsys, "counterexample", 2, tmp_path)[0] == 5


def write_config(path, **over):
    cfg = {"m": 8, "n": 16, "k_range": [1, 3], "trials": 10, "seed": 7,
           "ensemble": "gaussian", "output_path": str(path.parent / "out.csv")}
    cfg.update(over)
    path.write_text(json.dumps(cfg))
    return cfg


class TestPhase:
    def test_writes_csv(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "cfg.json")
        assert run(capsys, "phase", tmp_path / "cfg.json")[0] == 0
        lines = open(cfg["output_path"]).read().splitlines()
        assert lines[0] == "K,trials,successes,mean_mu,theorem1_fraction"
        assert [l.split(",")[0] for l in lines[1:]] == ["1", "2", "3"]
        for row in lines[1:]:
            K, trials, succ, mean_mu, frac = row.split(",")
            assert 0 <= int(succ) <= int(trials) == 10
            if float(frac) == 1.0:
                assert succ == trials

    def test_deterministic(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "cfg.json")
        run(capsys, "phase", tmp_path / "cfg.json")
        first = open(cfg["output_path"], "rb").read()
        run(capsys, "phase", tmp_path / "cfg.json")
        assert open(cfg["output_path"], "rb").read() == first
        run(capsys, "phase", tmp_path / "cfg.json", "--seed", 8)
        assert open(cfg["output_path"], "rb").read() != first

    def test_identity_always_succeeds(self, tmp_path, capsys):
        write_config(tmp_path / "cfg.json", m=6, n=6, k_range=[1, 6], ensemble="identity", output_path="-")
        code, out, _ = run(capsys, "phase", tmp_path / "cfg.json")
        assert code == 0
        rows = [r.split(",") for r in out.strip().splitlines()[1:]]
        assert all(r[1] == r[2] and r[3] == "0.0" and r[4] == "1.0" for r in rows)

    @pytest.mark.parametrize("over", [
        {"trials": 0}, {"k_range": [0, 2]}, {"k_range": [1, 9]}, {"k_range": [3, 2]},
        {"ensemble": "bernoulli"}, {"extra": 1}, {"seed": -1}, {"m": "8"},
    ])
    def test_invalid_config(self, tmp_path, capsys, over):
        write_config(tmp_path / "cfg.json", **over)
        assert run(capsys, "phase", tmp_path / "cfg.json")[0] == 2

    def test_missing_field_and_bad_json(self, tmp_path, capsys):
        (tmp_path / "cfg.json").write_text(json.dumps({"m": 4}))
        assert run(capsys, "phase", tmp_path / "cfg.json")[0] == 2
        (tmp_path / "cfg.json").write_text("{not json")
        assert run(capsys, "phase", tmp_path / "cfg.json")[0] == 2


def test_module_entry_point(tmp_path):
    write_matrix(tmp_path / "eye.txt", np.eye(3))
    proc = subprocess.run([sys.executable, "-m", "sparsecert", "coherence", str(tmp_path / "eye.txt")],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "mu = 0" in proc.stdout
