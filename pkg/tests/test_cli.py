import json
import math
import subprocess
import sys

import pytest

from graphentropy.cli import main

C5_GRAPH = {"vertices": ["v1", "v2", "v3", "v4", "v5"],
            "edges": [["v1", "v2"], ["v2", "v3"], ["v3", "v4"], ["v4", "v5"], ["v5", "v1"]]}
C5_SYSTEM = {"universe": [{"id": f"v{i}", "mass": "0.2"} for i in range(1, 6)],
             "sets": [["v1", "v3"], ["v2", "v4"], ["v3", "v5"], ["v4", "v1"], ["v5", "v2"]]}


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, doc in [("c5", C5_GRAPH), ("c5sys", C5_SYSTEM),
                      ("uncovered", {"universe": [{"id": "a", "mass": 0.5}, {"id": "b", "mass": 0.5}],
                                     "sets": [["a"]]}),
                      ("graphon", {"masses": [0.5, 0.5], "support": [[0, 1], [1, 0]]})]:
        paths[name] = tmp_path / f"{name}.json"
        paths[name].write_text(json.dumps(doc))
    return paths


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr()


def test_graph_entropy(capsys, files, tmp_path):
    code, out = run(capsys, "graph-entropy", "--graph", files["c5"], "--tol", "1e-9", "--out-dir", tmp_path / "o")
    assert code == 0
    doc = json.loads(out.out)
    assert doc["value"] == pytest.approx(0.916291, abs=1e-6)
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert manifest["subcommand"] == "graph-entropy" and len(manifest["input_digest"]) == 64
    assert "gap_trace.png" in manifest["outputs"] and (tmp_path / "o" / "gap_trace.png").exists()


def test_entropy_in_bits(capsys, files):
    code, out = run(capsys, "entropy", "--system", files["c5sys"], "--log-base", "bit")
    assert code == 0 and json.loads(out.out)["value"] == pytest.approx(math.log2(2.5), abs=1e-9)


def test_closed_forms(capsys):
    assert json.loads(run(capsys, "closed-form", "--model", "interval", "--c", "0.3")[1].out)["entropy"] \
        == pytest.approx(1.213685, abs=1e-6)
    assert json.loads(run(capsys, "closed-form", "--model", "circle", "--c", "0.25")[1].out)["entropy"] \
        == pytest.approx(math.log(4))
    assert json.loads(run(capsys, "closed-form", "--model", "cycle", "--n", "3")[1].out)["entropy"] \
        == pytest.approx(math.log(7 / 3))
    assert json.loads(run(capsys, "closed-form", "--model", "indep-events", "--m1", "0.9", "--m-inf", "0.5")[1]
                      .out)["entropy"] == pytest.approx(0.325083, abs=1e-6)


def test_frac(capsys, files):
    code, out = run(capsys, "frac", "--system", files["c5sys"])
    doc = json.loads(out.out)
    assert code == 0 and doc["chi_frac"] == 2.5 and doc["omega_frac"] == 2.5
    assert all(v == pytest.approx(0.2) for v in doc["pi_star"].values())


def test_infinite_entropy_exit_zero(capsys, files):
    code, out = run(capsys, "entropy", "--system", files["uncovered"])
    assert code == 0 and '"entropy": "infinity"' in out.out


def test_step_graphon(capsys, files, tmp_path):
    code, out = run(capsys, "step-graphon", "--graphon", files["graphon"], "--out-dir", tmp_path / "g")
    assert code == 0 and json.loads(out.out)["value"] == pytest.approx(math.log(2))
    assert (tmp_path / "g" / "support.png").exists()


def test_malformed_json(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"universe": [')
    code, out = run(capsys, "entropy", "--system", bad)
    assert code == 2 and "line 1 column" in out.err


def test_invalid_model(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"universe": [{"id": "a", "mass": 0.4}], "sets": [["a"]]}))
    code, out = run(capsys, "entropy", "--system", bad)
    assert code == 2 and "$.universe" in out.err


def test_precondition_is_exit_3(capsys):
    code, _ = run(capsys, "closed-form", "--model", "cycle", "--n", "2", "--masses", "0.5,0.2,0.1,0.1,0.1")
    assert code == 3


def test_size_error_is_exit_3(capsys, files):
    code, _ = run(capsys, "exact-cover", "--graph", files["c5"], "--ell", "9", "--no-fallback")
    assert code == 3


def test_nonconvergence_is_exit_4(capsys, tmp_path):
    n = 9
    graph = {"vertices": [str(i) for i in range(n)],
             "edges": [[str(i), str((i + 1) % n)] for i in range(n)],
             "pi": {str(i): (i + 1) / 45 for i in range(n)}}
    path = tmp_path / "c9.json"
    path.write_text(json.dumps(graph))
    code, out = run(capsys, "graph-entropy", "--graph", path, "--tol", "1e-15", "--max-iters", "1")
    assert code == 4 and json.loads(out.out)["converged"] is False


def test_exact_cover_csv(capsys, files, tmp_path):
    code, _ = run(capsys, "exact-cover", "--graph", files["c5"], "--ell", "1,2,3", "--out-dir", tmp_path / "e")
    assert code == 0
    lines = (tmp_path / "e" / "cover.csv").read_text().splitlines()
    assert lines[0] == "ell,M,covered_mass,rate,std_error,method,success"
    assert lines[1].startswith("1,2,0.8,0.69314718056,")
    assert (tmp_path / "e" / "rates.png").exists()


def test_simulate_cover_reproducible(capsys, files, tmp_path):
    outputs = []
    for name in ("a", "b"):
        code, _ = run(capsys, "simulate-cover", "--graph", files["c5"], "--ell", "2,8", "--trials", "500",
                      "--seed", "4", "--out-dir", tmp_path / name, "--no-figures")
        assert code == 0
        outputs.append([(tmp_path / name / f).read_bytes() for f in ("cover.csv", "result.json", "manifest.json")])
    assert outputs[0] == outputs[1]


def test_simulate_mixture(capsys, tmp_path):
    code, out = run(capsys, "simulate-cover", "--mixture", "10,0.05", "--ell", "16", "--trials", "1000",
                    "--out-dir", tmp_path / "m")
    assert code == 0
    rows = json.loads(out.out)["rows"]
    assert rows[0]["rate"] >= math.log(2) - 0.05
    assert (tmp_path / "m" / "rates.png").exists()


def test_bad_mixture(capsys):
    code, _ = run(capsys, "simulate-cover", "--mixture", "ten", "--ell", "2")
    assert code == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "graphentropy", "closed-form", "--model", "circle", "--c", "0.5"],
                         capture_output=True, text=True)
    assert res.returncode == 2 and "c must lie" in res.stderr
