import json
import subprocess
import sys
from pathlib import Path

import pytest
import yaml

from pentaspec import __version__
from pentaspec.cli import main, run


def job(tmp_path, cfg, name="job.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(cfg))
    return path


def report(out):
    return json.loads((Path(out) / "report.json").read_text())


FREE_MODEL = {"kind": "constant", "profile": [0, 0, 1, 1]}
SINGLE = {"kind": "finite-support", "profile": [0, 0, 1, 1], "overrides": {"a": [[1, 3.0]]}}


def test_essential(tmp_path):
    cfg = job(tmp_path, {"model": {"kind": "constant", "profile": [0, 5, 1, 1]}, "task": "essential-spectrum"})
    assert run(cfg, tmp_path / "out") == 0
    rep = report(tmp_path / "out")
    assert rep["result"]["intervals"] == [[-2.0, 2.0], [3.0, 7.0]]
    assert rep["version"] == __version__ and len(rep["config_hash"]) == 64
    assert (tmp_path / "out" / "plot.dat").exists() and (tmp_path / "out" / "plot.gp").exists()


def test_eigenvalues(tmp_path):
    cfg = job(tmp_path, {"model": SINGLE, "task": "eigenvalues"})
    assert run(cfg, tmp_path / "out") == 0
    recs = report(tmp_path / "out")["result"]["records"]
    assert len(recs) == 1 and abs(recs[0]["re"] - 10 / 3) < 1e-8 and recs[0]["adjoint_matched"]
    assert (tmp_path / "out" / "eigenvalues.csv").read_text().startswith("re,im,chain")


def test_zero_s1_is_model_error(tmp_path):
    cfg = job(tmp_path, {"model": {"kind": "constant", "profile": [0, 0, 0, 1]}, "task": "essential-spectrum"})
    assert run(cfg, tmp_path / "out") == 2
    err = report(tmp_path / "out")["error"]
    assert "s1" in err["message"] and err["type"] == "DomainError"


def test_limit_mismatch_is_model_error(tmp_path):
    bands = {b: {"odd_limit": 0.0 if b == "a" else 1.0, "even_limit": 0.0 if b == "a" else 1.0}
             for b in "abc"}
    bands["c"]["odd_limit"] = 2.0
    cfg = job(tmp_path, {"model": dict(kind="constant", **bands), "task": "essential-spectrum"})
    assert run(cfg, tmp_path / "out") == 2
    assert report(tmp_path / "out")["error"]["type"] == "ModelInconsistencyError"


@pytest.mark.parametrize("cfg", [
    {"model": FREE_MODEL, "task": "bogus"},
    {"task": "essential-spectrum"},
    {"model": FREE_MODEL, "task": "portrait", "params": {"eps": -1}},
    {"model": FREE_MODEL, "task": "norm-bounds", "p": 1.0},
    {"model": FREE_MODEL, "task": "truncate", "params": {"nope": 1}},
])
def test_config_errors(tmp_path, cfg):
    assert run(job(tmp_path, cfg), tmp_path / "out") == 1
    assert report(tmp_path / "out")["status"] == "error"


def test_unparseable(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("model: [unclosed\n")
    assert run(bad, tmp_path / "out") == 1


def test_fine_spectrum_free(tmp_path):
    assert run(job(tmp_path, {"model": FREE_MODEL, "task": "fine-spectrum"}), tmp_path / "out") == 0
    res = report(tmp_path / "out")["result"]
    for name in ("point", "residual", "compression", "discrete"):
        assert res[name]["intervals"] == [] and res[name]["points"] == []
    for name in ("spectrum", "continuous", "essential", "approximate", "defect"):
        assert res[name]["intervals"] == [[-2.0, 2.0]]
    assert all(res["identities"].values())


def test_fine_spectrum_exponential(tmp_path):
    model = {"kind": "exponential", "profile": [0, 0, 1, 1], "amplitudes": [3.0, 0.0, 0.0], "rate": 0.5}
    assert run(job(tmp_path, {"model": model, "task": "fine-spectrum"}), tmp_path / "out") == 0
    res = report(tmp_path / "out")["result"]
    found = res["point"]["points"]
    assert found and res["discrete"]["points"] == found and res["compression"]["points"] == found
    assert res["spectrum"]["points"] == found and res["approximate"]["points"] == found
    assert res["continuous"]["points"] == [] and res["residual"]["points"] == []
    assert res["essential"]["intervals"] == [[-2.0, 2.0]]


def test_fine_spectrum_gate(tmp_path):
    model = {"kind": "power-law", "profile": [0, 0, 1, 1], "amplitudes": [1.0, 0.0, 0.0]}
    assert run(job(tmp_path, {"model": model, "task": "fine-spectrum"}), tmp_path / "out") == 3
    err = report(tmp_path / "out")["error"]
    assert err["type"] == "HypothesisError" and err["verdict"]["status"] == "fails"


def test_reproducible(tmp_path):
    cfg = job(tmp_path, {"model": SINGLE, "task": "norm-bounds", "params": {"samples": 20}})
    run(cfg, tmp_path / "a", seed=4)
    run(cfg, tmp_path / "b", seed=4)
    a, b = report(tmp_path / "a"), report(tmp_path / "b")
    a.pop("timestamp"), b.pop("timestamp")
    assert a == b
    strip = lambda p: [l for l in (p / "report.json").read_text().splitlines() if '"timestamp"' not in l]
    assert strip(tmp_path / "a") == strip(tmp_path / "b")


def test_norm_bounds_witness(tmp_path):
    cfg = job(tmp_path, {"model": {"kind": "constant", "profile": [1, -2, 0.5, 1.5]}, "p": 3,
                         "task": "norm-bounds", "params": {"samples": 50}})
    assert run(cfg, tmp_path / "out") == 0
    res = report(tmp_path / "out")["result"]
    assert abs(res["witness_ratio"] - res["lower"]) < 1e-12 and res["empirical_sup"] <= res["upper"]


def test_conditions_and_truncate(tmp_path):
    model = {"kind": "power-law", "profile": [0, 0, 1, 1], "amplitudes": [1.0, 0.0, 0.0]}
    cfg = job(tmp_path, {"model": model, "task": "check-conditions", "params": {"lambdas": [0.0, 2.0]}})
    assert run(cfg, tmp_path / "c", fmt="csv") == 0
    assert (tmp_path / "c" / "partial_sums.csv").exists()
    cfg = job(tmp_path, {"model": FREE_MODEL, "task": "truncate", "params": {"N": 6}}, "t.yaml")
    assert run(cfg, tmp_path / "t") == 0
    ev = sorted(z[0] for z in report(tmp_path / "t")["result"]["eigenvalues"])
    assert ev[0] == pytest.approx(-2 ** 0.5) and ev[-1] == pytest.approx(2 ** 0.5)


def test_portrait(tmp_path):
    cfg = job(tmp_path, {"model": FREE_MODEL, "task": "portrait", "params": {"schedule": [64, 256]}})
    assert run(cfg, tmp_path / "out") == 0
    rows = report(tmp_path / "out")["result"]["rows"]
    assert [r["N"] for r in rows] == [64, 256] and rows[1]["fill"] < rows[0]["fill"]


def test_entry_point(tmp_path):
    cfg = job(tmp_path, {"model": FREE_MODEL, "task": "essential-spectrum"})
    assert main(["run", str(cfg), "--out-dir", str(tmp_path / "m"), "--format", "json"]) == 0
    proc = subprocess.run([sys.executable, "-m", "pentaspec.cli", "run", str(cfg), "--out-dir",
                           str(tmp_path / "s")], capture_output=True, text=True)
    assert proc.returncode == 0 and (tmp_path / "s" / "report.json").exists()
