import json

import numpy as np
import pytest

from adfest.cli import main
from adfest.dataio import case_study_path, read_paired
from adfest.exceptions import DataError


def run(*args):
    return main([str(a) for a in args])


def snapshot(directory):
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir())}


def test_simulate_writes_sample_and_is_deterministic(tmp_path):
    runs = []
    for _ in range(2):
        assert run("simulate", "--copula", '{"family":"gaussian","rho":0.6}', "--n", 500,
                   "--seed", 3, "--out", tmp_path) == 0
        runs.append(snapshot(tmp_path))
    lines = runs[0]["sample.csv"].decode().splitlines()
    assert lines[0] == "x,y" and len(lines) == 501
    assert runs[0] == runs[1]


def test_bad_family_is_usage_error(tmp_path):
    assert run("simulate", "--copula", '{"family":"frank","rho":0.6}', "--out", tmp_path) == 2


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"copula": 6, "n": 300, "seed": 1}))
    assert run("simulate", "--config", cfg, "--n", 200, "--out", tmp_path / "o") == 0
    sidecar = json.loads((tmp_path / "o" / "run_simulate.json").read_text())
    assert sidecar["config"]["n"] == 200 and sidecar["config"]["seed"] == 1
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run("simulate", "--config", cfg, "--out", tmp_path / "o") == 2


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("ADFEST_OUTPUT_DIR", str(tmp_path / "env"))
    assert run("simulate", "--copula", 2, "--n", 100) == 0
    assert (tmp_path / "env" / "sample.csv").is_file()


@pytest.fixture
def exp_sample(tmp_path):
    assert run("simulate", "--copula", 6, "--n", 3000, "--seed", 2, "--out", tmp_path / "sim") == 0
    return tmp_path / "sim" / "sample.csv"


def test_estimate_exponential_input(tmp_path, exp_sample):
    out = tmp_path / "est"
    assert run("estimate", "--input", exp_sample, "--estimators", "hill,cl", "--out", out) == 0
    assert not (out / "margins.json").exists()
    curve = json.loads((out / "adf_cl.json").read_text())
    assert curve["processed"] and curve["params"]["coef"]["k"] == 7
    assert run("estimate", "--input", exp_sample, "--estimators", "st", "--out", out) == 2


def test_evaluate_rows_and_n_rep_guard(tmp_path):
    out = tmp_path / "ev"
    assert run("evaluate", "--estimators", "hill,cl2", "--copulas", "2,6", "--n", 2000,
               "--n-rep", 2, "--n-rays", 101, "--out", out) == 0
    lines = (out / "table.csv").read_text().splitlines()
    assert len(lines) == 5 and lines[0].startswith("copula,estimator,rmise_x100")
    assert run("evaluate", "--n-rep", 1, "--out", out) == 2


def test_diagnose_and_missing_curve(tmp_path, exp_sample):
    est = tmp_path / "est"
    assert run("estimate", "--input", exp_sample, "--estimators", "hill", "--out", est) == 0
    out = tmp_path / "diag"
    assert run("diagnose", "--input", exp_sample, "--curve", est / "adf_hill.json",
               "--seeds", "5,6,7", "--n-boot", 200, "--out", out) == 0
    for s in (5, 6, 7):
        assert (out / f"qq_global_seed{s}.csv").is_file()
    assert (out / "qq_local_w0.500.csv").read_text().startswith("model_q,empirical_q,lo95,hi95")
    assert run("diagnose", "--input", exp_sample, "--curve", tmp_path / "none.json",
               "--out", out) == 3


def test_return_curve_exponential_and_errors(tmp_path, exp_sample):
    est = tmp_path / "est"
    run("estimate", "--input", exp_sample, "--estimators", "cl", "--out", est)
    out = tmp_path / "rc"
    assert run("return-curve", "--input", exp_sample, "--curve", est / "adf_cl.json",
               "--p", 0.01, "--n-boot", 200, "--out", out) == 0
    sidecar = json.loads((out / "run_return-curve.json").read_text())
    assert sidecar["summary"]["curve_tag"] == "exponential"
    assert (out / "return_curve_diagnostic.csv").read_text().startswith(
        "angle_index,median,lo95,hi95,target_p")
    assert run("return-curve", "--input", exp_sample, "--curve", est / "adf_cl.json",
               "--p", 0.5, "--out", out) == 3


def test_case_study_pipeline_is_reproducible(tmp_path):
    runs = []
    common = ["--input", "@case-study", "--columns", "lune,wenning", "--out", tmp_path]
    for _ in range(2):
        assert run("estimate", "--estimators", "cl2", *common) == 0
        assert run("return-curve", "--curve", tmp_path / "adf_cl2.json", "--period-years", 5,
                   "--n-boot", 200, "--seed", 1, *common) == 0
        runs.append(snapshot(tmp_path))
    assert "return_curve_original.csv" in runs[0] and "run_estimate.json" in runs[0]
    assert runs[0] == runs[1]


def test_reader_join_and_errors(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    a.write_text("date,flow\n2000-01-01,1.0\n2000-01-02,2.0\n2000-01-03,\n2000-01-04,4.0\n")
    b.write_text("date,flow\n2000-01-02,5.0\n2000-01-03,6.0\n2000-01-04,7.0\n2000-01-05,8.0\n")
    data = read_paired([a, b])
    assert np.array_equal(data.values, [[2.0, 5.0], [4.0, 7.0]])
    assert data.n_years == 1
    a.write_text("date,flow\n2000-01-01,1.0\n2000-01-02,abc\n2000-01-03,x\n")
    with pytest.raises(DataError, match="rows 3, 4"):
        read_paired([a, b])
    a.write_text("date,flow\n01/02/2000,1.0\n")
    with pytest.raises(DataError, match="ISO-8601"):
        read_paired([a, b])


def test_shipped_data_layout():
    data = read_paired(case_study_path(), ["lune", "wenning"])
    assert data.n_years == 28
    assert {d.month for d in data.dates} == {10, 11, 12, 1, 2, 3}
    assert not np.isnan(data.values).any()
