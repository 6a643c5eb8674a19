import json
import subprocess
import sys

import pytest

from bvlab.cli import EXIT_IDENTITY, EXIT_INPUT, EXIT_OK, main

FAST_VERIFY = {"schema_version": 1, "james_cases": 300, "bridge_cases": 24, "added_error_cases": 2,
               "mc_samples": 20_000, "ensemble_cases": 10, "geman_cases": 50}
SCENARIO = {"schema_version": 1, "slope_s": 1.5, "t1": -0.6, "t2": 0.6, "eta": 0.05,
            "biases": [0.02, -0.01], "variances": [0.001, 0.002], "cov": 0.0003}


def write(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def tree(d):
    return {p.relative_to(d).as_posix(): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}


@pytest.fixture
def verify_cfg(tmp_path):
    return write(tmp_path / "verify.json", FAST_VERIFY)


# -- verify -----------------------------------------------------------------


def test_verify_passes_and_is_deterministic(tmp_path, verify_cfg):
    assert main(["verify", "--config", verify_cfg, "--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(["verify", "--config", verify_cfg, "--out", str(tmp_path / "b")]) == EXIT_OK
    a, b = tree(tmp_path / "a"), tree(tmp_path / "b")
    assert a == b and "verify.json" in a and "verify_bridge_cases.csv" in a


def test_verify_fault_injection_exits_1(tmp_path, verify_cfg):
    argv = ["verify", "--config", verify_cfg, "--suites", "bridge", "--out", str(tmp_path),
            "--inject-median-shift", "0.02"]
    assert main(argv) == EXIT_IDENTITY


def test_verify_routes_subset(tmp_path, verify_cfg):
    assert main(["verify", "--config", verify_cfg, "--suites", "added-error", "--routes", "moments",
                 "--out", str(tmp_path), "--format", "json"]) == EXIT_OK
    doc = json.loads((tmp_path / "verify.json").read_text())
    assert doc["config"]["routes"] == ["moments"]
    assert not list(tmp_path.glob("*.csv"))


@pytest.mark.parametrize("doc, match", [
    ({"schema_version": 1, "bridge_casses": 3}, "unknown config keys"),
    ({"bridge_cases": 3}, "schema_version"),
    ({"schema_version": 1, "command": "case1"}, "not 'verify'"),
])
def test_config_errors_exit_2(tmp_path, capsys, doc, match):
    assert main(["verify", "--config", write(tmp_path / "c.json", doc), "--out", str(tmp_path)]) == EXIT_INPUT
    assert match in capsys.readouterr().err


def test_bad_json_and_missing_config(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["verify", "--config", str(bad)]) == EXIT_INPUT
    assert "invalid JSON" in capsys.readouterr().err
    assert main(["verify", "--config", str(tmp_path / "none.json")]) == EXIT_INPUT


def test_unknown_suite_and_bad_flags():
    assert main(["verify", "--suites", "nope"]) == EXIT_INPUT
    assert main(["verify", "--format", "xml"]) == EXIT_INPUT
    assert main([]) == EXIT_INPUT


# -- simulate ---------------------------------------------------------------


def test_simulate(tmp_path):
    path = write(tmp_path / "s.json", SCENARIO)
    argv = ["simulate", path, "--samples", "50000", "--out"]
    assert main(argv + [str(tmp_path / "a")]) == EXIT_OK
    assert main(argv + [str(tmp_path / "b")]) == EXIT_OK
    assert tree(tmp_path / "a") == tree(tmp_path / "b")
    doc = json.loads((tmp_path / "a" / "simulate.json").read_text())
    assert doc["ok"] and abs(doc["bridge"]["checksum_residual"]) <= 1e-10


def test_simulate_bad_scenario(tmp_path):
    path = write(tmp_path / "s.json", {**SCENARIO, "slope_s": 3.0})
    assert main(["simulate", path, "--out", str(tmp_path)]) == EXIT_INPUT
    path = write(tmp_path / "s2.json", SCENARIO)
    assert main(["simulate", path, "--routes", "guess", "--out", str(tmp_path)]) == EXIT_INPUT


# -- decompose --------------------------------------------------------------


def test_decompose_fixture_against_hand_values(tmp_path, fixtures):
    assert main(["decompose", str(fixtures / "predictions.csv"), "--out", str(tmp_path)]) == EXIT_OK
    doc = json.loads((tmp_path / "decomposition.json").read_text())
    pats = {p["pattern_id"]: p for p in doc["patterns"]}
    # p0 votes 0,0,1,0 on label 0; p1 votes 2,2,1,0 on label 1; p2 all correct
    assert pats["p0"]["se"] == 0 and pats["p0"]["ve"] == pytest.approx(0.25)
    assert pats["p1"]["se"] == 1 and pats["p1"]["ve"] == pytest.approx(-0.25)
    assert pats["p1"]["var_yhat"] == pytest.approx(0.5)
    assert pats["p2"]["expected_loss"] == 0
    agg = doc["aggregate"]
    assert agg["expected_loss"] == pytest.approx(1 / 3) and agg["se"] == pytest.approx(1 / 3)
    assert agg["ve"] == pytest.approx(0, abs=1e-15)


def test_decompose_single_run_has_no_variance(tmp_path):
    log = tmp_path / "one.csv"
    log.write_text("run_id,pattern_id,predicted_class,true_class\nr,a,1,0\nr,b,0,0\nr,c,2,2\n")
    assert main(["decompose", str(log), "--out", str(tmp_path), "--format", "json"]) == EXIT_OK
    doc = json.loads((tmp_path / "decomposition.json").read_text())
    assert all(p["var_yhat"] == 0 for p in doc["patterns"])


@pytest.mark.parametrize("text, match", [
    ("", "empty"),
    ("run_id,pattern_id,predicted_class,true_class\n", "no rows"),
    ("run_id,pattern_id,predicted_class,true_class\nr,a,x,0\n", ":2:"),
    ("run,pattern,pred,true\nr,a,0,0\n", ":1:"),
])
def test_decompose_errors(tmp_path, capsys, text, match):
    log = tmp_path / "log.csv"
    log.write_text(text)
    assert main(["decompose", str(log), "--out", str(tmp_path)]) == EXIT_INPUT
    assert match in capsys.readouterr().err


# -- correlate --------------------------------------------------------------


def test_correlate(tmp_path):
    (tmp_path / "e0.csv").write_text("1,-1,1,-1\n-1,1,-1,1\n")
    (tmp_path / "e1.csv").write_text("1,2,3,4\n2,4,6,8\n")
    args = ["correlate", str(tmp_path / "e0.csv"), str(tmp_path / "e1.csv"), "--out", str(tmp_path)]
    assert main(args + ["--priors", "0.5,0.5"]) == EXIT_OK
    doc = json.loads((tmp_path / "correlation.json").read_text())
    assert doc["class_correlations"] == [pytest.approx(-1), pytest.approx(1)]
    assert doc["overall"] == pytest.approx(0, abs=1e-12)
    assert main(args + ["--priors", "0.5,0.6"]) == EXIT_INPUT


# -- case studies (small) ---------------------------------------------------


def test_case1_small_outputs_and_determinism(tmp_path, surrogate_csv):
    cfg = write(tmp_path / "c1.json", {"schema_version": 1, "groups": 3, "group_size": 2,
                                        "mlp": {"hidden_nodes": 2, "epochs": 1}})
    argv = ["case1", "--config", cfg, "--dataset", str(surrogate_csv), "--out"]
    assert main(argv + [str(tmp_path / "a")]) == EXIT_OK
    assert main(argv + [str(tmp_path / "b")]) == EXIT_OK
    a = tree(tmp_path / "a")
    assert a == tree(tmp_path / "b")
    for stem in ("case1_tg_variance_vs_ve", "case1_error_vs_tg_variance", "case1_C_vs_gain"):
        assert f"{stem}.svg" in a and f"{stem}.csv" in a
        assert a[f"{stem}.csv"].count(b"\n") == 4
    summary = json.loads(a["case1_summary.json"])
    assert summary["reference_correlations"]["tg_variance~ve"] == 0.749
    assert summary["config"]["c_mode"] == "boundary"
    assert "boundary" in summary["estimators"]["C"]


def test_case1_single_classifier_groups_is_input_error(capsys):
    assert main(["case1", "--dataset", "synthetic:0", "--group-size", "1"]) == EXIT_INPUT
    assert "undefined" in capsys.readouterr().err


def test_case_missing_dataset(tmp_path):
    assert main(["case1", "--out", str(tmp_path)]) == EXIT_INPUT
    assert main(["case2", "--dataset", str(tmp_path / "none.csv"), "--out", str(tmp_path)]) == EXIT_INPUT


def test_case2_single_point(tmp_path):
    argv = ["case2", "--dataset", "synthetic:0", "--ladder", "2/1", "--classifiers", "3", "--out", str(tmp_path)]
    assert main(argv) == EXIT_OK
    rows = (tmp_path / "case2_sweep.csv").read_text().splitlines()
    assert len(rows) == 2 and rows[1].startswith("2,1,")
    assert main(argv[:-2] + ["--ladder", "2x1", "--out", str(tmp_path)]) == EXIT_INPUT


def test_console_script_entry_point(tmp_path, verify_cfg):
    proc = subprocess.run(
        [sys.executable, "-m", "bvlab.cli", "verify", "--config", verify_cfg, "--suites", "james",
         "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0 and "PASS" in proc.stdout
