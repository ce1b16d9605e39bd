import json

import numpy as np
import pytest

from powerctl.cli import main

TWO_LINK = {
    "schema_version": 1,
    "name": "two-link-symmetric",
    "links": {"gains": [[1.0, 0.5], [0.5, 1.0]]},
    "noise": 0.1,
    "limits": {"p_min": 0.0, "p_max": 1.0, "gamma_target": 1.0},
    "utility": {"family": "log"},
}

MC_DOC = {
    "schema_version": 1,
    "name": "single-link-two-carriers",
    "links": {"gains": [[1.0]]},
    "noise": 0.1,
    "limits": {"p_min": 0.0, "p_max": 1.0},
    "utility": {"family": "rate"},
    "carriers": {
        "gains": [[[1.0]], [[1.0]]],
        "noise": [[0.1], [0.4]],
        "p_budget": 1.0,
        "utility": {"family": "rate"},
    },
    "solver": {"allow_nonconcave": True},
}


@pytest.fixture
def scenario_file(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(TWO_LINK), encoding="utf-8")
    return path


def read_report(out_dir):
    return json.loads((out_dir / "report.json").read_text(encoding="utf-8"))


def test_check_feas_feasible(scenario_file, tmp_path, capsys):
    out = tmp_path / "run"
    code = main(["check-feas", "--scenario", str(scenario_file), "--out", str(out)])
    assert code == 0
    rep = read_report(out)
    assert rep["results"]["rho"] == pytest.approx(0.5, abs=1e-9)
    np.testing.assert_allclose(rep["results"]["p_star"], [0.2, 0.2], atol=1e-9)
    assert "rho" in capsys.readouterr().out


def test_check_feas_infeasible_exit_code(scenario_file, tmp_path):
    out = tmp_path / "run"
    code = main(["check-feas", "--scenario", str(scenario_file),
                 "--out", str(out), "--gamma", "2.5"])
    assert code == 3
    assert read_report(out)["results"]["status"] == "InfeasibleSpectral"


def test_malformed_scenario_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"schema_version": 1, "links": {}}), encoding="utf-8")
    assert main(["check-feas", "--scenario", str(bad), "--out", str(tmp_path)]) == 2
    assert "invalid scenario" in capsys.readouterr().err


def test_missing_file_exit_code(tmp_path):
    assert main(["check-feas", "--scenario", str(tmp_path / "nope.json"),
                 "--out", str(tmp_path)]) == 2


def test_fixed_point_artifacts(scenario_file, tmp_path):
    out = tmp_path / "run"
    code = main(["fixed-point", "--scenario", str(scenario_file), "--out", str(out)])
    assert code == 0
    rep = read_report(out)
    np.testing.assert_allclose(rep["results"]["p_bar"], [0.2, 0.2], atol=1e-8)
    assert (out / "trajectory.csv").exists()
    assert (out / "convergence.png").exists()
    header = (out / "trajectory.csv").read_text().splitlines()[0]
    assert header == "iter,p_1,p_2,residual"


def test_fixed_point_async(scenario_file, tmp_path):
    out = tmp_path / "run"
    code = main(["fixed-point", "--scenario", str(scenario_file), "--out", str(out),
                 "--async-staleness", "3", "--update-prob", "0.7", "--seed", "5"])
    assert code == 0
    np.testing.assert_allclose(read_report(out)["results"]["p_bar"],
                               [0.2, 0.2], atol=1e-7)


def test_solve_g2off(scenario_file, tmp_path):
    out = tmp_path / "run"
    code = main(["solve", "--scenario", str(scenario_file), "--out", str(out)])
    assert code == 0
    rep = read_report(out)
    assert rep["results"]["converged"] is True
    np.testing.assert_allclose(rep["results"]["powers"], [1.0, 1.0], rtol=1e-9)
    assert (out / "objective.png").exists()
    assert (out / "trajectory.csv").exists()


def test_solve_non_convergent_exit_code(scenario_file, tmp_path):
    out = tmp_path / "run"
    code = main(["solve", "--scenario", str(scenario_file), "--out", str(out),
                 "--algo", "g2too", "--max-iter", "3"])
    assert code == 4


def test_solve_g2too_matches_g2off(scenario_file, tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    assert main(["solve", "--scenario", str(scenario_file), "--out", str(out1)]) == 0
    assert main(["solve", "--scenario", str(scenario_file), "--out", str(out2),
                 "--algo", "g2too", "--seed", "3", "--async-staleness", "2",
                 "--update-prob", "0.8"]) == 0
    p1 = np.array(read_report(out1)["results"]["powers"])
    p2 = np.array(read_report(out2)["results"]["powers"])
    np.testing.assert_allclose(p2, p1, rtol=1e-4)


def test_solve_mc_command(tmp_path):
    path = tmp_path / "mc.json"
    path.write_text(json.dumps(MC_DOC), encoding="utf-8")
    out = tmp_path / "run"
    code = main(["solve-mc", "--scenario", str(path), "--out", str(out)])
    assert code == 0
    rep = read_report(out)
    np.testing.assert_allclose(rep["results"]["powers"], [[0.65, 0.35]], atol=1e-5)
    assert (out / "powers.csv").exists()
    assert (out / "powers.png").exists()


def test_sweep_threshold(scenario_file, tmp_path):
    out = tmp_path / "run"
    code = main(["sweep", "--scenario", str(scenario_file), "--out", str(out),
                 "--gamma", "0.1:2.5:0.1"])
    assert code == 0
    rows = read_report(out)["results"]["rows"]
    by_gamma = {round(r["gamma"], 3): r["feasible"] for r in rows}
    assert by_gamma[1.9] is True
    assert by_gamma[2.0] is False  # threshold at the uniform scaling limit 2
    assert (out / "sweep.csv").exists()
    assert (out / "sweep.png").exists()


def test_sweep_budget_multicarrier(tmp_path):
    path = tmp_path / "mc.json"
    path.write_text(json.dumps(MC_DOC), encoding="utf-8")
    out = tmp_path / "run"
    code = main(["sweep", "--scenario", str(path), "--out", str(out),
                 "--budget", "0.5:1.5:0.5"])
    assert code == 0
    rows = read_report(out)["results"]["rows"]
    assert [r["budget"] for r in rows] == [0.5, 1.0, 1.5]
    objectives = [r["objective"] for r in rows]
    assert objectives == sorted(objectives)  # more budget never hurts
    assert (out / "sweep.csv").exists()


def test_certify_if(scenario_file, tmp_path):
    out = tmp_path / "run"
    code = main(["certify-if", "--scenario", str(scenario_file), "--out", str(out),
                 "--pairs", "200", "--seed", "1"])
    assert code == 0
    rep = read_report(out)
    assert rep["results"]["target_sinr"]["passed"] is True
    assert rep["results"]["power_capped"]["passed"] is True


def test_oracle_matches_solve(scenario_file, tmp_path):
    out1 = tmp_path / "solve"
    out2 = tmp_path / "oracle"
    assert main(["solve", "--scenario", str(scenario_file), "--out", str(out1)]) == 0
    assert main(["oracle", "--scenario", str(scenario_file), "--out", str(out2)]) == 0
    obj1 = read_report(out1)["results"]["objective"]
    obj2 = read_report(out2)["results"]["objective"]
    assert obj1 == pytest.approx(obj2, abs=1e-6)


def test_oracle_refuses_large_networks(tmp_path):
    doc = dict(TWO_LINK)
    doc["links"] = {"gains": np.eye(4).tolist()}
    for i in range(4):
        doc["links"]["gains"][i][i] = 1.0
    path = tmp_path / "four.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    assert main(["oracle", "--scenario", str(path), "--out", str(tmp_path)]) == 2


def test_plot_artifacts(scenario_file, tmp_path):
    out = tmp_path / "plots"
    code = main(["plot", "--scenario", str(scenario_file), "--out", str(out)])
    assert code == 0
    for name in ("convergence.csv", "convergence.png", "sweep.csv", "sweep.png"):
        assert (out / name).exists(), name


def test_generate_deterministic(tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    args = ["generate", "--num-links", "4", "--seed", "9"]
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    bytes1 = (out1 / "scenario.json").read_bytes()
    bytes2 = (out2 / "scenario.json").read_bytes()
    assert bytes1 == bytes2


def test_generated_scenario_is_usable(tmp_path):
    gen_out = tmp_path / "gen"
    assert main(["generate", "--num-links", "3", "--seed", "4", "--noise", "1e-9",
                 "--out", str(gen_out)]) == 0
    run_out = tmp_path / "run"
    code = main(["solve", "--scenario", str(gen_out / "scenario.json"),
                 "--out", str(run_out)])
    assert code == 0


def test_report_reproducibility(scenario_file, tmp_path):
    outs = [tmp_path / "r1", tmp_path / "r2"]
    for out in outs:
        assert main(["solve", "--scenario", str(scenario_file), "--out", str(out),
                     "--algo", "g2too", "--seed", "42", "--async-staleness", "3"]) == 0
    r1, r2 = (read_report(out) for out in outs)
    assert r1["results"] == r2["results"]
    assert r1["input_digest"] == r2["input_digest"]


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "powerctl" in capsys.readouterr().out
