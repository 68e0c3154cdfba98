import json
from pathlib import Path

import numpy as np
import pytest

from stackgame import cli
from stackgame.errors import ConfigError


def write_config(tmp_path: Path, extra: dict | None = None) -> Path:
    cfg = {
        "eta_grid": {"values": [2.0, 2.5]},
        "alpha_grid": {"start": 0.001, "stop": 1.0, "num": 200},
        "report_alphas": {"values": [0.4, 0.9]},
        "simulation": {"n_nodes": [2], "trials": 5000, "seed": 9},
        "envelope": {"grid_size": 512},
        "oracle": {"grid_size": 256},
    }
    cfg.update(extra or {})
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


def run(args, tmp_path, name="out", config=None):
    out = tmp_path / name
    argv = list(args) + ["--output", str(out)]
    if config is not None:
        argv += ["--config", str(config)]
    code = cli.main(argv)
    return code, out


def test_defaults_parse():
    cfg = cli.parse_config(None)
    assert cfg.noise.kind == "uniform" and cfg.noise.delta == 1.0
    assert cfg.eta_grid[0] == 2.0 and cfg.eta_grid[-1] == 8.0
    assert cfg.eta_grid.size == 601
    assert cfg.alpha_grid.size == 1000
    assert len(cfg.config_hash) == 64


def test_grid_spec_forms():
    np.testing.assert_allclose(cli._resolve_grid({"values": [1, 2, 3]}, "/x"), [1, 2, 3])
    np.testing.assert_allclose(cli._resolve_grid({"start": 0, "stop": 1, "step": 0.5}, "/x"),
                               [0, 0.5, 1.0])
    np.testing.assert_allclose(cli._resolve_grid({"start": 0, "stop": 1, "num": 3}, "/x"),
                               [0, 0.5, 1.0])
    with pytest.raises(ConfigError):
        cli._resolve_grid({"values": [2.0, 1.0]}, "/x")
    with pytest.raises(ConfigError):
        cli._resolve_grid({"start": 0.0}, "/x")


def test_config_error_paths(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"eta_grid": {"values": [1.5]}}))
    with pytest.raises(ConfigError, match="/eta_grid"):
        cli.parse_config(bad)
    bad.write_text(json.dumps({"data": {"m": 1.0}}))
    with pytest.raises(ConfigError, match="/data/m"):
        cli.parse_config(bad)
    bad.write_text(json.dumps({"unknown_key": 1}))
    with pytest.raises(ConfigError, match="unknown_key"):
        cli.parse_config(bad)
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="not valid JSON"):
        cli.parse_config(bad)


def test_incomplete_utility_spec_names_required_params(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(
        {"utility": {"adversary": {"family": "weighted_sum", "params": {}}}}))
    with pytest.raises(ConfigError, match="a > 0 and b > 0"):
        cli.parse_config(bad)
    bad.write_text(json.dumps({"utility": {"dc": {"family": "nope"}}}))
    with pytest.raises(ConfigError, match="linear_penalty"):
        cli.parse_config(bad)


def test_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"eta_grid": {"values": [1.0]}}))
    code = cli.main(["solve", "--config", str(bad), "--output", str(tmp_path / "o")])
    assert code == 2
    err = capsys.readouterr().err
    payload = json.loads(err)
    assert payload["error"]["type"] == "ConfigError"
    with pytest.raises(SystemExit) as exc:
        cli.main(["not-a-command"])
    assert exc.value.code == 2


def test_validate_noise_artifact(tmp_path):
    code, out = run(["validate-noise"], tmp_path, config=write_config(tmp_path))
    assert code == 0
    report = json.loads((out / "noise_validation.json").read_text())
    assert report["passed"] is True
    assert (out / "resolved_config.json").exists()


def test_solve_artifacts(tmp_path):
    code, out = run(["solve"], tmp_path, config=write_config(tmp_path))
    assert code == 0
    eq = json.loads((out / "equilibrium.json").read_text())
    assert eq["eta_star"] in (2.0, 2.5)
    assert len(eq["per_eta"]) == 2
    assert "config_hash" in eq and "seed" in eq
    lines = (out / "eta_utility.csv").read_text().strip().splitlines()
    assert lines[0].startswith("eta,") and len(lines) == 3


def test_tradeoff_artifacts(tmp_path):
    code, out = run(["tradeoff", "--eta", "2.0", "--alphas", "0.3,0.8"],
                    tmp_path, config=write_config(tmp_path))
    assert code == 0
    rows = (out / "tradeoff.csv").read_text().strip().splitlines()
    assert rows[0] == "alpha,c_formula,c_oracle,abs_diff"
    assert len(rows) == 3
    summary = json.loads((out / "tradeoff_summary.json").read_text())
    assert summary["max_abs_diff"] <= 5e-3
    level = (out / "level_curve.csv").read_text().splitlines()
    assert level[0] == "q,h,h_star,is_touch"


def test_adversary_and_simulate_roundtrip(tmp_path):
    config = write_config(tmp_path)
    code, out = run(["adversary", "--eta", "2.0", "--alpha", "0.9"],
                    tmp_path, config=config)
    assert code == 0
    adv = json.loads((out / "adversary.json").read_text())
    assert abs(adv["achieved_pa"] - 0.9) < 1e-8
    assert len(adv["atoms"]) == 4

    code2, out2 = run(["simulate", "--adversary", str(out / "adversary.json")],
                      tmp_path, name="sim", config=config)
    assert code2 == 0
    sim = json.loads((out2 / "simulation.json").read_text())
    res = sim["results"][0]
    assert abs(res["pa_hat"] - 0.9) <= 4.0 * res["pa_stderr"]
    csv_lines = (out2 / "simulations.csv").read_text().strip().splitlines()
    assert len(csv_lines) == 2  # header + one N

    # append semantics on rerun
    code3, _ = run(["simulate", "--adversary", str(out / "adversary.json")],
                   tmp_path, name="sim", config=config)
    assert code3 == 0
    csv_lines = (out2 / "simulations.csv").read_text().strip().splitlines()
    assert len(csv_lines) == 3


def test_verify_command(tmp_path):
    config = write_config(tmp_path)
    code, out = run(["verify", "--realizations", "5000", "--candidates", "4",
                     "--trials", "4000"], tmp_path, config=config)
    assert code == 0
    rep = json.loads((out / "verify_report.json").read_text())
    assert rep["scenario_suite"]["passed"] is True
    assert "dominance" in rep


def test_sweep_byte_identical(tmp_path):
    config = write_config(tmp_path)
    code, out = run(["sweep"], tmp_path, config=config)
    assert code == 0
    names = ["resolved_config.json", "equilibrium.json", "eta_utility.csv",
             "level_curve.csv", "tradeoff.csv", "tradeoff_summary.json",
             "adversary.json", "sweep_simulations.csv", "sweep_report.json"]
    first = {n: (out / n).read_bytes() for n in names}
    code2, _ = run(["sweep"], tmp_path, config=config)
    assert code2 == 0
    for n in names:
        assert (out / n).read_bytes() == first[n], n


def test_output_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path / "envout"))
    code = cli.main(["validate-noise", "--config", str(write_config(tmp_path))])
    assert code == 0
    assert (tmp_path / "envout" / "noise_validation.json").exists()
