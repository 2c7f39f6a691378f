"""End-to-end tests of the command line interface and its exit codes."""

import json

import numpy as np
import pytest

from signalnorm.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out.strip()
    return code, (json.loads(out) if out else None)


@pytest.fixture
def sample_csv(tmp_path, capsys):
    path = tmp_path / "sample.csv"
    code = main([
        "gen", "--N", "40", "--p", "4", "--s", "2", "--sigma", "1.0",
        "--magnitude", "3.0", "--seed", "7", "--out", str(path),
    ])
    capsys.readouterr()
    assert code == EXIT_OK
    return path


def test_gen_writes_csv_and_sidecar(tmp_path, capsys):
    path = tmp_path / "s.csv"
    code, out = run_cli(capsys, "gen", "--N", "10", "--p", "3", "--s", "1",
                        "--magnitude", "1.0", "--seed", "3", "--out", str(path))
    assert code == EXIT_OK
    assert path.exists() and path.with_suffix(".csv.truth.json").exists()
    header = path.read_text().splitlines()[0]
    assert header == "y,x1,x2,x3"
    truth = json.loads(path.with_suffix(".csv.truth.json").read_text())
    assert truth["seed"] == 3 and len(truth["theta"]) == 3


def test_estimate_low(sample_csv, capsys):
    code, out = run_cli(capsys, "estimate", "--regime", "low", "--s", "2",
                        "--input", str(sample_csv))
    assert code == EXIT_OK
    assert out["regime"] == "low" and out["parts"] == 2
    assert np.isfinite(out["q_hat"]) and out["lambda_hat"] >= 0


def test_estimate_high_and_prelim_zero(sample_csv, capsys):
    code, out = run_cli(capsys, "estimate", "--regime", "high", "--s", "2",
                        "--input", str(sample_csv))
    assert code == EXIT_OK and out["regime"] == "high"
    code, out = run_cli(capsys, "estimate", "--regime", "high", "--s", "2",
                        "--prelim", "zero", "--input", str(sample_csv))
    assert code == EXIT_OK and out["parts"] == 1 and out["sigma_hat"] is None


def test_detect_with_explicit_beta(sample_csv, capsys):
    code, out = run_cli(capsys, "detect", "--regime", "low", "--s", "2",
                        "--alpha", "1.0", "--beta", "2.0", "--input", str(sample_csv))
    assert code == EXIT_OK
    assert out["decision"] in (0, 1)
    assert out["threshold"] > 0
    assert (out["lambda_hat"] >= out["threshold"]) == bool(out["decision"])


def test_detect_with_calibration(sample_csv, capsys):
    code, out = run_cli(capsys, "detect", "--regime", "low", "--s", "2", "--alpha", "1.0",
                        "--delta", "0.2", "--calib-trials", "60", "--input", str(sample_csv))
    assert code == EXIT_OK and out["decision"] in (0, 1)


def test_slope_fit_output_schema(sample_csv, capsys):
    code, out = run_cli(capsys, "slope-fit", "--c1", "1.5", "--input", str(sample_csv))
    assert code == EXIT_OK
    assert set(out) == {"theta_hat", "sigma_hat", "objective", "iterations", "converged"}
    assert len(out["theta_hat"]) == 4


def test_simulate_and_rates(tmp_path, capsys):
    config = {
        "seed": 9,
        "task": "estimate-norm",
        "regime": "low",
        "replications": 3,
        "n": [16, 32],
        "p_rule": "n/4",
        "s_rule": "p",  # dense branch: null estimates are a.s. nonzero
        "sigma": [1.0],
        "magnitude": [0.0],
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(config))
    code, out = run_cli(capsys, "simulate", "--config", str(cfg_path),
                        "--out-dir", str(tmp_path / "run"))
    assert code == EXIT_OK
    records_path = tmp_path / "run" / "records.csv"
    assert records_path.exists() and (tmp_path / "run" / "summary.json").exists()
    assert len(records_path.read_text().splitlines()) == 1 + 6

    code, out = run_cli(capsys, "rates", "--from", str(records_path), "--metric", "mse_lambda")
    assert code == EXIT_OK
    assert np.isfinite(out["slope"]) and len(out["points"]) == 2


def test_lower_bound_matches_library(capsys):
    import signalnorm as sn

    code, out = run_cli(capsys, "lower-bound", "--p", "100", "--N", "400", "--s", "5",
                        "--delta", "0.5", "--kappa", "1.0")
    assert code == EXIT_OK
    bundle = sn.minimax_testing_lower_radius(100, 400, 5, 0.5)
    assert out["A"] == pytest.approx(bundle.A)
    assert out["r"] == pytest.approx(bundle.r)
    assert out["rho"] == pytest.approx(bundle.rho)
    assert out["q_bar"] == pytest.approx(sn.q_lower_bound(100, 400, 5, 1.0, 1.0))
    assert out["bayes_risk_bound"] >= 0.5 - 1e-9


def test_exit_code_config_errors(tmp_path, capsys):
    # missing input file
    code = main(["estimate", "--regime", "low", "--s", "1", "--input", str(tmp_path / "nope.csv")])
    capsys.readouterr()
    assert code == EXIT_CONFIG
    # malformed config JSON
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code = main(["simulate", "--config", str(bad)])
    capsys.readouterr()
    assert code == EXIT_CONFIG
    # unknown config key
    bad2 = tmp_path / "bad2.json"
    bad2.write_text(json.dumps({"seed": 1, "bogus": True}))
    code = main(["simulate", "--config", str(bad2)])
    capsys.readouterr()
    assert code == EXIT_CONFIG
    # argparse usage error
    code = main(["no-such-command"])
    capsys.readouterr()
    assert code == EXIT_CONFIG


def test_exit_code_numeric_failure(tmp_path, capsys):
    """A collinear design makes the least squares step fail with exit code 3."""
    rng = np.random.default_rng(0)
    col = rng.standard_normal(12)
    path = tmp_path / "singular.csv"
    lines = ["y,x1,x2"]
    for i in range(12):
        lines.append(f"{rng.standard_normal()},{col[i]},{col[i]}")
    path.write_text("\n".join(lines) + "\n")
    code = main(["estimate", "--regime", "low", "--s", "1", "--input", str(path)])
    capsys.readouterr()
    assert code == EXIT_NUMERIC
