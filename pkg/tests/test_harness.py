"""Tests for the Monte Carlo experiment engine and its reporting."""

import json

import numpy as np
import pytest

from signalnorm import ExperimentConfig, fit_rate, report, run_trials, summarize, theoretical_rate
from signalnorm.harness import _trial_seed, eval_rule, read_records, run_single_trial


def tiny_config(**overrides):
    base = dict(
        seed=1234,
        task="estimate-norm",
        regime="low",
        replications=2,
        n=[16, 24, 32],
        p_rule="n/4",
        s_rule="floor(sqrt(p))",
        sigma=[1.0],
        magnitude=[0.0],
    )
    base.update(overrides)
    return ExperimentConfig.from_dict(base)


class TestEvalRule:
    def test_basic_rules(self):
        assert eval_rule("p = n/2", n=64) == 32
        assert eval_rule("floor(sqrt(p))", p=10) == 3
        assert eval_rule("min(n, 2*p)", n=7, p=2) == 4

    def test_unknown_variable(self):
        with pytest.raises(ValueError, match="unknown variable"):
            eval_rule("n + q", n=1)

    def test_nasty_input_rejected(self):
        with pytest.raises(ValueError):
            eval_rule("__import__('os').system('true')")
        with pytest.raises(ValueError):
            eval_rule("(lambda: 1)()")

    def test_non_integer_rule_rejected_in_grid(self):
        config = tiny_config(n=[15], p_rule="n/2")
        with pytest.raises(ValueError, match="non-integer"):
            config.grid_points()


class TestConfig:
    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError, match="unknown config"):
            ExperimentConfig.from_dict({"seed": 1, "replicas": 5})

    def test_seed_required(self):
        with pytest.raises(ValueError, match="seed"):
            ExperimentConfig.from_dict({"task": "detect"})

    def test_task_regime_validation(self):
        with pytest.raises(ValueError):
            tiny_config(task="classify")
        with pytest.raises(ValueError):
            tiny_config(regime="medium")

    def test_grid_cardinality(self):
        config = tiny_config(sigma=[0.5, 1.0], magnitude=[0.0, 1.0])
        assert len(config.grid_points()) == 3 * 2 * 2


class TestRunTrials:
    def test_deterministic(self):
        config = tiny_config()
        a = run_trials(config)
        b = run_trials(config)
        assert a == b

    def test_record_count(self):
        records = run_trials(tiny_config())
        assert len(records) == 3 * 2

    def test_order_independence(self):
        """Reversed execution order yields the identical multiset of records."""
        config = tiny_config()
        forward = run_trials(config)
        backward = []
        for point in reversed(config.grid_points()):
            for rep in reversed(range(config.replications)):
                seed = _trial_seed(config.seed, point["index"], rep)
                backward.append(run_single_trial(config, point, seed))
        key = lambda r: (r.config_id, r.seed)
        assert sorted(forward, key=key) == sorted(backward, key=key)

    def test_error_trials_tagged_not_fatal(self):
        """A grid that breaks the estimator is recorded, counted, excluded."""
        config = tiny_config(p_rule="n*2", n=[8])  # p > n: no least squares fit
        records = run_trials(config)
        assert len(records) == 2
        assert all(r.error is not None and r.q_hat is None for r in records)
        summary = summarize(records)
        assert summary["points"][0]["errors"] == 2
        assert "mse_q" not in summary["points"][0]

    def test_error_fields_recomputable(self):
        for rec in run_trials(tiny_config(magnitude=[1.0])):
            assert rec.error is None
            assert abs(rec.err_q - (rec.q_hat - rec.true_q)) <= 1e-12
            assert abs(rec.err_lambda - (rec.lambda_hat - rec.true_lambda)) <= 1e-12

    def test_detect_task_records_decisions(self):
        config = tiny_config(task="detect", beta=2.0, n=[16], replications=3)
        records = run_trials(config)
        assert all(r.decision in (0, 1) for r in records)


class TestFitRate:
    def test_two_point_slope(self):
        fit = fit_rate([(100, 10), (400, 5)])
        assert fit.slope == pytest.approx(np.log(0.5) / np.log(4.0), rel=1e-12)

    def test_exact_power_law(self):
        xs = np.array([1.0, 2.0, 5.0, 11.0, 31.0])
        fit = fit_rate(list(zip(xs, 3 * xs**2)))
        assert fit.slope == pytest.approx(2.0, rel=1e-10)
        assert fit.intercept == pytest.approx(np.log(3.0), rel=1e-10)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)

    def test_constant_series(self):
        fit = fit_rate([(1, 7.0), (2, 7.0), (3, 7.0)])
        assert fit.slope == pytest.approx(0.0, abs=1e-12)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError, match="2 points"):
            fit_rate([(1, 1)])
        with pytest.raises(ValueError, match="positive"):
            fit_rate([(1, 1), (2, -1)])


class TestTheoreticalRate:
    def test_norm_rate_and_fourth_root_equivalence(self):
        value = theoretical_rate(100, 1000, 10, 1.0, 0.0, "phi")
        assert value == pytest.approx(np.sqrt(10 * np.log(2.0) / 1000), rel=1e-12)
        # at s = sqrt(p) the rate equals p^(1/4)/sqrt(N) times sqrt(log 2)
        assert value / (100**0.25 / np.sqrt(1000)) == pytest.approx(np.sqrt(np.log(2.0)))

    def test_norm_rate_sparse(self):
        assert theoretical_rate(100, 1000, 2, 1.0, 0.0, "phi") == pytest.approx(
            np.sqrt(2 * np.log(6.0) / 1000), rel=1e-12
        )

    def test_q_rate_zero_kappa(self):
        assert theoretical_rate(100, 1000, 5, 1.0, 0.0, "q") == 0.0

    def test_unknown_selector(self):
        with pytest.raises(ValueError):
            theoretical_rate(10, 10, 1, 1.0, 1.0, "zeta")


class TestReport:
    def test_empty_records_valid_csv(self, tmp_path):
        paths = report([], out_dir=tmp_path)
        lines = paths["records"].read_text().splitlines()
        assert len(lines) == 1
        assert lines[0].startswith("config_id,seed,n,p,s,sigma,true_q,q_hat,lambda_hat,decision")

    def test_row_count_and_round_trip(self, tmp_path):
        records = run_trials(tiny_config(magnitude=[0.5]))
        paths = report(records, out_dir=tmp_path)
        lines = paths["records"].read_text().splitlines()
        assert len(lines) == 1 + len(records)
        back = read_records(paths["records"])
        for orig, rt in zip(records, back):
            assert rt.config_id == orig.config_id and rt.seed == orig.seed
            assert rt.q_hat == orig.q_hat and rt.err_q == orig.err_q

    def test_summary_matches_recomputation_from_csv(self, tmp_path):
        records = run_trials(tiny_config(magnitude=[0.5], replications=4))
        paths = report(records, out_dir=tmp_path)
        with open(paths["summary"]) as fh:
            summary = json.load(fh)
        back = read_records(paths["records"])
        by_id = {}
        for rec in back:
            by_id.setdefault(rec.config_id, []).append(rec)
        for point in summary["points"]:
            group = [r for r in by_id[point["config_id"]] if r.error is None]
            mse_q = np.mean([r.err_q**2 for r in group])
            mse_lambda = np.mean([r.err_lambda**2 for r in group])
            assert abs(point["mse_q"] - mse_q) <= 1e-10 * max(1.0, abs(mse_q))
            assert abs(point["mse_lambda"] - mse_lambda) <= 1e-10

    def test_rate_fits_embedded(self, tmp_path):
        # dense branch (s = p) keeps the null estimates almost surely nonzero
        records = run_trials(tiny_config(s_rule="p"))
        pts = {}
        for rec in records:
            pts.setdefault(rec.n, []).append(rec.lambda_hat**2)
        fit = fit_rate([(n, np.mean(v)) for n, v in pts.items()])
        paths = report(records, fits={"null_energy": fit}, out_dir=tmp_path)
        with open(paths["summary"]) as fh:
            summary = json.load(fh)
        assert summary["rate_fits"]["null_energy"]["slope"] == pytest.approx(fit.slope)


def test_summary_ratio_positive_on_seeded_run():
    records = run_trials(tiny_config(magnitude=[1.0], replications=5))
    summary = summarize(records)
    for point in summary["points"]:
        ratio = point["ratio_lambda_mse_to_phi_sq"]
        assert ratio is not None and np.isfinite(ratio) and ratio > 0
