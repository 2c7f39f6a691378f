"""Monte Carlo experiment engine: trial execution, aggregation, rate fitting.

A configuration describes a grid over the per-split size n (with the ambient
dimension and sparsity given as small expressions of n, so they can grow
together), noise levels, and signal magnitudes.  Every trial derives its own
seed from the configuration seed and its grid/replication index, so results
do not depend on execution order.  Trials that raise are recorded with an
error tag and excluded from aggregates, never silently dropped.
"""

from __future__ import annotations

import ast
import hashlib
import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .highdim import estimate_highdim
from .lowdim import TuningParams, detection_threshold, estimate_lowdim
from .model import Dimensions, ModelSpec, RegressionSample, sample_sparse_theta, synthesize

__all__ = [
    "ExperimentConfig",
    "TrialRecord",
    "RateFit",
    "eval_rule",
    "run_trials",
    "run_single_trial",
    "fit_rate",
    "theoretical_rate",
    "summarize",
    "report",
    "read_records",
    "CSV_COLUMNS",
]

CSV_COLUMNS = [
    "config_id",
    "seed",
    "n",
    "p",
    "s",
    "sigma",
    "true_q",
    "q_hat",
    "lambda_hat",
    "decision",
    "err_q",
    "err_lambda",
    "error",
]

_RULE_FUNCS = {
    "sqrt": math.sqrt,
    "floor": math.floor,
    "ceil": math.ceil,
    "log": math.log,
    "min": min,
    "max": max,
}

_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
    ast.FloorDiv: lambda a, b: a // b,
    ast.Mod: lambda a, b: a % b,
    ast.Pow: lambda a, b: a**b,
}


def eval_rule(expr: str, **variables) -> float:
    """Evaluate a small arithmetic rule such as ``"p = n/2"`` or
    ``"floor(sqrt(p))"`` over the supplied variables.

    Only numbers, the named variables, +-*/ // % **, and
    sqrt/floor/ceil/log/min/max are allowed; anything else raises.
    """
    body = expr.split("=", 1)[1] if "=" in expr else expr
    try:
        tree = ast.parse(body.strip(), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse rule {expr!r}: {exc}") from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return node.value
        if isinstance(node, ast.Name):
            if node.id in variables:
                return variables[node.id]
            raise ValueError(f"unknown variable {node.id!r} in rule {expr!r}")
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            value = ev(node.operand)
            return -value if isinstance(node.op, ast.USub) else value
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Name)
            and node.func.id in _RULE_FUNCS
            and not node.keywords
        ):
            return _RULE_FUNCS[node.func.id](*[ev(a) for a in node.args])
        raise ValueError(f"unsupported construct in rule {expr!r}")

    return ev(tree)


def _rule_int(expr: str, low: int, high: int | None = None, **variables) -> int:
    value = eval_rule(expr, **variables)
    if abs(value - round(value)) > 1e-9:
        raise ValueError(f"rule {expr!r} evaluated to non-integer {value}")
    value = int(round(value))
    if value < low or (high is not None and value > high):
        raise ValueError(f"rule {expr!r} gave {value}, outside [{low}, {high}]")
    return value


@dataclass
class ExperimentConfig:
    """Grid and tuning for one Monte Carlo experiment."""

    seed: int
    task: str = "estimate-norm"  # "estimate-norm" | "estimate-q" | "detect"
    regime: str = "auto"  # "low" | "high" | "auto"
    replications: int = 1
    n: list = field(default_factory=lambda: [64])
    p_rule: str = "n/2"
    s_rule: str = "floor(sqrt(p))"
    sigma: list = field(default_factory=lambda: [1.0])
    magnitude: list = field(default_factory=lambda: [0.0])
    alpha: float = 4.0
    beta: float | None = None
    c1: float = 1.5
    delta: float = 0.1
    calib_trials: int = 2000
    design: str = "standard-normal"
    noise: str = "standard-normal"
    pattern: str = "equal"

    def __post_init__(self):
        if self.task not in ("estimate-norm", "estimate-q", "detect"):
            raise ValueError(f"unknown task {self.task!r}")
        if self.regime not in ("low", "high", "auto"):
            raise ValueError(f"unknown regime {self.regime!r}")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if not self.n:
            raise ValueError("n grid is empty")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "seed" not in data:
            raise ValueError("config requires a seed")
        return cls(**data)

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def fingerprint(self) -> str:
        payload = {f.name: getattr(self, f.name) for f in fields(self)}
        blob = json.dumps(payload, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:12]

    def grid_points(self) -> list[dict]:
        """Expand the grid: one point per (n, sigma, magnitude) combination."""
        fp = self.fingerprint()
        points = []
        idx = 0
        for n in self.n:
            p = _rule_int(self.p_rule, 2, None, n=n)
            s = _rule_int(self.s_rule, 1, p, n=n, p=p)
            for sigma in self.sigma:
                for magnitude in self.magnitude:
                    points.append(
                        {
                            "config_id": f"{fp}:{idx}",
                            "index": idx,
                            "n": int(n),
                            "p": p,
                            "s": s,
                            "sigma": float(sigma),
                            "magnitude": float(magnitude),
                        }
                    )
                    idx += 1
        return points


@dataclass
class TrialRecord:
    """One Monte Carlo replication, with errors recomputable from its fields."""

    config_id: str
    seed: int
    n: int
    p: int
    s: int
    sigma: float
    true_q: float
    true_lambda: float
    q_hat: float | None = None
    lambda_hat: float | None = None
    decision: int | None = None
    err_q: float | None = None
    err_lambda: float | None = None
    error: str | None = None


@dataclass
class RateFit:
    """Least squares fit of log y on log x."""

    slope: float
    intercept: float
    r_squared: float
    points: list


def _pick_regime(regime: str, n: int, p: int) -> str:
    if regime != "auto":
        return regime
    return "low" if p <= n // 2 else "high"


def _trial_seed(config_seed: int, point_index: int, rep: int) -> int:
    ss = np.random.SeedSequence(entropy=config_seed, spawn_key=(point_index, rep))
    return int(ss.generate_state(1, np.uint64)[0])


def run_single_trial(config: ExperimentConfig, point: dict, trial_seed: int) -> TrialRecord:
    """Execute one replication at one grid point; exceptions become error tags."""
    n, p, s = point["n"], point["p"], point["s"]
    sigma, magnitude = point["sigma"], point["magnitude"]
    ss = np.random.SeedSequence(trial_seed)
    ss_theta, ss_sample = ss.spawn(2)
    theta = sample_sparse_theta(
        p, s, magnitude, pattern=config.pattern, rng=np.random.default_rng(ss_theta)
    )
    true_q = float(theta @ theta)
    record = TrialRecord(
        config_id=point["config_id"],
        seed=trial_seed,
        n=n,
        p=p,
        s=s,
        sigma=sigma,
        true_q=true_q,
        true_lambda=float(np.sqrt(true_q)),
    )
    regime = _pick_regime(config.regime, n, p)
    parts = 2 if regime == "low" else (3 if s * s <= p else 2)
    try:
        spec = ModelSpec(theta=theta, sigma=sigma, design=config.design, noise=config.noise)
        dims = Dimensions(N=parts * n, p=p, s=s)
        sample = synthesize(spec, dims, ss_sample)
        if regime == "low":
            est = estimate_lowdim(sample, s, TuningParams(alpha=config.alpha))
        else:
            est = estimate_highdim(sample, s, alpha=config.alpha, c1=config.c1)
        record.q_hat = est.q_hat
        record.lambda_hat = est.lambda_hat
        record.err_q = est.q_hat - record.true_q
        record.err_lambda = est.lambda_hat - record.true_lambda
        if config.task == "detect":
            beta = config.beta
            if beta is None:
                from .calibration import calibrate_beta

                beta = calibrate_beta(
                    p=p, N=est.parts * est.n_per_split, s=s, delta=config.delta,
                    regime=regime, alpha=config.alpha, c1=config.c1,
                    trials=config.calib_trials, seed=config.seed,
                )
            threshold = detection_threshold(
                beta, est.sigma_hat, s, p, est.parts * est.n_per_split
            )
            record.decision = int(est.lambda_hat >= threshold)
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        record.error = f"{type(exc).__name__}: {exc}"
    return record


def run_trials(config: ExperimentConfig) -> list[TrialRecord]:
    """All replications over the whole grid, deterministically seeded.

    Trial seeds depend only on (config seed, grid index, replication index),
    so any execution order yields the same multiset of records.
    """
    records = []
    for point in config.grid_points():
        for rep in range(config.replications):
            seed = _trial_seed(config.seed, point["index"], rep)
            records.append(run_single_trial(config, point, seed))
    return records


def fit_rate(points) -> RateFit:
    """Ordinary least squares of log y on log x over (x, y) pairs."""
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 2:
        raise ValueError(f"need at least 2 points, got {len(pts)}")
    if any(x <= 0 or y <= 0 for x, y in pts):
        raise ValueError("all coordinates must be positive for a log-log fit")
    logx = np.log([x for x, _ in pts])
    logy = np.log([y for _, y in pts])
    slope, intercept = np.polyfit(logx, logy, 1)
    resid = logy - (slope * logx + intercept)
    ss_tot = float(((logy - logy.mean()) ** 2).sum())
    ss_res = float((resid**2).sum())
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return RateFit(
        slope=float(slope),
        intercept=float(intercept),
        r_squared=r_squared,
        points=list(zip(logx.tolist(), logy.tolist())),
    )


def theoretical_rate(p: int, N: int, s: int, sigma: float, kappa: float, which: str) -> float:
    """Reference scaling for the estimation and detection problems, constants 1.

    "phi": sigma sqrt(s log(1 + sqrt(p)/s) / N)   (norm estimation)
    "q":   min(sigma^2 s log(1 + sqrt(p)/s) / N + sigma kappa / sqrt(N), kappa^2)
    "rho": sqrt(s log(1 + sqrt(p)/s) / N)          (detection separation)
    """
    base = s * np.log1p(np.sqrt(p) / s) / N
    if which == "phi":
        return float(sigma * np.sqrt(base))
    if which == "q":
        return float(min(sigma**2 * base + sigma * kappa / np.sqrt(N), kappa**2))
    if which == "rho":
        return float(np.sqrt(base))
    raise ValueError(f"unknown rate selector {which!r}")


def _clean(values) -> np.ndarray:
    return np.asarray([v for v in values if v is not None], dtype=float)


def summarize(records: list[TrialRecord], delta: float = 0.1, kappa: float | None = None) -> dict:
    """Per-grid-point aggregates: mean/median errors, upper-delta quantiles of
    absolute errors, rejection rates, and empirical/theoretical risk ratios.

    Trials with an error tag are counted and excluded from the statistics.
    """
    by_point: dict = {}
    for rec in records:
        by_point.setdefault(rec.config_id, []).append(rec)

    def _grid_index(config_id: str):
        tail = config_id.rsplit(":", 1)[-1]
        return (0, int(tail)) if tail.isdigit() else (1, config_id)

    points = []
    for config_id in sorted(by_point, key=_grid_index):
        group = by_point[config_id]
        ok = [r for r in group if r.error is None]
        rec0 = group[0]
        entry = {
            "config_id": config_id,
            "n": rec0.n,
            "p": rec0.p,
            "s": rec0.s,
            "sigma": rec0.sigma,
            "trials": len(group),
            "errors": len(group) - len(ok),
        }
        if ok:
            err_q = _clean([r.err_q for r in ok])
            err_l = _clean([r.err_lambda for r in ok])
            entry.update(
                {
                    "mean_q_hat": float(np.mean(_clean([r.q_hat for r in ok]))),
                    "mean_lambda_hat": float(np.mean(_clean([r.lambda_hat for r in ok]))),
                    "mse_q": float(np.mean(err_q**2)),
                    "mse_lambda": float(np.mean(err_l**2)),
                    "median_abs_err_q": float(np.median(np.abs(err_q))),
                    "median_abs_err_lambda": float(np.median(np.abs(err_l))),
                    "abs_err_q_upper_quantile": float(np.quantile(np.abs(err_q), 1 - delta)),
                    "abs_err_lambda_upper_quantile": float(np.quantile(np.abs(err_l), 1 - delta)),
                }
            )
            k = kappa if kappa is not None else max(rec0.true_lambda, 0.0)
            n_eff = 2 * rec0.n  # reference scaling uses the 2-split budget
            phi = theoretical_rate(rec0.p, n_eff, rec0.s, rec0.sigma, k, "phi")
            entry["theoretical_phi"] = phi
            entry["ratio_lambda_mse_to_phi_sq"] = (
                entry["mse_lambda"] / phi**2 if phi > 0 else None
            )
            q_rate = theoretical_rate(rec0.p, n_eff, rec0.s, rec0.sigma, k, "q")
            entry["theoretical_q"] = q_rate
            entry["ratio_q_mse_to_rate_sq"] = entry["mse_q"] / q_rate**2 if q_rate > 0 else None
            decisions = [r.decision for r in ok if r.decision is not None]
            if decisions:
                entry["rejection_rate"] = float(np.mean(decisions))
        points.append(entry)
    return {"delta": delta, "points": points}


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def report(
    records: list[TrialRecord],
    fits: dict | None = None,
    out_dir: str | Path = ".",
    delta: float = 0.1,
) -> dict:
    """Write ``records.csv`` (fixed column order) and ``summary.json``.

    Returns the paths written.  `fits` maps a label to a :class:`RateFit`
    included in the summary.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "records.csv"
    with open(csv_path, "w", newline="") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for rec in records:
            row = [_format_cell(getattr(rec, col)) for col in CSV_COLUMNS]
            fh.write(",".join(row) + "\n")
    summary = summarize(records, delta=delta)
    if fits:
        summary["rate_fits"] = {
            name: {
                "slope": f.slope,
                "intercept": f.intercept,
                "r_squared": f.r_squared,
                "points": f.points,
            }
            for name, f in fits.items()
        }
    json_path = out_dir / "summary.json"
    with open(json_path, "w") as fh:
        json.dump(summary, fh, indent=2)
    return {"records": csv_path, "summary": json_path}


def read_records(path: str | Path) -> list[TrialRecord]:
    """Read back a ``records.csv`` written by :func:`report`."""
    import csv as _csv

    records = []
    with open(path, newline="") as fh:
        reader = _csv.DictReader(fh)
        missing = [c for c in CSV_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"{path}: missing columns {missing}")
        for row in reader:
            records.append(
                TrialRecord(
                    config_id=row["config_id"],
                    seed=int(row["seed"]),
                    n=int(row["n"]),
                    p=int(row["p"]),
                    s=int(row["s"]),
                    sigma=float(row["sigma"]),
                    true_q=float(row["true_q"]),
                    true_lambda=float(np.sqrt(float(row["true_q"]))),
                    q_hat=float(row["q_hat"]) if row["q_hat"] else None,
                    lambda_hat=float(row["lambda_hat"]) if row["lambda_hat"] else None,
                    decision=int(row["decision"]) if row["decision"] else None,
                    err_q=float(row["err_q"]) if row["err_q"] else None,
                    err_lambda=float(row["err_lambda"]) if row["err_lambda"] else None,
                    error=row["error"] or None,
                )
            )
    return records
