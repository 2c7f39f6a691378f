"""Null calibration of the detection constant beta.

The detection statistic is scale-free under Gaussian noise (the norm
estimate, the noise estimate, and the threshold all scale linearly in the
data), so beta can be calibrated once per configuration by simulating the
null with unit noise and taking the upper-delta quantile of

    T = lambda_hat / (sigma_hat * sqrt(s log(1 + sqrt(p)/s) / N)).

Results are cached in-process keyed by the full configuration.
"""

from __future__ import annotations

import numpy as np

from .model import Dimensions, ModelSpec, synthesize

__all__ = ["calibrate_beta", "clear_cache"]

_CACHE: dict = {}


def clear_cache() -> None:
    _CACHE.clear()


def _null_statistics(
    p: int, N: int, s: int, regime: str, alpha: float, c1: float, trials: int, seed: int
) -> np.ndarray:
    from .highdim import estimate_highdim
    from .lowdim import TuningParams, estimate_lowdim

    spec = ModelSpec(theta=np.zeros(p), sigma=1.0)
    dims = Dimensions(N=N, p=p, s=s)
    root = np.random.SeedSequence(entropy=seed, spawn_key=(0xCA11B,))
    stats = np.empty(trials)
    rate = None
    for i, child in enumerate(root.spawn(trials)):
        sample = synthesize(spec, dims, child)
        if regime == "low":
            est = estimate_lowdim(sample, s, TuningParams(alpha=alpha))
        elif regime == "high":
            est = estimate_highdim(sample, s, alpha=alpha, c1=c1)
        else:
            raise ValueError(f"unknown regime {regime!r}")
        if rate is None:
            n_eff = est.parts * est.n_per_split
            rate = np.sqrt(s * np.log1p(np.sqrt(p) / s) / n_eff)
        stats[i] = est.lambda_hat / (max(est.sigma_hat, np.finfo(float).tiny) * rate)
    return stats


def calibrate_beta(
    p: int,
    N: int,
    s: int,
    delta: float = 0.1,
    regime: str = "low",
    alpha: float = 4.0,
    c1: float = 1.5,
    trials: int = 2000,
    seed: int = 0,
) -> float:
    """Upper-delta null quantile of the scale-free detection statistic.

    `N` is the total number of rows the detector consumes.  When the null
    statistic has an atom at zero heavier than 1 - delta (sparse branches
    often yield an exactly-zero estimate), the quantile lands at 0 and any
    positive beta keeps the level below delta; half the smallest positive
    observation is used, or 1.0 if every trial was zero.
    """
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    key = (p, N, s, round(delta, 12), regime, round(alpha, 12), round(c1, 12), trials, seed)
    if key in _CACHE:
        return _CACHE[key]
    stats = _null_statistics(p, N, s, regime, alpha, c1, trials, seed)
    beta = float(np.quantile(stats, 1.0 - delta, method="higher"))
    if beta <= 0:
        positive = stats[stats > 0]
        beta = float(positive.min() / 2.0) if positive.size else 1.0
    _CACHE[key] = beta
    return beta
