"""Closed-form detection and estimation limits for the standard Gaussian model.

These quantities certify how small a signal can be before no test or
estimator can succeed: a least-favorable prior puts mass tau/sqrt(s) on s
uniformly chosen coordinates while the null inflates its noise to match
second moments; the resulting testing risk is controlled through the
cross moment of two Gaussian likelihood ratios, whose prior average reduces
to the moment generating function of the support-overlap count (a
hypergeometric variable).  All formulas are evaluated exactly, in log space
where counts get large.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln, logsumexp

__all__ = [
    "PriorSpec",
    "RadiusBundle",
    "tau_from_rho",
    "sample_prior_theta",
    "chi2_cross",
    "hypergeometric_mgf_bound",
    "bayes_testing_risk_bound",
    "minimax_testing_lower_radius",
    "q_lower_bound",
]


@dataclass(frozen=True)
class PriorSpec:
    """Least-favorable prior: s nonzero coordinates, each equal to tau/sqrt(s)."""

    p: int
    s: int
    tau: float

    def __post_init__(self):
        if not 1 <= self.s <= self.p:
            raise ValueError(f"s must satisfy 1 <= s <= p, got s={self.s}, p={self.p}")
        if self.tau < 0:
            raise ValueError(f"tau must be >= 0, got {self.tau}")


class RadiusBundle(NamedTuple):
    """User-facing radius rho, reduction radius r, and the constant A."""

    rho: float
    r: float
    A: float


def tau_from_rho(rho: float) -> float:
    """Signal norm tau = rho / sqrt(1 + rho^2) of the calibrated two-point pair.

    The companion null-matching noise level is sqrt(1 - tau^2).
    """
    if rho < 0:
        raise ValueError(f"rho must be >= 0, got {rho}")
    return float(rho / np.sqrt(1.0 + rho**2))


def sample_prior_theta(spec: PriorSpec, rng: np.random.Generator | None = None) -> np.ndarray:
    """Draw from the prior: support uniform over size-s subsets, values tau/sqrt(s)."""
    rng = np.random.default_rng() if rng is None else rng
    theta = np.zeros(spec.p)
    support = rng.choice(spec.p, size=spec.s, replace=False)
    theta[support] = spec.tau / np.sqrt(spec.s)
    return theta


def chi2_cross(theta: np.ndarray, theta_prime: np.ndarray, N: int) -> float:
    """Cross moment of two Gaussian likelihood ratios under the inflated null:

        (1 - <theta, theta'>)^{-N},

    valid for i.i.d. standard normal designs when both vectors share the
    same norm (checked to 1e-8) and their inner product is below 1.
    """
    theta = np.asarray(theta, dtype=float)
    theta_prime = np.asarray(theta_prime, dtype=float)
    norm_a = np.linalg.norm(theta)
    norm_b = np.linalg.norm(theta_prime)
    if abs(norm_a - norm_b) > 1e-8 * max(1.0, norm_a, norm_b):
        raise ValueError(f"norms must match: {norm_a} vs {norm_b}")
    ip = float(theta @ theta_prime)
    if ip >= 1.0:
        raise ValueError(f"inner product must be < 1, got {ip}")
    return float((1.0 - ip) ** (-N))


def _log_binom(a, b) -> np.ndarray:
    return gammaln(a + 1.0) - gammaln(b + 1.0) - gammaln(a - b + 1.0)


def hypergeometric_mgf_bound(p: int, s: int, N: int, tau: float) -> float:
    """Exact prior average of the likelihood-ratio cross moment bound:

        E exp(2 N tau^2 H / s),   H = |support overlap| ~ Hypergeometric(p, s, s),

    summed over h = max(0, 2s - p) .. s with log-space binomials.
    """
    if not 1 <= s <= p:
        raise ValueError(f"s must satisfy 1 <= s <= p, got s={s}, p={p}")
    h = np.arange(max(0, 2 * s - p), s + 1, dtype=float)
    log_pmf = _log_binom(s, h) + _log_binom(p - s, s - h) - _log_binom(p, s)
    log_mgf = float(logsumexp(2.0 * N * tau**2 * h / s + log_pmf))
    if log_mgf > 700.0:  # exp would overflow; the value is effectively infinite
        return float("inf")
    return float(np.exp(log_mgf))


def bayes_testing_risk_bound(p: int, s: int, N: int, tau: float) -> float:
    """Lower bound on type I + type II errors of any test of the two-point
    experiment: 1 - sqrt(E[cross moment] - 1), clamped below at 0."""
    mgf = hypergeometric_mgf_bound(p, s, N, tau)
    return float(max(1.0 - np.sqrt(max(mgf - 1.0, 0.0)), 0.0))


def minimax_testing_lower_radius(p: int, N: int, s: int, delta: float) -> RadiusBundle:
    """Radii below which every test has risk at least delta.

    A = sqrt(log((1 - delta)^2 + 1) / 2); the user-facing radius is
    rho = A min(sqrt(s log(1 + sqrt(p)/s) / N), 1) at the given s, while the
    reduction radius r = A min(sqrt(s' log(1 + p/s'^2) / N), 1) replaces s by
    s' = min(s, floor(sqrt(p))) (sparsities above sqrt(p) reduce to that
    boundary).  The two use different logarithms and are never conflated.
    """
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if not 1 <= s <= p:
        raise ValueError(f"s must satisfy 1 <= s <= p, got s={s}, p={p}")
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    A = float(np.sqrt(0.5 * np.log((1.0 - delta) ** 2 + 1.0)))
    rho = A * min(np.sqrt(s * np.log1p(np.sqrt(p) / s) / N), 1.0)
    s_trunc = min(s, int(np.floor(np.sqrt(p))))
    r = A * min(np.sqrt(s_trunc * np.log1p(p / s_trunc**2) / N), 1.0)
    return RadiusBundle(rho=float(rho), r=float(r), A=A)


def q_lower_bound(p: int, N: int, s: int, sigma: float, kappa: float) -> float:
    """Best-achievable scale for estimating the squared norm over
    {s-sparse, norm <= kappa}:

        min( sigma^2 min(s log(1 + sqrt(p)/s) / N, 1) + sigma kappa / sqrt(N),
             kappa^2 ).
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if kappa < 0:
        raise ValueError(f"kappa must be >= 0, got {kappa}")
    rate = min(s * np.log1p(np.sqrt(p) / s) / N, 1.0)
    return float(min(sigma**2 * rate + sigma * kappa / np.sqrt(N), kappa**2))
