"""Estimation and detection pipeline for designs with more rows than columns.

The sample is split in two; an ordinary least squares fit on the first block
provides the preliminary estimate and the residual-based noise estimate, and
the second block feeds the quadratic estimators.  The dense branch sums all
coordinate estimates; the sparse branch (s <= sqrt(p)) keeps only the
coordinates whose OLS value clears a per-coordinate threshold scaled by the
diagonal of the inverse Gram matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import RegressionSample, split_sample
from .quadratic import (
    FunctionalEstimate,
    norm_from_q,
    q_dense,
    q_sparse,
    sparse_threshold,
)

__all__ = [
    "SingularDesignError",
    "OlsFit",
    "TuningParams",
    "ols_fit",
    "estimate_lowdim",
    "detect_lowdim",
    "detection_threshold",
]

# Designs whose smallest singular value falls below this fraction of the
# largest are rejected: with continuous entry laws exact collinearity is a
# null event, so near-singularity signals a malformed input.
_SINGULAR_RTOL = 1e-10


class SingularDesignError(np.linalg.LinAlgError):
    """Raised when the design block is numerically rank-deficient."""


@dataclass
class OlsFit:
    """Least squares fit with the inverse Gram matrix and noise estimate."""

    theta_hat: np.ndarray
    gram_inverse: np.ndarray
    sigma_hat: float
    n: int
    p: int


@dataclass
class TuningParams:
    """Selection constant alpha and test constant beta (None = calibrate)."""

    alpha: float = 4.0
    beta: float | None = None

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.beta is not None and self.beta <= 0:
            raise ValueError(f"beta must be positive, got {self.beta}")


def ols_fit(X1: np.ndarray, Y1: np.ndarray) -> OlsFit:
    """Least squares via SVD (rank-revealing orthogonal factorization).

    Requires n > p so the noise estimate ||Y1 - X1 theta_hat||_2 / sqrt(n - p)
    is defined; the inverse Gram matrix (X1^T X1)^{-1} is materialized for
    the sparse-branch thresholds.
    """
    X1 = np.asarray(X1, dtype=float)
    Y1 = np.asarray(Y1, dtype=float)
    n, p = X1.shape
    if Y1.shape[0] != n:
        raise ValueError("row mismatch between X1 and Y1")
    if n <= p:
        raise ValueError(f"need n > p for the least squares pipeline, got n={n}, p={p}")
    U, svals, Vt = np.linalg.svd(X1, full_matrices=False)
    if svals[-1] < _SINGULAR_RTOL * svals[0]:
        raise SingularDesignError(
            f"design is numerically singular: sigma_min/sigma_max = {svals[-1] / svals[0]:.3e}"
        )
    theta_hat = Vt.T @ ((U.T @ Y1) / svals)
    gram_inverse = (Vt.T / svals**2) @ Vt
    sigma_hat = float(np.linalg.norm(Y1 - X1 @ theta_hat) / np.sqrt(n - p))
    return OlsFit(theta_hat=theta_hat, gram_inverse=gram_inverse, sigma_hat=sigma_hat, n=n, p=p)


def detection_threshold(beta: float, sigma_hat: float, s: int, p: int, N: int) -> float:
    """Detection boundary beta * sigma_hat * sqrt(s * log(1 + sqrt(p)/s) / N)."""
    return float(beta * sigma_hat * np.sqrt(s * np.log1p(np.sqrt(p) / s) / N))


def _is_sparse_branch(s: int, p: int) -> bool:
    # Sparse zone is s <= sqrt(p); the boundary s^2 = p is included.
    return s * s <= p


def estimate_lowdim(
    sample: RegressionSample, s: int, params: TuningParams | None = None
) -> FunctionalEstimate:
    """Estimate the squared norm and the norm in the n > p regime.

    Splits the sample in two, fits OLS on block 1, and evaluates the dense
    estimator (s > sqrt(p)) or the thresholded sparse estimator
    (s <= sqrt(p), with screening on the OLS coefficients themselves and
    threshold matrix (X1^T X1)^{-1}) on block 2.
    """
    params = params or TuningParams()
    if not 1 <= s <= sample.p:
        raise ValueError(f"s must satisfy 1 <= s <= p, got s={s}, p={sample.p}")
    split = split_sample(sample, 2)
    (X1, Y1), (X2, Y2) = split.subsamples
    fit = ols_fit(X1, Y1)
    p = sample.p
    if _is_sparse_branch(s, p):
        threshold = sparse_threshold(fit.sigma_hat, fit.gram_inverse, params.alpha, p, s)
        q_hat = q_sparse(
            fit.theta_hat, fit.theta_hat, fit.sigma_hat, fit.gram_inverse,
            params.alpha, s, X2, Y2,
        )
        branch = "sparse"
    else:
        threshold = None
        q_hat = q_dense(fit.theta_hat, X2, Y2)
        branch = "dense"
    return FunctionalEstimate(
        q_hat=q_hat,
        lambda_hat=norm_from_q(q_hat),
        sigma_hat=fit.sigma_hat,
        branch=branch,
        regime="low",
        n_per_split=split.n,
        parts=2,
        threshold=threshold,
        split_tags={"prelim": 0, "quadratic": 1},
    )


def detect_lowdim(
    sample: RegressionSample,
    s: int,
    params: TuningParams | None = None,
    delta: float = 0.1,
    calib_trials: int = 2000,
    calib_seed: int = 0,
    full_output: bool = False,
):
    """Signal detection in the n > p regime: 1 if the norm estimate reaches
    beta * sigma_hat * sqrt(s log(1 + sqrt(p)/s) / N), else 0.

    N is the number of rows actually consumed (parts * n).  When
    ``params.beta`` is None, beta is calibrated by simulating the null at
    level `delta` (cached per configuration).  With ``full_output=True``
    returns ``(decision, lambda_hat, threshold)``.
    """
    params = params or TuningParams()
    est = estimate_lowdim(sample, s, params)
    n_eff = est.parts * est.n_per_split
    beta = params.beta
    if beta is None:
        from .calibration import calibrate_beta

        beta = calibrate_beta(
            p=sample.p, N=n_eff, s=s, delta=delta, regime="low",
            alpha=params.alpha, trials=calib_trials, seed=calib_seed,
        )
    threshold = detection_threshold(beta, est.sigma_hat, s, sample.p, n_eff)
    decision = int(est.lambda_hat >= threshold)
    if full_output:
        return decision, est.lambda_hat, threshold
    return decision
