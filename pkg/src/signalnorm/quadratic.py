"""Generic estimators of the squared signal norm built from split samples.

Given a preliminary estimate computed on an independent block of data, each
coordinate's squared value is estimated unbiasedly by a centered quadratic
form of a fresh block (X2, Y2).  Summing over all coordinates gives the
dense estimator; summing only over coordinates whose (second) preliminary
estimate clears a noise-calibrated threshold gives the sparse one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ComponentEstimates",
    "FunctionalEstimate",
    "component_estimates",
    "debias",
    "q_dense",
    "q_sparse",
    "norm_from_q",
    "sparse_threshold",
]


@dataclass
class ComponentEstimates:
    """Per-coordinate unbiased estimates of theta_j^2 and their inputs."""

    a: np.ndarray
    prelim: np.ndarray
    split_tag: int | None = None


@dataclass
class FunctionalEstimate:
    """An estimate of the squared norm and the norm, with branch metadata."""

    q_hat: float
    lambda_hat: float
    sigma_hat: float | None = None
    branch: str = "dense"  # "dense" | "sparse"
    regime: str = "low"  # "low" | "high"
    n_per_split: int | None = None
    parts: int | None = None
    threshold: float | np.ndarray | None = None
    split_tags: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        thr = self.threshold
        if isinstance(thr, np.ndarray):
            thr = float(np.max(thr)) if thr.size else None
        return {
            "q_hat": self.q_hat,
            "lambda_hat": self.lambda_hat,
            "sigma_hat": self.sigma_hat,
            "branch": self.branch,
            "regime": self.regime,
            "n_per_split": self.n_per_split,
            "parts": self.parts,
            "threshold": thr,
        }


def component_estimates(
    prelim: np.ndarray,
    X2: np.ndarray,
    Y2: np.ndarray,
    split_tag: int | None = None,
) -> ComponentEstimates:
    """Centered per-coordinate estimates of theta_j^2 from a fresh block.

    With residual r = Y2 - X2 @ prelim and columns X2[:, j],

        a_j = prelim_j^2 + (2 prelim_j / n) X2[:, j] @ r
              + (1 / (n (n-1))) * sum_{k != l} X2[k, j] X2[l, j] r_k r_l.

    The pair sum is evaluated in O(n) per coordinate as
    (sum_k X2[k, j] r_k)^2 - sum_k (X2[k, j] r_k)^2; conditionally on
    `prelim`, E a_j = theta_j^2.
    """
    prelim = np.asarray(prelim, dtype=float)
    X2 = np.asarray(X2, dtype=float)
    Y2 = np.asarray(Y2, dtype=float)
    n, p = X2.shape
    if n < 2:
        raise ValueError(f"need at least 2 rows for the pair sum, got n={n}")
    if prelim.shape[0] != p or Y2.shape[0] != n:
        raise ValueError("dimension mismatch between prelim, X2, Y2")
    r = Y2 - X2 @ prelim
    weighted = X2 * r[:, None]
    col_dot = weighted.sum(axis=0)  # sum_k X2[k, j] r_k, per column
    col_sq = (weighted**2).sum(axis=0)
    pair_sum = (col_dot**2 - col_sq) / (n * (n - 1))
    a = prelim**2 + (2.0 / n) * prelim * col_dot + pair_sum
    return ComponentEstimates(a=a, prelim=prelim, split_tag=split_tag)


def debias(prelim: np.ndarray, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """One-step correction prelim + X^T (Y - X prelim) / n on an independent block.

    Conditionally on `prelim`, the output is an unbiased estimate of theta.
    """
    prelim = np.asarray(prelim, dtype=float)
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    n, p = X.shape
    if prelim.shape[0] != p or Y.shape[0] != n:
        raise ValueError("dimension mismatch between prelim, X, Y")
    return prelim + X.T @ (Y - X @ prelim) / n


def q_dense(prelim: np.ndarray, X2: np.ndarray, Y2: np.ndarray) -> float:
    """Dense estimate of the squared norm: the sum of all coordinate estimates."""
    return float(component_estimates(prelim, X2, Y2).a.sum())


def _threshold_diagonal(M, p: int) -> np.ndarray:
    """Diagonal of the threshold matrix M, accepting scalar, vector or matrix."""
    M = np.asarray(M, dtype=float)
    if M.ndim == 0:
        diag = np.full(p, float(M))
    elif M.ndim == 1:
        if M.shape[0] != p:
            raise ValueError(f"threshold diagonal has length {M.shape[0]}, expected {p}")
        diag = M
    elif M.ndim == 2:
        if M.shape != (p, p):
            raise ValueError(f"threshold matrix has shape {M.shape}, expected ({p}, {p})")
        diag = np.diag(M)
    else:
        raise ValueError("threshold matrix must be scalar, vector or 2-d")
    if np.any(diag < 0):
        raise ValueError("threshold matrix has negative diagonal entries")
    return diag


def sparse_threshold(sigma_hat: float, M, alpha: float, p: int, s: int) -> np.ndarray:
    """Per-coordinate selection threshold alpha * sigma_hat * sqrt(M_jj * log(1 + p/s^2))."""
    diag = _threshold_diagonal(M, p)
    return alpha * sigma_hat * np.sqrt(diag * np.log1p(p / s**2))


def q_sparse(
    prelim: np.ndarray,
    bar_theta: np.ndarray,
    sigma_hat: float,
    M,
    alpha: float,
    s: int,
    X2: np.ndarray,
    Y2: np.ndarray,
) -> float:
    """Sparse estimate of the squared norm: coordinate estimates kept only where
    the screening estimate `bar_theta` strictly clears the selection threshold.

        sum_j a_j(prelim) * 1{ |bar_theta_j| > alpha sigma_hat sqrt(M_jj log(1 + p/s^2)) }

    Ties at the threshold exclude the coordinate.
    """
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    if sigma_hat <= 0:
        raise ValueError(f"sigma_hat must be positive, got {sigma_hat}")
    if s < 1:
        raise ValueError(f"s must be >= 1, got {s}")
    bar_theta = np.asarray(bar_theta, dtype=float)
    comps = component_estimates(prelim, X2, Y2)
    p = comps.a.shape[0]
    if bar_theta.shape[0] != p:
        raise ValueError("bar_theta length does not match p")
    tau = sparse_threshold(sigma_hat, M, alpha, p, s)
    keep = np.abs(bar_theta) > tau
    return float(comps.a[keep].sum())


def norm_from_q(q_hat: float) -> float:
    """Norm estimate |q_hat|^(1/2); the absolute value keeps it defined when q_hat < 0."""
    return float(np.sqrt(abs(q_hat)))
