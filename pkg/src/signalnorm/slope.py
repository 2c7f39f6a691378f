"""Square-root sorted-L1 penalized regression and its pivotal noise estimate.

The fitted objective is the composite

    ||Y - X t||_2 + sum_j w_j |t|_(descending j),

a square-root loss (no noise level input needed) plus the sorted-L1 norm
that pairs larger weights with larger magnitudes.  The weight sequence is
``lambda_j = c1 * sqrt(log(2p/j) / n)``; the solver applies it in the
per-observation normalization of the loss, i.e. it minimizes the equivalent
``||Y - Xt||_2 + sqrt(n) * ||t||_w`` so that the objective at t = 0 equals
``||Y||_2``.  Optimization is proximal gradient with backtracking; the prox
of the sorted-L1 norm is computed by a stack-based pool-adjacent-violators
pass over the sorted magnitudes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SlopeWeights",
    "SlopeFit",
    "slope_weights",
    "sorted_l1_norm",
    "prox_sorted_l1",
    "sqrt_slope_fit",
    "sigma_srs",
]

# Residual norms below this fraction of ||Y||_2 count as exact interpolation;
# the square-root loss is nondifferentiable there, so iteration stops.
_INTERPOLATION_GUARD = 1e-10


@dataclass
class SlopeWeights:
    """Nonincreasing penalty sequence lambda_j = c1 * sqrt(log(2p/j) / n)."""

    lam: np.ndarray
    c1: float
    n: int

    @property
    def p(self) -> int:
        return self.lam.shape[0]


@dataclass
class SlopeFit:
    """Solver output: coefficients, objective value, iteration diagnostics."""

    theta_hat: np.ndarray
    objective: float
    iterations: int
    converged: bool
    sigma_hat: float
    trace: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "theta_hat": list(self.theta_hat),
            "sigma_hat": self.sigma_hat,
            "objective": self.objective,
            "iterations": self.iterations,
            "converged": self.converged,
        }


def slope_weights(p: int, n: int, c1: float = 1.5) -> SlopeWeights:
    """Weight sequence lambda_j = c1 * sqrt(log(2p/j) / n), j = 1..p (natural log)."""
    if p < 1 or n < 1:
        raise ValueError(f"p and n must be >= 1, got p={p}, n={n}")
    if c1 <= 0:
        raise ValueError(f"c1 must be positive, got {c1}")
    j = np.arange(1, p + 1, dtype=float)
    return SlopeWeights(lam=c1 * np.sqrt(np.log(2.0 * p / j) / n), c1=c1, n=n)


def sorted_l1_norm(t: np.ndarray, w) -> float:
    """Sorted-L1 norm: the largest magnitude pairs with the largest weight.

    `w` is a :class:`SlopeWeights` or a bare nonincreasing weight vector.
    """
    lam = np.asarray(getattr(w, "lam", w), dtype=float)
    t = np.asarray(t, dtype=float)
    if t.shape[0] != lam.shape[0]:
        raise ValueError(f"length mismatch: t has {t.shape[0]}, weights have {lam.shape[0]}")
    mags = np.sort(np.abs(t))[::-1]
    return float(lam @ mags)


def prox_sorted_l1(v: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Proximal operator of the sorted-L1 norm:

        argmin_x  0.5 ||x - v||_2^2 + sum_j w_j |x|_(descending j).

    Sorts magnitudes descending, subtracts the weights, then restores the
    nonincreasing-nonnegative shape by averaging violating blocks with a
    stack-based pool-adjacent-violators pass; signs and positions of `v`
    are restored at the end.
    """
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    p = v.shape[0]
    if w.shape[0] != p:
        raise ValueError(f"length mismatch: v has {p}, weights have {w.shape[0]}")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    if np.any(np.diff(w) > 0):
        raise ValueError("weights must be nonincreasing")

    signs = np.sign(v)
    mags = np.abs(v)
    order = np.argsort(-mags, kind="stable")
    diff = mags[order] - w

    # Stack of blocks (start index, end index, running sum); merging whenever
    # block averages violate the nonincreasing constraint.
    start = np.empty(p, dtype=np.int64)
    end = np.empty(p, dtype=np.int64)
    total = np.empty(p)
    avg = np.empty(p)
    k = 0
    for i in range(p):
        start[k] = i
        end[k] = i
        total[k] = diff[i]
        avg[k] = diff[i]
        while k > 0 and avg[k - 1] <= avg[k]:
            k -= 1
            total[k] += total[k + 1]
            end[k] = i
            avg[k] = total[k] / (end[k] - start[k] + 1)
        k += 1

    out_sorted = np.empty(p)
    for b in range(k):
        out_sorted[start[b] : end[b] + 1] = max(avg[b], 0.0)

    out = np.empty(p)
    out[order] = out_sorted
    return out * signs


def sqrt_slope_fit(
    X1: np.ndarray,
    Y1: np.ndarray,
    c1: float = 1.5,
    max_iter: int = 10000,
    tol: float = 1e-8,
    weights: SlopeWeights | None = None,
) -> SlopeFit:
    """Fit the square-root sorted-L1 penalized regression on (X1, Y1).

    Proximal gradient on the smooth part t -> ||Y1 - X1 t||_2 (gradient
    -X^T r / ||r||_2 away from r = 0) with sorted-L1 prox steps and a
    halving backtracking line search; stops when the relative objective
    decrease falls below `tol`, on exact interpolation, or at `max_iter`
    (reported through the `converged` flag, never silently).
    """
    X1 = np.asarray(X1, dtype=float)
    Y1 = np.asarray(Y1, dtype=float)
    n, p = X1.shape
    if Y1.shape[0] != n:
        raise ValueError("row mismatch between X1 and Y1")
    if weights is None:
        weights = slope_weights(p, n, c1)
    # Loss normalized per observation; equivalently the unscaled loss is
    # paired with sqrt(n)-rescaled weights, keeping objective(0) = ||Y||_2.
    w_eff = np.sqrt(n) * weights.lam

    norm_y = float(np.linalg.norm(Y1))
    x = np.zeros(p)
    obj = norm_y  # objective at zero
    trace = [obj]
    step = n / max(float((X1**2).sum()), np.finfo(float).tiny)
    converged = False
    iterations = 0

    for iterations in range(1, max_iter + 1):
        r = Y1 - X1 @ x
        norm_r = float(np.linalg.norm(r))
        if norm_r <= _INTERPOLATION_GUARD * norm_y:
            converged = True
            break
        grad = -(X1.T @ r) / norm_r

        # Backtracking: halve the step until the quadratic upper model of the
        # smooth part holds at the prox point; grow it mildly between
        # iterations so an early conservative halving is not permanent.
        step *= 1.3
        accepted = None
        for _ in range(60):
            cand = prox_sorted_l1(x - step * grad, step * w_eff)
            dx = cand - x
            g_cand = float(np.linalg.norm(Y1 - X1 @ cand))
            model = norm_r + float(grad @ dx) + float(dx @ dx) / (2.0 * step)
            if g_cand <= model + 1e-12 * max(1.0, norm_r):
                accepted = cand
                g_accepted = g_cand
                break
            step *= 0.5
        if accepted is None:
            break  # step underflow: stall, report non-convergence

        new_obj = g_accepted + float(w_eff @ np.sort(np.abs(accepted))[::-1])
        decrease = obj - new_obj
        x = accepted
        obj = min(obj, new_obj)
        trace.append(obj)
        if 0 <= decrease < tol * max(abs(obj), 1e-30):
            converged = True
            break

    resid = float(np.linalg.norm(Y1 - X1 @ x))
    return SlopeFit(
        theta_hat=x,
        objective=resid + float(w_eff @ np.sort(np.abs(x))[::-1]),
        iterations=iterations,
        converged=converged,
        sigma_hat=resid / np.sqrt(n),
        trace=np.asarray(trace),
    )


def sigma_srs(X1: np.ndarray, Y1: np.ndarray, theta_hat: np.ndarray) -> float:
    """Pivotal noise-level estimate ||Y1 - X1 theta_hat||_2 / sqrt(n)."""
    X1 = np.asarray(X1, dtype=float)
    Y1 = np.asarray(Y1, dtype=float)
    n = X1.shape[0]
    return float(np.linalg.norm(Y1 - X1 @ np.asarray(theta_hat, dtype=float)) / np.sqrt(n))
