"""Domain types and synthetic data generation for the regression model Y = X theta + sigma xi.

Entries of the design matrix X and of the noise vector xi are drawn i.i.d.
from standardized laws (mean 0, variance 1), all N(p+1) variables jointly
independent.  Samples are reproducible from a stored integer seed, and can
be partitioned into 2 or 3 equal-size row blocks for the split-sample
estimators built on top of this module.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "DESIGN_LAWS",
    "NOISE_LAWS",
    "Dimensions",
    "ModelSpec",
    "RegressionSample",
    "SampleSplit",
    "sample_design",
    "sample_noise",
    "synthesize",
    "sample_sparse_theta",
    "split_sample",
    "write_sample",
    "read_sample",
]

# Smoothing fraction for the "rademacher-smoothed" design law.
_SMOOTH = 0.5
# Levels of the two-point "scaled-rademacher-mixture" noise law; the pair
# (a, b) with equal mixture weights satisfies (a^2 + b^2) / 2 = 1.
_MIX_LO = 0.5
_MIX_HI = float(np.sqrt(2.0 - _MIX_LO**2))


def _draw_standard_normal(rng: np.random.Generator, size) -> np.ndarray:
    return rng.standard_normal(size)


def _draw_uniform_scaled(rng: np.random.Generator, size) -> np.ndarray:
    # Uniform on [-sqrt(3), sqrt(3)]: bounded density, variance 1.
    root3 = np.sqrt(3.0)
    return rng.uniform(-root3, root3, size)


def _draw_rademacher_smoothed(rng: np.random.Generator, size) -> np.ndarray:
    # (R + g*Z) / sqrt(1 + g^2): sign variable smoothed by a small Gaussian,
    # so the law has a bounded density while staying subGaussian, variance 1.
    signs = rng.integers(0, 2, size) * 2.0 - 1.0
    z = rng.standard_normal(size)
    return (signs + _SMOOTH * z) / np.sqrt(1.0 + _SMOOTH**2)


def _draw_rademacher_mixture(rng: np.random.Generator, size) -> np.ndarray:
    # Equal mixture of +-_MIX_LO and +-_MIX_HI, variance 1.
    signs = rng.integers(0, 2, size) * 2.0 - 1.0
    level = np.where(rng.integers(0, 2, size) == 1, _MIX_HI, _MIX_LO)
    return signs * level


DESIGN_LAWS = {
    "standard-normal": _draw_standard_normal,
    "uniform-scaled": _draw_uniform_scaled,
    "rademacher-smoothed": _draw_rademacher_smoothed,
}

NOISE_LAWS = {
    "standard-normal": _draw_standard_normal,
    "scaled-rademacher-mixture": _draw_rademacher_mixture,
}


@dataclass(frozen=True)
class Dimensions:
    """Problem sizes: N rows, p coordinates, sparsity budget s, per-split n."""

    N: int
    p: int
    s: int
    n: int | None = None

    def __post_init__(self):
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if self.p < 2:
            raise ValueError(f"p must be >= 2, got {self.p}")
        if not 1 <= self.s <= self.p:
            raise ValueError(f"s must satisfy 1 <= s <= p, got s={self.s}, p={self.p}")
        if self.n is not None and not 1 <= self.n <= self.N:
            raise ValueError(f"per-split n must satisfy 1 <= n <= N, got n={self.n}")


@dataclass
class ModelSpec:
    """Ground-truth parameters and the standardized entry laws for X and xi."""

    theta: np.ndarray
    sigma: float
    design: str = "standard-normal"
    noise: str = "standard-normal"

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        if self.theta.ndim != 1:
            raise ValueError("theta must be a 1-d vector")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.design not in DESIGN_LAWS:
            raise ValueError(f"unknown design law {self.design!r}")
        if self.noise not in NOISE_LAWS:
            raise ValueError(f"unknown noise law {self.noise!r}")


@dataclass
class RegressionSample:
    """Observed pair (X, Y), with optional ground truth for simulation audits."""

    X: np.ndarray
    Y: np.ndarray
    theta: np.ndarray | None = None
    sigma: float | None = None
    seed: int | None = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.Y = np.asarray(self.Y, dtype=float)
        if self.X.ndim != 2:
            raise ValueError("X must be a 2-d matrix")
        if self.X.shape[0] != self.Y.shape[0]:
            raise ValueError(
                f"row mismatch: X has {self.X.shape[0]} rows, Y has {self.Y.shape[0]}"
            )

    @property
    def N(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass
class SampleSplit:
    """Disjoint contiguous row blocks of equal size n; trailing rows dropped."""

    parts: int
    subsamples: list = field(default_factory=list)
    dropped_rows: int = 0

    @property
    def n(self) -> int:
        return self.subsamples[0][1].shape[0]


def sample_design(dims: Dimensions, design: str, rng: np.random.Generator) -> np.ndarray:
    """Draw an N x p matrix with i.i.d. mean-0 variance-1 entries.

    Deterministic given the generator state; raises on an unknown law tag.
    """
    try:
        draw = DESIGN_LAWS[design]
    except KeyError:
        raise ValueError(f"unknown design law {design!r}") from None
    return draw(rng, (dims.N, dims.p))


def sample_noise(N: int, noise: str, rng: np.random.Generator) -> np.ndarray:
    """Draw a length-N noise vector with i.i.d. mean-0 variance-1 entries."""
    try:
        draw = NOISE_LAWS[noise]
    except KeyError:
        raise ValueError(f"unknown noise law {noise!r}") from None
    return draw(rng, N)


def _seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(int(seed))


def synthesize(spec: ModelSpec, dims: Dimensions, seed: int) -> RegressionSample:
    """Generate a sample from Y = X theta + sigma xi, reproducible from `seed`.

    The design and noise streams are derived from two spawned children of
    ``SeedSequence(seed)``, so the same seed always reproduces the same
    (X, Y) bit for bit.
    """
    if spec.theta.shape[0] != dims.p:
        raise ValueError(
            f"dimension mismatch: theta has length {spec.theta.shape[0]}, p={dims.p}"
        )
    ss = _seed_sequence(seed)
    ss_design, ss_noise = ss.spawn(2)
    X = sample_design(dims, spec.design, np.random.default_rng(ss_design))
    xi = sample_noise(dims.N, spec.noise, np.random.default_rng(ss_noise))
    Y = X @ spec.theta + spec.sigma * xi
    stored_seed = int(seed) if not isinstance(seed, np.random.SeedSequence) else None
    return RegressionSample(X=X, Y=Y, theta=spec.theta.copy(), sigma=spec.sigma, seed=stored_seed)


def sample_sparse_theta(
    p: int,
    s: int,
    magnitude: float,
    pattern: str = "equal",
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Draw an s-sparse vector with Euclidean norm `magnitude`.

    Exactly s coordinates are nonzero, each of absolute value
    magnitude / sqrt(s); the support is uniform over size-s subsets.
    `pattern` is "equal" (all positive) or "random-signs".
    """
    if not 1 <= s <= p:
        raise ValueError(f"s must satisfy 1 <= s <= p, got s={s}, p={p}")
    if magnitude < 0:
        raise ValueError(f"magnitude must be >= 0, got {magnitude}")
    if pattern not in ("equal", "random-signs"):
        raise ValueError(f"unknown pattern {pattern!r}")
    rng = np.random.default_rng() if rng is None else rng
    support = rng.choice(p, size=s, replace=False)
    theta = np.zeros(p)
    value = magnitude / np.sqrt(s)
    if pattern == "random-signs":
        theta[support] = value * (rng.integers(0, 2, s) * 2.0 - 1.0)
    else:
        theta[support] = value
    return theta


def split_sample(sample: RegressionSample, parts: int) -> SampleSplit:
    """Partition the first parts*n rows into `parts` contiguous blocks of n rows.

    n = floor(N / parts); any trailing remainder rows are dropped and counted.
    """
    if parts not in (2, 3):
        raise ValueError(f"parts must be 2 or 3, got {parts}")
    N = sample.N
    if N < parts:
        raise ValueError(f"cannot split N={N} rows into {parts} parts")
    n = N // parts
    subsamples = [
        (sample.X[i * n : (i + 1) * n], sample.Y[i * n : (i + 1) * n])
        for i in range(parts)
    ]
    return SampleSplit(parts=parts, subsamples=subsamples, dropped_rows=N - parts * n)


def write_sample(sample: RegressionSample, path: str | Path) -> Path:
    """Write a sample as CSV with header ``y,x1,...,xp``.

    When ground truth is attached, a sidecar ``<path>.truth.json`` records
    ``{"theta": [...], "sigma": ..., "seed": ...}``.
    """
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["y"] + [f"x{j + 1}" for j in range(sample.p)])
        for i in range(sample.N):
            writer.writerow([repr(float(sample.Y[i]))] + [repr(float(v)) for v in sample.X[i]])
    if sample.theta is not None:
        sidecar = path.with_suffix(path.suffix + ".truth.json")
        with open(sidecar, "w") as fh:
            json.dump(
                {
                    "theta": list(sample.theta),
                    "sigma": sample.sigma,
                    "seed": sample.seed,
                },
                fh,
            )
    return path


def read_sample(path: str | Path) -> RegressionSample:
    """Read a CSV sample written by :func:`write_sample`, truth sidecar included."""
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if not header or header[0] != "y":
            raise ValueError(f"{path}: expected header starting with 'y'")
        rows = [[float(v) for v in row] for row in reader if row]
    data = np.asarray(rows)
    if data.size == 0:
        raise ValueError(f"{path}: no data rows")
    theta = sigma = seed = None
    sidecar = path.with_suffix(path.suffix + ".truth.json")
    if sidecar.exists():
        with open(sidecar) as fh:
            truth = json.load(fh)
        theta = np.asarray(truth["theta"], dtype=float)
        sigma = truth["sigma"]
        seed = truth.get("seed")
    return RegressionSample(X=data[:, 1:], Y=data[:, 0], theta=theta, sigma=sigma, seed=seed)
