"""Null models: Brownian motion and AR(1), plus exact BM pattern probabilities."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import asin, factorial, pi
from typing import Callable, Literal, Optional

import numpy as np

from ordpat import kernels
from ordpat._rng import check_seed, substream
from ordpat.patterns import PatternDistribution, index_to_permutation, negate_index, PatternIndex
from ordpat.series import TimeSeries

# Rounded order-4 BM probabilities by groups of pattern numbers.
# Decimal entries are rounded; exact values come from bm_pattern_probabilities.
BM_ORDER4_ROUNDED = {
    (1, 24): 1 / 8,
    (2, 7, 18, 23): 1 / 16,
    (3, 22): 1 / 24,
    (4, 12, 13, 21): 0.035,
    (5, 9, 16, 20): 1 / 48,
    (6, 8, 10, 15, 17, 19): 0.027,
    (11, 14): 0.015,
}


@dataclass(frozen=True)
class ModelSpec:
    """A null process to simulate.

    ``kind="bm"``: partial sums of i.i.d. standard normals.
    ``kind="ar1"``: ``x_1 = z_1``, ``x_t = phi * x_{t-1} + z_t`` with Gaussian
    or centered exponential (``1 - Exp(1)``) noise. ``burn_in`` extra steps are
    simulated and discarded.
    """

    kind: Literal["bm", "ar1"] = "bm"
    T: int = 1000
    seed: int = 0
    phi: float = 0.0
    noise: Literal["gaussian", "exponential_centered"] = "gaussian"
    burn_in: int = 0

    def __post_init__(self):
        if self.kind not in ("bm", "ar1"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.T < 1:
            raise ValueError(f"T must be >= 1, got {self.T}")
        if self.kind == "ar1":
            if not -1 < self.phi < 1:
                raise ValueError(f"AR(1) needs |phi| < 1, got {self.phi}")
            if self.noise not in ("gaussian", "exponential_centered"):
                raise ValueError(f"unknown noise {self.noise!r}")
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        check_seed(self.seed)

    def with_(self, **changes) -> "ModelSpec":
        fields = dict(self.__dict__)
        fields.update(changes)
        return ModelSpec(**fields)

    def describe(self) -> dict:
        d = {"kind": self.kind, "T": self.T, "seed": self.seed}
        if self.kind == "ar1":
            d.update(phi=self.phi, noise=self.noise, burn_in=self.burn_in)
        return d


def draw(spec: ModelSpec, rng: np.random.Generator, T: Optional[int] = None) -> np.ndarray:
    """One trajectory of ``spec`` (length ``T`` overrides ``spec.T``) from ``rng``."""
    T = spec.T if T is None else T
    if spec.kind == "bm":
        return np.cumsum(rng.standard_normal(T))
    total = T + spec.burn_in
    if spec.noise == "gaussian":
        z = rng.standard_normal(total)
    else:
        z = 1.0 - rng.standard_exponential(total)
    return kernels.ar1_filter(z, spec.phi)[spec.burn_in :]


def simulate(spec: ModelSpec) -> TimeSeries:
    """Deterministic trajectory for ``spec``; identical specs give identical series."""
    name = spec.kind if spec.kind == "bm" else f"ar1(phi={spec.phi:g},{spec.noise})"
    return TimeSeries(draw(spec, substream(spec.seed)), None, name)


def monte_carlo(
    spec: ModelSpec,
    n_trajectories: int,
    fn: Callable[[np.ndarray], object],
    *,
    seed: Optional[int] = None,
    T: Optional[int] = None,
    workers: int = 1,
) -> list:
    """``[fn(x_0), ..., fn(x_{N-1})]`` over independent trajectories of ``spec``.

    Trajectory ``i`` is drawn from ``substream(seed, i)``, so the result is the
    same for any ``workers``.
    """
    seed = spec.seed if seed is None else check_seed(seed)

    def one(i):
        return fn(draw(spec, substream(seed, i), T))

    if workers <= 1 or n_trajectories < 2:
        return [one(i) for i in range(n_trajectories)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(n_trajectories), chunksize=64))


def _orthant(corr: np.ndarray) -> float:
    """P(all coordinates > 0) for a centered Gaussian vector of dimension <= 3."""
    m = corr.shape[0]
    if m == 1:
        return 0.5
    if m == 2:
        return 0.25 + asin(corr[0, 1]) / (2 * pi)
    if m == 3:
        return 0.125 + (asin(corr[0, 1]) + asin(corr[0, 2]) + asin(corr[1, 2])) / (4 * pi)
    raise ValueError("closed form only up to dimension 3")


def _bm_probability(perm) -> float:
    n = len(perm)
    pos = sorted(range(n), key=lambda j: perm[j])
    # value at position j is the sum of the first j increments
    a = np.zeros((n - 1, n - 1))
    for r in range(n - 1):
        i, j = pos[r], pos[r + 1]
        lo, hi = min(i, j), max(i, j)
        a[r, lo:hi] = 1.0 if j > i else -1.0
    cov = a @ a.T
    s = np.sqrt(np.diag(cov))
    return _orthant(cov / np.outer(s, s))


@dataclass(frozen=True)
class BmPatternTable:
    """Exact pattern probabilities of Brownian motion (any lag)."""

    order: int
    probabilities: np.ndarray

    def as_distribution(self, lags=(1,)) -> PatternDistribution:
        return PatternDistribution(self.order, tuple(lags), self.probabilities, 0)


def bm_pattern_probabilities(n: int) -> BmPatternTable:
    """Pattern probabilities of BM for order ``n`` in 2..4.

    A pattern fixes the signs of the ``n - 1`` rank-adjacent differences, each a
    signed sum of i.i.d. Gaussian increments, so its probability is a Gaussian
    orthant probability with a closed form in arcsines.
    """
    if n not in (2, 3, 4):
        raise ValueError(f"exact BM probabilities available for n in 2..4, got {n}")
    p = np.array([_bm_probability(index_to_permutation((n, i + 1))) for i in range(factorial(n))])
    p.setflags(write=False)
    return BmPatternTable(n, p)


def check_negation_symmetric(table: BmPatternTable) -> bool:
    n = table.order
    return all(
        table.probabilities[i] == table.probabilities[negate_index(PatternIndex(n, i + 1)).index - 1]
        for i in range(factorial(n))
    )


@dataclass(frozen=True)
class BmOracleResult:
    order: int
    probabilities: np.ndarray
    stderr: np.ndarray
    samples: int
    seed: int


def mc_bm_pattern_oracle(n: int, samples: int, seed: int = 0, chunk: int = 1 << 22) -> BmOracleResult:
    """Lag-1 pattern frequencies of one simulated BM path with ``samples`` windows.

    The path is generated in chunks so memory stays bounded; ``stderr`` is the
    binomial standard error ``sqrt(p (1 - p) / samples)``.
    """
    samples = int(samples)
    if samples < 1:
        raise ValueError("samples must be positive")
    rng = substream(seed)
    counts = np.zeros(factorial(n), dtype=np.int64)
    lag = np.array([1], dtype=np.int64)
    tail = np.zeros(0)
    level = 0.0
    remaining = samples + n - 1
    while remaining > 0:
        m = min(chunk, remaining)
        block = level + np.cumsum(rng.standard_normal(m))
        level = block[-1]
        x = np.concatenate((tail, block))
        c, _ = kernels.pattern_counts(x, n, lag)
        counts += c[0]
        tail = x[-(n - 1):]
        remaining -= m
    p = counts / samples
    return BmOracleResult(n, p, np.sqrt(p * (1 - p) / samples), samples, seed)
