"""Tests of Brownian-motion and i.i.d. null hypotheses for order statistics."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from itertools import permutations
from math import erfc, sqrt
from typing import Iterable, Literal, Optional, Tuple

import numpy as np

from ordpat import kernels
from ordpat._rng import check_seed
from ordpat.errors import SeriesTooShortError, TieError
from ordpat.models import ModelSpec, bm_pattern_probabilities, monte_carlo
from ordpat.patterns import PatternDistribution, check_lags
from ordpat.series import SeriesLike, values_of


@dataclass
class TestResult:
    """Outcome of one test.

    ``n_simulations`` is 0 for tests whose null distribution is analytic
    (normal approximation or exact binomial); ``null_median`` is then the
    null mean.
    """

    __test__ = False  # not a pytest class

    statistic_name: str
    observed: float
    null_median: float
    p_value: float
    n_simulations: int
    seed: Optional[int]
    extra: dict = field(default_factory=dict)
    null_sample: Optional[np.ndarray] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "statistic_name": self.statistic_name,
            "observed": float(self.observed),
            "null_median": float(self.null_median),
            "p_value": float(self.p_value),
            "n_simulations": int(self.n_simulations),
            "seed": self.seed,
            "extra": {
                k: int(v) if isinstance(v, (int, np.integer)) else float(v) for k, v in self.extra.items()
            },
        }


def two_sided_normal_p(z: float) -> float:
    return erfc(abs(z) / sqrt(2.0))


def mc_distance_test(
    q: PatternDistribution,
    T: int,
    N: int = 10_000,
    seed: int = 0,
    *,
    null_lags: Optional[Iterable[int]] = None,
    workers: int = 1,
    keep_null: bool = False,
) -> TestResult:
    """Monte Carlo goodness of fit of a pattern distribution to Brownian motion.

    The observed statistic is the Euclidean distance between ``q`` and the
    exact BM probabilities ``b``. ``N`` BM paths of length ``T`` give null
    distances ``d_k`` computed with the same lag averaging as ``q``, and
    ``p = #{d_k > observed} / N``. ``null_lags`` decouples the lag set of the
    simulated paths from that of ``q`` (lag 1 alone gives wider null distances
    than an average over lags 1..3).
    """
    n = q.order
    lags = check_lags(q.lags if null_lags is None else null_lags)
    seed = check_seed(seed)
    if T < 10:
        raise SeriesTooShortError(f"T must be >= 10, got {T}")
    if T < (n - 1) * lags[-1] + 1:
        raise SeriesTooShortError(f"T={T} too short for order {n} at lag {lags[-1]}")
    if N < 100:
        raise ValueError(f"need at least 100 simulations, got {N}")
    b = bm_pattern_probabilities(n).probabilities
    observed = float(np.linalg.norm(q.probabilities - b))
    lag_arr = np.array(lags, dtype=np.int64)

    def distance(x):
        counts, _ = kernels.pattern_counts(x, n, lag_arr)
        p = (counts / counts.sum(axis=1, keepdims=True)).mean(axis=0)
        return float(np.linalg.norm(p - b))

    d = np.array(monte_carlo(ModelSpec("bm", T, seed), N, distance, workers=workers))
    p_value = float(np.count_nonzero(d > observed)) / N
    pct = np.percentile(d, [5, 50, 95])
    return TestResult(
        "pattern_distance_to_bm",
        observed,
        float(np.median(d)),
        p_value,
        N,
        seed,
        {"T": T, "null_mean": float(d.mean()), "null_p05": pct[0], "null_p95": pct[2]},
        d if keep_null else None,
    )


def _lag1_counts(ts: SeriesLike, min_len: int):
    x = values_of(ts)
    T = x.shape[0]
    if T < min_len:
        raise SeriesTooShortError(f"need at least {min_len} values, got {T}")
    ups, turns, ties = kernels.updown_turning_counts(x, np.array([1], dtype=np.int64))
    if ties[0]:
        raise TieError("equal consecutive values; preprocess with jitter")
    return T, int(turns[0]), int(ups[0])


def _moment_test(name, observed, mean, var, extra) -> TestResult:
    z = (observed - mean) / sqrt(var)
    extra = dict(extra, z=z, null_mean=mean, null_variance=var)
    return TestResult(name, observed, mean, two_sided_normal_p(z), 0, None, extra)


def coin_toss_test(ts: SeriesLike, exact: bool = False) -> Tuple[TestResult, TestResult]:
    """Turning points and up-steps at lag 1 against fair-coin binomials.

    Under Brownian motion the ``T - 2`` turning-point indicators and the
    ``T - 1`` up-step indicators are independent fair coins. With
    ``exact=True`` the p-values come from the exact binomial instead of the
    normal approximation (intended for T < 200).
    """
    T, V, U = _lag1_counts(ts, 3)
    out = []
    for name, k, m in (("turning_points", V, T - 2), ("up_steps", U, T - 1)):
        r = _moment_test(name, k, m / 2.0, m / 4.0, {"trials": m, "rate": k / m})
        if exact:
            from scipy.stats import binomtest

            r.p_value = float(binomtest(k, m, 0.5).pvalue)
            r.extra["exact"] = 1.0
        out.append(r)
    return out[0], out[1]


def bienayme_moments(T: int) -> dict:
    """Null mean and variance of turning-point and up-step counts for an i.i.d. sequence."""
    return {
        "mean_V": 2.0 / 3.0 * (T - 2),
        "var_V": 8.0 / 45.0 * (T - 2) + 1.0 / 30.0,
        "mean_U": 0.5 * (T - 1),
        "var_U": (T - 1) / 12.0 + 1.0 / 6.0,
    }


def bienayme_test(ts: SeriesLike) -> Tuple[TestResult, TestResult]:
    """Turning-point count ``V`` and up-step count ``U`` against an i.i.d. null."""
    T, V, U = _lag1_counts(ts, 5)
    m = bienayme_moments(T)
    return (
        _moment_test("turning_points_iid", V, m["mean_V"], m["var_V"], {"T": T}),
        _moment_test("up_steps_iid", U, m["mean_U"], m["var_U"], {"T": T}),
    )


@dataclass
class VarianceLagTable:
    lags: Tuple[int, ...]
    var_alpha: np.ndarray
    var_beta: np.ndarray
    mean_alpha: np.ndarray
    mean_beta: np.ndarray
    trials: int
    T: int
    seed: int
    model: dict
    warning: Optional[str] = None

    @property
    def slope_alpha(self) -> float:
        return _slope(self.lags, self.var_alpha)

    @property
    def slope_beta(self) -> float:
        return _slope(self.lags, self.var_beta)

    def rows(self):
        return [
            (d, float(va), float(vb))
            for d, va, vb in zip(self.lags, self.var_alpha, self.var_beta)
        ]

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "T": self.T,
            "trials": self.trials,
            "seed": self.seed,
            "warning": self.warning,
            "slope_alpha": self.slope_alpha,
            "slope_beta": self.slope_beta,
            "rows": [
                {"lag": d, "var_alpha": va, "var_beta": vb, "mean_alpha": float(ma), "mean_beta": float(mb)}
                for (d, va, vb), ma, mb in zip(self.rows(), self.mean_alpha, self.mean_beta)
            ],
        }


def _slope(x, y) -> float:
    if len(x) < 2:
        return float("nan")
    return float(np.polyfit(np.asarray(x, dtype=float), np.asarray(y, dtype=float), 1)[0])


def variance_vs_lag(
    model: ModelSpec,
    T: int,
    trials: int,
    lags: Iterable[int] = range(1, 11),
    seed: int = 0,
    *,
    workers: int = 1,
) -> VarianceLagTable:
    """Empirical variance of ``alpha(d)`` and ``beta(d)`` across simulated trajectories."""
    lags = check_lags(lags)
    seed = check_seed(seed)
    if T < 2 * lags[-1] + 1:
        raise SeriesTooShortError(f"T={T} too short for lag {lags[-1]}")
    if trials < 1:
        raise ValueError("trials must be positive")
    lag_arr = np.array(lags, dtype=np.int64)
    a_den = (T - 2 * lag_arr).astype(float)
    b_den = (T - lag_arr).astype(float)

    def stats(x):
        ups, turns, _ = kernels.updown_turning_counts(x, lag_arr)
        return np.concatenate((turns / a_den, 2.0 * ups / b_den - 1.0))

    res = np.array(monte_carlo(model, trials, stats, seed=seed, T=T, workers=workers))
    L = len(lags)
    alpha, beta = res[:, :L], res[:, L:]
    warning = None
    if trials < 2:
        warning = "fewer than 2 trials: variances set to 0"
        warnings.warn(warning, RuntimeWarning, stacklevel=2)
        va = vb = np.zeros(L)
    else:
        va, vb = alpha.var(axis=0, ddof=1), beta.var(axis=0, ddof=1)
    return VarianceLagTable(
        lags, va, vb, alpha.mean(axis=0), beta.mean(axis=0), trials, T, seed,
        model.with_(T=T, seed=seed).describe(), warning,
    )


def _turning(p, i) -> bool:
    return (p[i] - p[i - 1]) * (p[i + 1] - p[i]) < 0


def permutation_count_oracle(
    n: int,
    predicate: Literal["two_interior_turning_points", "turning_at_second_and_second_last"],
) -> int:
    """Number of permutations of length ``n`` satisfying ``predicate``, by enumeration.

    ``two_interior_turning_points``: exactly two of the interior positions
    ``2..n-1`` are local extrema. ``turning_at_second_and_second_last``:
    positions 2 and ``n-1`` are both local extrema.
    """
    if not 1 <= n <= 7:
        raise ValueError(f"n must be in 1..7, got {n}")
    if predicate == "two_interior_turning_points":
        test = lambda p: sum(_turning(p, i) for i in range(1, n - 1)) == 2
    elif predicate == "turning_at_second_and_second_last":
        if n < 3:
            return 0
        test = lambda p: _turning(p, 1) and _turning(p, n - 2)
    else:
        raise ValueError(f"unknown predicate {predicate!r}")
    return sum(1 for p in permutations(range(n)) if test(p))
