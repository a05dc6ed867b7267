"""Change-point curves, global and recursive search, local windows, and null calibration.

A split ``k`` (``1 <= k < T``) separates the first ``k`` values from the
remaining ``T - k``. Curves are stored for every ``k = 0..T`` with NaN where
they are undefined, and weighted by ``c_k = 2 sqrt(k (T - k)) / T``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from math import factorial
from typing import Iterable, Literal, Optional, Tuple

import numpy as np

from ordpat import kernels
from ordpat._rng import check_seed
from ordpat.errors import DataError, SeriesTooShortError, TieError
from ordpat.hypotest import TestResult
from ordpat.models import ModelSpec, monte_carlo
from ordpat.ordstats import xlogx
from ordpat.patterns import check_lags, check_order
from ordpat.series import SeriesLike, TimeSeries, values_of

Method = Literal["mean", "order_distance", "beta", "alpha", "entropy", "cond_entropy"]
SCALAR_STATISTICS = ("beta", "alpha", "entropy", "cond_entropy")
BASE_MARGIN = 250


def weights(T: int) -> np.ndarray:
    k = np.arange(T + 1, dtype=np.float64)
    return 2.0 * np.sqrt(k * (T - k)) / T


def _pattern_order(method: str, order: int) -> int:
    return {"mean": 2, "beta": 2, "alpha": 3, "cond_entropy": 3}.get(method, order)


def default_margin(T: int, method: str = "beta", lags: Iterable[int] = (1,), order: int = 4) -> int:
    """Splits closer than this to either end are excluded from the search.

    ``max(250, 5 (n - 1) max(lag))``, capped at ``T // 4`` so that short
    series keep a nonempty search range.
    """
    n = _pattern_order(method, order)
    base = max(BASE_MARGIN, 5 * (n - 1) * max(lags))
    return max(1, min(base, T // 4))


@dataclass(frozen=True)
class ChangeCurve:
    method: str
    values: np.ndarray
    weights: np.ndarray
    margin: int
    order: Optional[int] = None
    lags: Tuple[int, ...] = ()
    labels: Optional[tuple] = None
    offset: int = 0

    @property
    def T(self) -> int:
        return self.values.shape[0] - 1

    def admissible(self, margin: Optional[int] = None) -> np.ndarray:
        m = self.margin if margin is None else margin
        k = np.arange(self.T + 1)
        return (k >= max(m, 1)) & (k <= self.T - max(m, 1)) & np.isfinite(self.values)

    def label(self, k: int) -> Optional[str]:
        """Label of the last value before split ``k``."""
        return None if self.labels is None or k < 1 else self.labels[k - 1]

    def to_rows(self):
        """``(k, label, value, c_k)`` for every split where the curve is defined."""
        return [
            (self.offset + int(k), self.label(int(k)), float(self.values[k]), float(self.weights[k]))
            for k in np.flatnonzero(np.isfinite(self.values))
        ]


@dataclass(frozen=True)
class ChangePoint:
    index: int
    label: Optional[str]
    value: float
    sign: Literal["max", "min"]

    def to_dict(self) -> dict:
        return {"index": self.index, "label": self.label, "value": self.value, "sign": self.sign}


def _labels(ts: SeriesLike):
    return ts.labels if isinstance(ts, TimeSeries) else None


def _mean_values(x: np.ndarray) -> np.ndarray:
    T = x.shape[0]
    cs = np.concatenate(([0.0], np.cumsum(x)))
    k = np.arange(T + 1)
    out = np.full(T + 1, np.nan)
    inner = slice(1, T)
    out[inner] = np.abs(cs[inner] / k[inner] - (cs[T] - cs[inner]) / (T - k[inner]))
    return out * weights(T)


def mean_change_curve(ts: SeriesLike, margin: Optional[int] = None) -> ChangeCurve:
    """``c_k |mean(x[:k]) - mean(x[k:])|``."""
    x = values_of(ts)
    if x.shape[0] < 4:
        raise SeriesTooShortError(f"need at least 4 values, got {x.shape[0]}")
    T = x.shape[0]
    m = default_margin(T, "mean") if margin is None else margin
    return ChangeCurve("mean", _mean_values(x), weights(T), m, labels=_labels(ts))


def _codes(x: np.ndarray, n: int, d: int) -> np.ndarray:
    codes = kernels.pattern_codes(x, n, d)
    if (codes < 0).any():
        raise TieError(f"equal values within order-{n} windows at lag {d}; preprocess with jitter")
    return codes


def _order_values(x: np.ndarray, n: int, lags: Tuple[int, ...]) -> np.ndarray:
    T = x.shape[0]
    padded = np.full((len(lags), T), -1, dtype=np.int64)
    for i, d in enumerate(lags):
        c = _codes(x, n, d)
        padded[i, : c.shape[0]] = c
    return kernels.distance_curve(padded, np.array(lags, dtype=np.int64), n, T) * weights(T)


def order_change_curve(
    ts: SeriesLike, n: int = 4, lag_set: Iterable[int] = (1, 2, 3), margin: Optional[int] = None
) -> ChangeCurve:
    """``c_k ||q_k - q~_k||`` for lag-averaged order-``n`` pattern distributions before and after ``k``."""
    x = values_of(ts)
    n = check_order(n)
    lags = check_lags(lag_set)
    T = x.shape[0]
    if T < 2 * ((n - 1) * lags[-1] + 1):
        raise SeriesTooShortError(f"series of length {T} too short for order {n} at lag {lags[-1]}")
    m = default_margin(T, "order_distance", lags, n) if margin is None else margin
    return ChangeCurve("order_distance", _order_values(x, n, lags), weights(T), m, n, lags, _labels(ts))


class _RangeCounts:
    """Pattern counts of order ``n`` at lag ``d`` over arbitrary index ranges ``[a, b)``."""

    def __init__(self, x: np.ndarray, n: int, d: int):
        codes = _codes(x, n, d)
        self.span = (n - 1) * d
        self.w = codes.shape[0]
        m = factorial(n)
        onehot = np.zeros((self.w + 1, m))
        onehot[np.arange(1, self.w + 1), codes] = 1.0
        self.cum = np.cumsum(onehot, axis=0)

    def probs(self, a: np.ndarray, b: np.ndarray):
        """Relative frequencies over windows starting in ``[a, b - span)``; NaN rows when empty."""
        lo = np.clip(a, 0, self.w)
        hi = np.clip(b - self.span, lo, self.w)
        cnt = hi - lo
        with np.errstate(invalid="ignore", divide="ignore"):
            p = (self.cum[hi] - self.cum[lo]) / cnt[:, None]
        p[cnt == 0] = np.nan
        return p


def _stat_on_ranges(x, statistic, lags, a, b, order=3) -> np.ndarray:
    """Lag-averaged statistic on each range ``x[a_i:b_i]``."""
    if statistic == "mean":
        cs = np.concatenate(([0.0], np.cumsum(x)))
        with np.errstate(invalid="ignore", divide="ignore"):
            out = (cs[b] - cs[a]) / (b - a)
        out[b <= a] = np.nan
        return out
    acc = np.zeros(a.shape[0])
    for d in lags:
        if statistic == "beta":
            p = _RangeCounts(x, 2, d).probs(a, b)
            v = 2.0 * p[:, 0] - 1.0
        elif statistic == "alpha":
            p = _RangeCounts(x, 3, d).probs(a, b)
            v = 1.0 - p[:, 0] - p[:, 5]
        elif statistic == "entropy":
            p = _RangeCounts(x, order, d).probs(a, b)
            v = -np.where(np.isnan(p), np.nan, xlogx(np.nan_to_num(p))).sum(axis=1)
        elif statistic == "cond_entropy":
            p3 = _RangeCounts(x, 3, d).probs(a, b)
            p12 = _RangeCounts(x, 2, d).probs(a, b)[:, 0]
            groups = np.stack(
                [p3[:, 0], p3[:, 1] + p3[:, 3], p3[:, 2] + p3[:, 4], p3[:, 5]], axis=1
            )
            g = np.nan_to_num(groups)
            q = np.nan_to_num(p12)
            v = -xlogx(g).sum(axis=1) + xlogx(q) + xlogx(1.0 - q)
            v[np.isnan(p12) | np.isnan(p3[:, 0])] = np.nan
        else:
            raise ValueError(f"unknown statistic {statistic!r}")
        acc += v
    return acc / len(lags)


def _scalar_values(x, statistic, lags, order=3) -> np.ndarray:
    T = x.shape[0]
    if statistic == "beta":
        ups, _, ties = kernels.updown_turning_counts(x, np.array(lags, dtype=np.int64))
        if ties.any():
            raise TieError("equal values at some lag; preprocess with jitter")
        diff = kernels.beta_split_curve(x, np.array(lags, dtype=np.int64))
    else:
        k = np.arange(T + 1)
        zero = np.zeros(T + 1, dtype=np.int64)
        full = np.full(T + 1, T, dtype=np.int64)
        diff = _stat_on_ranges(x, statistic, lags, zero, k, order) - _stat_on_ranges(
            x, statistic, lags, k, full, order
        )
    return diff * weights(T)


def scalar_change_curve(
    ts: SeriesLike,
    statistic: Literal["beta", "alpha", "entropy", "cond_entropy"] = "beta",
    lag_set: Iterable[int] = (1, 2, 3),
    margin: Optional[int] = None,
    order: int = 3,
) -> ChangeCurve:
    """Signed ``c_k (s(x[:k]) - s(x[k:]))`` for a lag-averaged scalar statistic ``s``.

    ``entropy`` is the permutation entropy of order ``order``.
    """
    if statistic not in SCALAR_STATISTICS:
        raise ValueError(f"statistic must be one of {SCALAR_STATISTICS}, got {statistic!r}")
    x = values_of(ts)
    lags = check_lags(lag_set)
    n = _pattern_order(statistic, check_order(order))
    T = x.shape[0]
    if T < 2 * ((n - 1) * lags[-1] + 1):
        raise SeriesTooShortError(f"series of length {T} too short for {statistic} at lag {lags[-1]}")
    m = default_margin(T, statistic, lags, order) if margin is None else margin
    vals = _scalar_values(x, statistic, lags, order)
    return ChangeCurve(statistic, vals, weights(T), m, n, lags, _labels(ts))


def local_change_curve(
    ts: SeriesLike,
    statistic: Literal["mean", "beta", "alpha", "entropy", "cond_entropy"] = "mean",
    m: int = 100,
    lag_set: Iterable[int] = (1, 2, 3),
    order: int = 3,
) -> ChangeCurve:
    """``s(x[k-m:k]) - s(x[k:k+m])`` for ``m <= k <= T - m``; no ``c_k`` weighting."""
    x = values_of(ts)
    T = x.shape[0]
    if m < 1:
        raise ValueError("window m must be positive")
    if T < 2 * m:
        raise SeriesTooShortError(f"need at least 2m = {2 * m} values, got {T}")
    lags = check_lags(lag_set) if statistic != "mean" else ()
    k = np.arange(m, T - m + 1)
    vals = np.full(T + 1, np.nan)
    vals[k] = _stat_on_ranges(x, statistic, lags, k - m, k, order) - _stat_on_ranges(
        x, statistic, lags, k, k + m, order
    )
    n = None if statistic == "mean" else _pattern_order(statistic, order)
    return ChangeCurve(f"local_{statistic}", vals, np.ones(T + 1), m, n, lags, _labels(ts))


def find_change_point(curve: ChangeCurve, margin: Optional[int] = None) -> ChangePoint:
    """Split with the largest ``|value|`` inside the admissible range; ties go to the smaller index."""
    ok = curve.admissible(margin)
    if not ok.any():
        raise DataError("no admissible split (curve undefined or margin too large)")
    a = np.where(ok, np.abs(curve.values), -np.inf)
    k = int(np.argmax(a))
    v = float(curve.values[k])
    return ChangePoint(curve.offset + k, curve.label(k), v, "max" if v >= 0 else "min")


def _curve(x, method, lags, order, labels=None, margin=None) -> ChangeCurve:
    if method == "mean":
        return mean_change_curve(TimeSeries(x, labels), margin)
    if method == "order_distance":
        return order_change_curve(TimeSeries(x, labels), order, lags, margin)
    return scalar_change_curve(TimeSeries(x, labels), method, lags, margin, 3 if method != "entropy" else order)


def _span(method, lags, order) -> int:
    if method == "mean":
        return 1
    return (_pattern_order(method, order) - 1) * max(lags) + 1


def recursive_segmentation(
    ts: SeriesLike,
    method: Method = "beta",
    lag_set: Iterable[int] = (1, 2, 3),
    max_points: int = 3,
    min_segment: Optional[int] = None,
    *,
    margin: Optional[int] = None,
    order: int = 4,
) -> list:
    """Binary segmentation: split the longest segment at its best admissible split, repeat.

    A split is admissible when it respects the curve margin and leaves both
    parts at least ``min_segment`` long. If the longest segment admits no split
    the next longest is tried. Change points are returned in discovery order
    with global indices.
    """
    x = values_of(ts)
    labels = _labels(ts)
    T = x.shape[0]
    lags = check_lags(lag_set) if method != "mean" else (1,)
    span = _span(method, lags, order)
    if min_segment is None:
        min_segment = max(2 * span, 2 * (margin or default_margin(T, method, lags, order)))
    if min_segment < span:
        raise ValueError(f"min_segment must be >= the pattern window span {span}")
    if margin is not None and min_segment < 2 * margin:
        raise ValueError(f"min_segment must be >= 2 * margin = {2 * margin}")

    segments = [(0, T)]
    points = []
    saw_signal = False
    while len(points) < max_points:
        for a, b in sorted(segments, key=lambda s: (s[0] - s[1], s[0])):
            L = b - a
            if L < 2 * min_segment:
                continue
            sub_labels = None if labels is None else labels[a:b]
            try:
                curve = _curve(x[a:b], method, lags, order, sub_labels, margin)
            except SeriesTooShortError:
                continue
            ok = curve.admissible()
            k = np.arange(L + 1)
            ok &= (k >= min_segment) & (L - k >= min_segment)
            if not ok.any():
                continue
            vals = np.abs(curve.values)
            if np.nanmax(np.where(ok, vals, np.nan)) == 0:
                continue
            saw_signal = True
            best = int(np.argmax(np.where(ok, vals, -np.inf)))
            v = float(curve.values[best])
            points.append(ChangePoint(a + best, curve.label(best), v, "max" if v >= 0 else "min"))
            segments.remove((a, b))
            segments += [(a, a + best), (a + best, b)]
            break
        else:
            break
    if not points and not saw_signal:
        warnings.warn("no change point: all admissible curve values are zero", RuntimeWarning, stacklevel=2)
    return points


def curve_maximum(x: np.ndarray, method: Method, lags, order: int = 4, margin: Optional[int] = None) -> float:
    """``max |curve|`` over the admissible splits of one trajectory."""
    c = _curve(x, method, lags, order, None, margin)
    ok = c.admissible()
    return float(np.abs(c.values[ok]).max()) if ok.any() else float("nan")


def changepoint_significance(
    observed_max: float,
    null: ModelSpec,
    T: int,
    method: Method = "beta",
    lag_set: Iterable[int] = (1, 2, 3),
    N: int = 1000,
    seed: int = 0,
    *,
    margin: Optional[int] = None,
    order: int = 4,
    workers: int = 1,
    keep_null: bool = False,
) -> TestResult:
    """Share of null trajectories whose curve maximum exceeds ``observed_max``."""
    if N < 100:
        raise ValueError(f"need at least 100 simulations, got {N}")
    seed = check_seed(seed)
    lags = check_lags(lag_set) if method != "mean" else (1,)
    mx = np.array(
        monte_carlo(
            null, N, lambda x: curve_maximum(x, method, lags, order, margin), seed=seed, T=T, workers=workers
        )
    )
    p = float(np.count_nonzero(mx > observed_max)) / N
    q = np.percentile(mx, [5, 50, 95])
    return TestResult(
        f"max_abs_{method}_change",
        float(observed_max),
        float(np.median(mx)),
        p,
        N,
        seed,
        {
            "T": T,
            "margin": margin if margin is not None else default_margin(T, method, lags, order),
            "null_p05": q[0],
            "null_p95": q[2],
        },
        mx if keep_null else None,
    )
