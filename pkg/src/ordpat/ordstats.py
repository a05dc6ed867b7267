"""Scalar order statistics: up-down balance, turning rate, persistence and entropies.

All logarithms are natural, with ``0 log 0 = 0``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from math import sqrt
from typing import Iterable, Tuple

import numpy as np

from ordpat import kernels
from ordpat.errors import SeriesTooShortError, TieError
from ordpat.patterns import PatternDistribution, check_lags, pattern_counts
from ordpat.series import SeriesLike, values_of


def xlogx(p) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    out = np.zeros_like(p)
    pos = p > 0
    out[pos] = p[pos] * np.log(p[pos])
    return out


def _updown_turning(x: np.ndarray, d: int, need: int):
    if x.shape[0] < need:
        raise SeriesTooShortError(f"lag {d} needs at least {need} values, got {x.shape[0]}")
    ups, turns, ties = kernels.updown_turning_counts(x, np.array([d], dtype=np.int64))
    if ties[0]:
        raise TieError(f"{int(ties[0])} equal pairs at lag {d}; preprocess with jitter")
    return int(ups[0]), int(turns[0])


def up_down_balance(ts: SeriesLike, d: int = 1) -> float:
    """``2 p_12(d) - 1`` where ``p_12(d)`` is the share of pairs with ``x_t < x_{t+d}``."""
    x = values_of(ts)
    ups, _ = _updown_turning(x, d, d + 1)
    return 2.0 * ups / (x.shape[0] - d) - 1.0


def turning_rate(ts: SeriesLike, d: int = 1) -> float:
    """Share of windows ``(x_t, x_{t+d}, x_{t+2d})`` whose middle value is a local extremum."""
    x = values_of(ts)
    _, turns = _updown_turning(x, d, 2 * d + 1)
    return turns / (x.shape[0] - 2 * d)


def persistence(ts: SeriesLike, d: int = 1) -> float:
    """``p_123 + p_321 - 1/3``, i.e. ``2/3`` minus the turning rate."""
    return 2.0 / 3.0 - turning_rate(ts, d)


def permutation_entropy(dist: PatternDistribution) -> float:
    return float(-xlogx(dist.probabilities).sum())


def _cond_entropy_from(p12: float, p3: np.ndarray) -> float:
    # p3 in lexicographic order 123, 132, 213, 231, 312, 321
    groups = np.array([p3[0], p3[1] + p3[3], p3[2] + p3[4], p3[5]])
    return float(-xlogx(groups).sum() + xlogx(p12) + xlogx(1.0 - p12))


def conditional_entropy(ts: SeriesLike, d: int = 1) -> float:
    """Order-3 grouped entropy minus the order-2 entropy at lag ``d``.

    Patterns 132/231 and 213/312 are pooled, so this is the entropy of the
    third value's rank given the first up or down step.
    """
    x = values_of(ts)
    if x.shape[0] < 2 * d + 1:
        raise SeriesTooShortError(f"lag {d} needs at least {2 * d + 1} values, got {x.shape[0]}")
    p12 = (up_down_balance(x, d) + 1.0) / 2.0
    c3 = pattern_counts(x, 3, (d,))[0]
    return _cond_entropy_from(p12, c3 / c3.sum())


def z_scores(alpha: float, beta: float, T: int) -> Tuple[float, float]:
    """Standardized lag-1 turning rate and up-down balance under Brownian motion."""
    if T < 3:
        raise SeriesTooShortError(f"z-scores need T >= 3, got {T}")
    return float((alpha - 0.5) * 2.0 * sqrt(T - 2)), float(beta * sqrt(T - 1))


@dataclass(frozen=True)
class OrderSummary:
    lag_set: Tuple[int, ...]
    alpha: float
    beta: float
    tau: float
    entropy: float
    cond_entropy: float
    T: int
    z_alpha: float
    z_beta: float
    order: int = 3

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lag_set"] = list(self.lag_set)
        return d


def summarize(ts: SeriesLike, lag_set: Iterable[int] = (1,), order: int = 3) -> OrderSummary:
    """Lag-averaged scalar statistics of a series.

    Each statistic is computed per lag and then averaged; the entropy uses
    patterns of length ``order``. The z-scores always use lag 1, since the
    binomial variances behind them only hold there.
    """
    x = values_of(ts)
    lags = check_lags(lag_set)
    T = x.shape[0]
    need = max(2 * lags[-1] + 1, (order - 1) * lags[-1] + 1)
    if T < need:
        raise SeriesTooShortError(f"lag set {lags} needs at least {need} values, got {T}")
    lag_arr = np.array(sorted(set(lags) | {1}), dtype=np.int64)
    ups, turns, ties = kernels.updown_turning_counts(x, lag_arr)
    if ties.any():
        raise TieError("equal values at some lag; preprocess with jitter")
    beta_d = {int(d): 2.0 * u / (T - d) - 1.0 for d, u in zip(lag_arr, ups)}
    alpha_d = {int(d): t / (T - 2 * d) for d, t in zip(lag_arr, turns)}

    c3 = pattern_counts(x, 3, lags)
    cond = [
        _cond_entropy_from((beta_d[d] + 1.0) / 2.0, c / c.sum()) for d, c in zip(lags, c3)
    ]
    cn = c3 if order == 3 else pattern_counts(x, order, lags)
    ent = [float(-xlogx(c / c.sum()).sum()) for c in cn]

    alpha = float(np.mean([alpha_d[d] for d in lags]))
    beta = float(np.mean([beta_d[d] for d in lags]))
    za, zb = z_scores(alpha_d[1], beta_d[1], T)
    return OrderSummary(
        lag_set=lags,
        alpha=alpha,
        beta=beta,
        tau=2.0 / 3.0 - alpha,
        entropy=float(np.mean(ent)),
        cond_entropy=float(np.mean(cond)),
        T=T,
        z_alpha=za,
        z_beta=zb,
        order=order,
    )


def sliding_statistic(
    ts: SeriesLike, statistic: str = "alpha", window: int = 1000, step: int = 1000, d: int = 1
) -> Tuple[np.ndarray, np.ndarray]:
    """A statistic on consecutive windows ``x[s:s+window]``, ``s = 0, step, 2 step, ...``.

    Returns ``(starts, values)``; useful for epoch-wise turning rates.
    """
    funcs = {
        "alpha": turning_rate,
        "beta": up_down_balance,
        "tau": persistence,
        "cond_entropy": conditional_entropy,
    }
    if statistic not in funcs:
        raise ValueError(f"statistic must be one of {sorted(funcs)}, got {statistic!r}")
    x = values_of(ts)
    if window < 1 or step < 1:
        raise ValueError("window and step must be positive")
    starts = np.arange(0, x.shape[0] - window + 1, step)
    fn = funcs[statistic]
    return starts, np.array([fn(x[s : s + window], d) for s in starts])
