"""Order patterns: encoding, numbering and frequency estimation.

Patterns of order ``n`` are permutations of ``1..n`` written as rank
sequences (``1243`` means the third value is the largest). They are numbered
``1..n!`` in lexicographic order, so for ``n=4`` pattern 1 is ``1234`` and
pattern 24 is ``4321``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations
from math import factorial
from typing import Iterable, Sequence, Tuple, Union

import numpy as np

from ordpat import kernels
from ordpat.errors import SeriesTooShortError, TieError
from ordpat.series import SeriesLike, values_of

MIN_ORDER = 2
MAX_ORDER = 6


def check_order(n: int) -> int:
    n = int(n)
    if not MIN_ORDER <= n <= MAX_ORDER:
        raise ValueError(f"order must be in {MIN_ORDER}..{MAX_ORDER}, got {n}")
    return n


def check_lags(lags: Union[int, Iterable[int]]) -> Tuple[int, ...]:
    if isinstance(lags, (int, np.integer)):
        lags = (int(lags),)
    out = tuple(sorted({int(d) for d in lags}))
    if not out:
        raise ValueError("lag set is empty")
    if out[0] < 1:
        raise ValueError(f"lags must be positive, got {out}")
    return out


@dataclass(frozen=True, order=True)
class PatternIndex:
    """A pattern of order ``order`` identified by its 1-based lexicographic number."""

    order: int
    index: int

    def __post_init__(self):
        check_order(self.order)
        if not 1 <= self.index <= factorial(self.order):
            raise ValueError(f"index must be in 1..{factorial(self.order)}, got {self.index}")

    @property
    def permutation(self) -> Tuple[int, ...]:
        return index_to_permutation(self)

    def __str__(self):
        return "".join(map(str, self.permutation))


@lru_cache(maxsize=None)
def pattern_strings(n: int) -> Tuple[str, ...]:
    """All patterns of order ``n`` as strings, position ``i`` holding number ``i + 1``."""
    return tuple("".join(map(str, p)) for p in permutations(range(1, check_order(n) + 1)))


def _as_index(p) -> PatternIndex:
    return p if isinstance(p, PatternIndex) else PatternIndex(*p)


def encode_pattern(window: Sequence[float]) -> PatternIndex:
    """Pattern realized by ``window``: ``pi(j) < pi(k)`` iff ``window[j] < window[k]``."""
    w = np.asarray(window, dtype=np.float64)
    n = check_order(w.shape[0])
    code = 0
    for j in range(n - 1):
        later = w[j + 1 :]
        if (later == w[j]).any():
            raise TieError(f"tie in window {w.tolist()}")
        code += int((later < w[j]).sum()) * factorial(n - 1 - j)
    return PatternIndex(n, code + 1)


def index_to_permutation(p) -> Tuple[int, ...]:
    """Rank sequence of a pattern, inverting the lexicographic numbering."""
    p = _as_index(p)
    n, rest = p.order, p.index - 1
    pool = list(range(1, n + 1))
    out = []
    for j in range(n):
        q, rest = divmod(rest, factorial(n - 1 - j))
        out.append(pool.pop(q))
    return tuple(out)


def negate_index(p) -> PatternIndex:
    """Pattern of the value-negated window (all order relations reversed)."""
    p = _as_index(p)
    return PatternIndex(p.order, factorial(p.order) + 1 - p.index)


def reverse_index(p) -> PatternIndex:
    """Pattern of the same window read backwards in time."""
    p = _as_index(p)
    return encode_pattern(index_to_permutation(p)[::-1])


def permutation_map(n: int, fn) -> np.ndarray:
    """0-based array ``m`` with ``m[i] = fn(PatternIndex(n, i + 1)).index - 1``."""
    return np.array([fn(PatternIndex(n, i + 1)).index - 1 for i in range(factorial(n))])


@dataclass(frozen=True)
class PatternDistribution:
    """Relative pattern frequencies of order ``order`` pooled over ``lags``."""

    order: int
    lags: Tuple[int, ...]
    probabilities: np.ndarray
    window_count: int

    def __post_init__(self):
        p = np.array(self.probabilities, dtype=np.float64)
        if p.shape != (factorial(self.order),):
            raise ValueError(f"need {factorial(self.order)} probabilities, got shape {p.shape}")
        p.setflags(write=False)
        object.__setattr__(self, "probabilities", p)
        object.__setattr__(self, "lags", tuple(self.lags))

    def __getitem__(self, pattern: Union[str, int]) -> float:
        """Probability by pattern string (``"132"``) or 1-based number."""
        if isinstance(pattern, str):
            return float(self.probabilities[pattern_strings(self.order).index(pattern)])
        return float(self.probabilities[int(pattern) - 1])

    @property
    def patterns(self) -> Tuple[str, ...]:
        return pattern_strings(self.order)

    def to_rows(self):
        """``(index, pattern, probability)`` rows for CSV export."""
        return [(i + 1, s, float(p)) for i, (s, p) in enumerate(zip(self.patterns, self.probabilities))]

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "lags": list(self.lags),
            "window_count": int(self.window_count),
            "probabilities": {s: float(p) for s, p in zip(self.patterns, self.probabilities)},
        }


def pattern_counts(x: np.ndarray, n: int, lags: Sequence[int]) -> np.ndarray:
    """Integer pattern counts, one row per lag; raises on ties or short input."""
    n = check_order(n)
    lags = check_lags(lags)
    need = (n - 1) * lags[-1] + 1
    if x.shape[0] < need:
        raise SeriesTooShortError(
            f"order {n} at lag {lags[-1]} needs at least {need} values, got {x.shape[0]}"
        )
    counts, ties = kernels.pattern_counts(x, n, np.array(lags, dtype=np.int64))
    if ties.any():
        raise TieError(
            f"{int(ties.sum())} windows contain equal values; preprocess with jitter"
        )
    return counts


def pattern_frequencies(ts: SeriesLike, n: int, d: int) -> PatternDistribution:
    """Relative frequencies of all order-``n`` patterns at lag ``d``, every start offset."""
    x = values_of(ts)
    counts = pattern_counts(x, n, (d,))[0]
    w = int(counts.sum())
    return PatternDistribution(n, (int(d),), counts / w, w)


def lag_averaged_frequencies(ts: SeriesLike, n: int, lags: Iterable[int]) -> PatternDistribution:
    """Arithmetic mean of the per-lag frequency vectors."""
    x = values_of(ts)
    lags = check_lags(lags)
    counts = pattern_counts(x, n, lags)
    w = counts.sum(axis=1)
    probs = (counts / w[:, None]).mean(axis=0)
    return PatternDistribution(n, lags, probs, int(w.sum()))


def frequency_table(ts: SeriesLike, n: int, lags: Iterable[int]):
    """Per-lag frequency vectors as ``{lag: PatternDistribution}`` (one column per lag)."""
    x = values_of(ts)
    lags = check_lags(lags)
    counts = pattern_counts(x, n, lags)
    return {
        d: PatternDistribution(n, (d,), c / c.sum(), int(c.sum())) for d, c in zip(lags, counts)
    }

