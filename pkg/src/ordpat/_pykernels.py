"""Pure numpy implementations of the hot kernels.

Selected automatically when the compiled ``ordpat._kernels`` extension is not
importable, or when ``ORDPAT_PURE=1`` is set. Every function here has the same
signature and return contract as its compiled twin.
"""

from math import factorial

import numpy as np
from scipy.signal import lfilter

BACKEND = "python"


def _weights(n):
    return np.array([factorial(n - 1 - j) for j in range(n)], dtype=np.int64)


def pattern_codes(x, n, d):
    """0-based lexicographic pattern index of every window ``x[s], x[s+d], ..., x[s+(n-1)d]``.

    Windows containing equal values get code -1.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    w = x.shape[0] - (n - 1) * d
    if w <= 0:
        return np.empty(0, dtype=np.int64)
    cols = [x[j * d : j * d + w] for j in range(n)]
    fw = _weights(n)
    code = np.zeros(w, dtype=np.int64)
    tie = np.zeros(w, dtype=bool)
    for j in range(n - 1):
        c = np.zeros(w, dtype=np.int64)
        for k in range(j + 1, n):
            c += cols[k] < cols[j]
            tie |= cols[k] == cols[j]
        code += c * fw[j]
    code[tie] = -1
    return code


def pattern_counts(x, n, lags):
    """Counts of each pattern per lag, shape ``(len(lags), n!)``, plus tie-window counts."""
    lags = np.asarray(lags, dtype=np.int64)
    m = factorial(n)
    counts = np.zeros((lags.shape[0], m), dtype=np.int64)
    ties = np.zeros(lags.shape[0], dtype=np.int64)
    for i, d in enumerate(lags):
        codes = pattern_codes(x, n, int(d))
        bad = codes < 0
        ties[i] = int(bad.sum())
        counts[i] = np.bincount(codes[~bad], minlength=m)
    return counts, ties


def updown_turning_counts(x, lags):
    """Per lag: number of up-steps ``x[t] < x[t+d]``, turning points of ``(x[t], x[t+d], x[t+2d])``,
    and zero increments (ties)."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    lags = np.asarray(lags, dtype=np.int64)
    ups = np.zeros(lags.shape[0], dtype=np.int64)
    turns = np.zeros(lags.shape[0], dtype=np.int64)
    ties = np.zeros(lags.shape[0], dtype=np.int64)
    for i, d in enumerate(lags):
        d = int(d)
        if x.shape[0] <= d:
            continue
        inc = x[d:] - x[:-d]
        up = inc > 0
        ups[i] = int(up.sum())
        ties[i] = int((inc == 0).sum())
        if inc.shape[0] > d:
            turns[i] = int((up[:-d] != up[d:]).sum())
    return ups, turns, ties


def beta_split_curve(x, lags):
    """Lag-averaged up-down balance before minus after each split.

    Entry ``k`` (``0 <= k <= T``) compares ``x[:k]`` with ``x[k:]``; NaN where
    some lag has no pair on one side.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    t = x.shape[0]
    k = np.arange(t + 1)
    out = np.zeros(t + 1)
    undefined = np.zeros(t + 1, dtype=bool)
    for d in lags:
        d = int(d)
        w = max(t - d, 0)
        up = (x[d:] > x[: t - d]) if w else np.zeros(0, dtype=bool)
        cu = np.concatenate(([0], np.cumsum(up, dtype=np.int64)))
        npre = np.clip(k - d, 0, w)
        nsuf = w - np.minimum(k, w)
        upre = cu[npre]
        usuf = cu[w] - cu[np.minimum(k, w)]
        bad = (npre == 0) | (nsuf == 0)
        undefined |= bad
        with np.errstate(invalid="ignore", divide="ignore"):
            out += (2.0 * upre / npre) - (2.0 * usuf / nsuf)
    out /= len(lags)
    out[undefined] = np.nan
    return out


def distance_curve(codes, lags, n, t):
    """Euclidean distance between lag-averaged pattern distributions of ``x[:k]`` and ``x[k:]``.

    ``codes`` is a 2-D int64 array, one row per lag, padded with -1 past each
    lag's window count. Returns length ``t + 1``; NaN where undefined.
    """
    m = factorial(n)
    lags = np.asarray(lags, dtype=np.int64)
    k = np.arange(t + 1)
    pre_avg = np.zeros((t + 1, m))
    suf_avg = np.zeros((t + 1, m))
    undefined = np.zeros(t + 1, dtype=bool)
    for i, d in enumerate(lags):
        span = (n - 1) * int(d)
        w = max(t - span, 0)
        row = codes[i, :w]
        onehot = np.zeros((w + 1, m))
        onehot[np.arange(1, w + 1), row] = 1.0
        cum = np.cumsum(onehot, axis=0)
        npre = np.clip(k - span, 0, w)
        nsuf = w - np.minimum(k, w)
        undefined |= (npre == 0) | (nsuf == 0)
        with np.errstate(invalid="ignore", divide="ignore"):
            pre_avg += cum[npre] / npre[:, None]
            suf_avg += (cum[w] - cum[np.minimum(k, w)]) / nsuf[:, None]
    diff = (pre_avg - suf_avg) / lags.shape[0]
    out = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    out[undefined] = np.nan
    return out


def ar1_filter(z, phi):
    """``x[0] = z[0]``, ``x[t] = phi * x[t-1] + z[t]``."""
    z = np.ascontiguousarray(z, dtype=np.float64)
    return lfilter([1.0], [1.0, -phi], z)
