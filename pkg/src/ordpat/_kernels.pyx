# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels. Contract identical to ``ordpat._pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, NAN

cnp.import_array()

BACKEND = "cython"

cdef long long _FACT[8]
_FACT[0] = 1
for _i in range(1, 8):
    _FACT[_i] = _FACT[_i - 1] * _i


cdef inline long long _code(const double[::1] x, Py_ssize_t s, int n, Py_ssize_t d) noexcept nogil:
    # branchless: comparisons are summed, ties are flagged and checked once
    cdef long long code = 0
    cdef int j, k, c, tie = 0
    cdef double v, u
    for j in range(n - 1):
        v = x[s + j * d]
        c = 0
        for k in range(j + 1, n):
            u = x[s + k * d]
            c += u < v
            tie |= u == v
        code += c * _FACT[n - 1 - j]
    return -1 if tie else code


def pattern_codes(x, int n, Py_ssize_t d):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t w = xv.shape[0] - (n - 1) * d
    if w <= 0:
        return np.empty(0, dtype=np.int64)
    out = np.empty(w, dtype=np.int64)
    cdef long long[::1] ov = out
    cdef Py_ssize_t s
    with nogil:
        for s in range(w):
            ov[s] = _code(xv, s, n, d)
    return out


def pattern_counts(x, int n, lags):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const long long[::1] lv = np.ascontiguousarray(lags, dtype=np.int64)
    cdef Py_ssize_t nl = lv.shape[0]
    counts = np.zeros((nl, _FACT[n]), dtype=np.int64)
    ties = np.zeros(nl, dtype=np.int64)
    cdef long long[:, ::1] cv = counts
    cdef long long[::1] tv = ties
    cdef Py_ssize_t i, s, w, d
    cdef long long c
    with nogil:
        for i in range(nl):
            d = lv[i]
            w = xv.shape[0] - (n - 1) * d
            for s in range(w):
                c = _code(xv, s, n, d)
                if c < 0:
                    tv[i] += 1
                else:
                    cv[i, c] += 1
    return counts, ties


def updown_turning_counts(x, lags):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const long long[::1] lv = np.ascontiguousarray(lags, dtype=np.int64)
    cdef Py_ssize_t nl = lv.shape[0]
    ups = np.zeros(nl, dtype=np.int64)
    turns = np.zeros(nl, dtype=np.int64)
    ties = np.zeros(nl, dtype=np.int64)
    cdef long long[::1] uv = ups
    cdef long long[::1] trv = turns
    cdef long long[::1] tiv = ties
    cdef Py_ssize_t t = xv.shape[0]
    cdef Py_ssize_t i, s, d
    cdef double a
    cdef long long nu, nt, nz
    cdef int up, prev_up
    with nogil:
        for i in range(nl):
            d = lv[i]
            nu = nt = nz = 0
            for s in range(t - d):
                a = xv[s + d] - xv[s]
                up = a > 0
                nu += up
                nz += a == 0
                if s >= d:
                    prev_up = xv[s] - xv[s - d] > 0
                    nt += up != prev_up
            uv[i] = nu
            trv[i] = nt
            tiv[i] = nz
    return ups, turns, ties


def beta_split_curve(x, lags):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const long long[::1] lv = np.ascontiguousarray(lags, dtype=np.int64)
    cdef Py_ssize_t t = xv.shape[0]
    cdef Py_ssize_t nl = lv.shape[0]
    out = np.zeros(t + 1, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, k, d, w, npre, nsuf
    cdef long long total, upre
    cdef long long[::1] cu
    for i in range(nl):
        d = lv[i]
        w = t - d if t > d else 0
        cu_arr = np.zeros(w + 1, dtype=np.int64)
        cu = cu_arr
        with nogil:
            for k in range(w):
                cu[k + 1] = cu[k] + (1 if xv[k + d] > xv[k] else 0)
            total = cu[w]
            for k in range(t + 1):
                npre = k - d
                if npre < 0:
                    npre = 0
                elif npre > w:
                    npre = w
                nsuf = w - (k if k < w else w)
                if npre == 0 or nsuf == 0:
                    ov[k] = NAN
                else:
                    upre = cu[npre]
                    ov[k] += 2.0 * upre / npre - 2.0 * (total - cu[k if k < w else w]) / nsuf
    with nogil:
        for k in range(t + 1):
            ov[k] /= nl
    return out


def distance_curve(codes, lags, int n, Py_ssize_t t):
    cdef const long long[:, ::1] cv = np.ascontiguousarray(codes, dtype=np.int64)
    cdef const long long[::1] lv = np.ascontiguousarray(lags, dtype=np.int64)
    cdef Py_ssize_t nl = lv.shape[0]
    cdef Py_ssize_t m = _FACT[n]
    out = np.empty(t + 1, dtype=np.float64)
    cdef double[::1] ov = out
    pre_arr = np.zeros((nl, m), dtype=np.int64)
    suf_arr = np.zeros((nl, m), dtype=np.int64)
    w_arr = np.zeros(nl, dtype=np.int64)
    span_arr = np.zeros(nl, dtype=np.int64)
    acc_arr = np.zeros(m, dtype=np.float64)
    cdef long long[:, ::1] pre = pre_arr
    cdef long long[:, ::1] suf = suf_arr
    cdef long long[::1] wv = w_arr
    cdef long long[::1] spv = span_arr
    cdef double[::1] acc = acc_arr
    cdef Py_ssize_t i, k, p, s
    cdef long long npre, nsuf
    cdef double dist, diff
    cdef bint undefined
    for i in range(nl):
        spv[i] = (n - 1) * lv[i]
        wv[i] = t - spv[i] if t > spv[i] else 0
    with nogil:
        for i in range(nl):
            for s in range(wv[i]):
                suf[i, cv[i, s]] += 1
        for k in range(t + 1):
            undefined = False
            for p in range(m):
                acc[p] = 0.0
            for i in range(nl):
                npre = k - spv[i]
                if npre < 0:
                    npre = 0
                elif npre > wv[i]:
                    npre = wv[i]
                nsuf = wv[i] - (k if k < wv[i] else wv[i])
                if npre == 0 or nsuf == 0:
                    undefined = True
                    break
                for p in range(m):
                    acc[p] += <double>pre[i, p] / npre - <double>suf[i, p] / nsuf
            if undefined:
                ov[k] = NAN
            else:
                dist = 0.0
                for p in range(m):
                    diff = acc[p] / nl
                    dist += diff * diff
                ov[k] = sqrt(dist)
            # advance split k -> k + 1
            for i in range(nl):
                s = k - spv[i]
                if 0 <= s < wv[i]:
                    pre[i, cv[i, s]] += 1
                if k < wv[i]:
                    suf[i, cv[i, k]] -= 1
    return out


def ar1_filter(z, double phi):
    cdef const double[::1] zv = np.ascontiguousarray(z, dtype=np.float64)
    cdef Py_ssize_t t = zv.shape[0]
    out = np.empty(t, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i
    if t == 0:
        return out
    with nogil:
        ov[0] = zv[0]
        for i in range(1, t):
            ov[i] = phi * ov[i - 1] + zv[i]
    return out
