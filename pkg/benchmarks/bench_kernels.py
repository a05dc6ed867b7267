"""Compare the compiled kernels with the pure-Python fallback.

Run ``python benchmarks/bench_kernels.py [--T 100000] [--repeat 5]``. Prints the
best-of-``repeat`` wall time per kernel for both backends and the speedup,
after checking that both return identical results.
"""

import argparse
import timeit

import numpy as np

from ordpat import _pykernels as py

try:
    from ordpat import _kernels as cy
except ImportError:
    cy = None


def cases(T, rng):
    x = np.cumsum(rng.standard_normal(T))
    lags = np.array([1, 2, 3], dtype=np.int64)
    codes = np.full((3, T), -1, dtype=np.int64)
    for i, d in enumerate(lags):
        c = py.pattern_codes(x, 4, int(d))
        codes[i, : c.shape[0]] = c
    z = rng.standard_normal(T)
    return {
        "pattern_codes n=4": lambda k: k.pattern_codes(x, 4, 1),
        "pattern_counts n=4 lags 1..3": lambda k: k.pattern_counts(x, 4, lags),
        "updown_turning_counts lags 1..10": lambda k: k.updown_turning_counts(x, np.arange(1, 11, dtype=np.int64)),
        "beta_split_curve lags 1..3": lambda k: k.beta_split_curve(x, lags),
        "distance_curve n=4 lags 1..3": lambda k: k.distance_curve(codes, lags, 4, T),
        "ar1_filter": lambda k: k.ar1_filter(z, 0.99),
    }


def same(a, b):
    if isinstance(a, tuple):
        return all(same(u, v) for u, v in zip(a, b))
    return np.allclose(a, b, rtol=1e-12, atol=1e-12, equal_nan=True)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--T", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if cy is None:
        raise SystemExit("compiled extension not built; run `pip install -e . --no-build-isolation` first")
    rng = np.random.default_rng(0)
    print(f"T = {args.T}, best of {args.repeat}")
    print(f"{'kernel':36s} {'cython ms':>10s} {'python ms':>10s} {'speedup':>8s}")
    for name, fn in cases(args.T, rng).items():
        assert same(fn(cy), fn(py)), f"backends disagree on {name}"
        tc = min(timeit.repeat(lambda: fn(cy), number=1, repeat=args.repeat))
        tp = min(timeit.repeat(lambda: fn(py), number=1, repeat=args.repeat))
        print(f"{name:36s} {tc * 1e3:10.2f} {tp * 1e3:10.2f} {tp / tc:8.1f}x")


if __name__ == "__main__":
    main()
