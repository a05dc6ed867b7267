"""Hot-kernel backend, chosen once at import.

The compiled extension is preferred; set ``ORDPAT_PURE=1`` to force the numpy
fallback (useful for benchmarking and cross-checking).
"""

import os

if os.environ.get("ORDPAT_PURE", "") not in ("", "0"):
    from ordpat import _pykernels as _impl
else:
    try:
        from ordpat import _kernels as _impl
    except ImportError:  # extension not built
        from ordpat import _pykernels as _impl

BACKEND = _impl.BACKEND

pattern_codes = _impl.pattern_codes
pattern_counts = _impl.pattern_counts
updown_turning_counts = _impl.updown_turning_counts
beta_split_curve = _impl.beta_split_curve
distance_curve = _impl.distance_curve
ar1_filter = _impl.ar1_filter

__all__ = [
    "BACKEND",
    "pattern_codes",
    "pattern_counts",
    "updown_turning_counts",
    "beta_split_curve",
    "distance_curve",
    "ar1_filter",
]
