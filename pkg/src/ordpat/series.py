"""Loading, validating and preprocessing univariate series."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Optional, Sequence, Union

import numpy as np

from ordpat._rng import substream
from ordpat.errors import DataError, TieError

MISSING_MARKERS = frozenset({"", ".", "na", "n/a", "nan", "null", "none"})

# Date segments of the daily WTI closing-price series, usable as range presets.
WTI_SEGMENTS = {
    "wti-1986-2019": ("1986-01-02", "2019-09-03"),
    "wti-1986-2001": ("1986-01-02", "2001-10-16"),
    "wti-2001-08": ("2001-10-17", "2008-07-07"),
    "wti-2009-14": ("2008-12-26", "2014-07-22"),
    "wti-2015-19": ("2014-07-23", "2019-09-03"),
}


@dataclass(frozen=True)
class TimeSeries:
    """Ordered real values with optional date labels.

    Missing observations loaded from a file are stored as NaN until
    :func:`preprocess` removes them; analysis routines reject non-finite values.
    """

    values: np.ndarray
    labels: Optional[tuple] = None
    name: str = ""

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.ndim != 1:
            raise DataError(f"series must be one-dimensional, got shape {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != v.shape[0]:
                raise DataError(
                    f"labels ({len(labels)}) and values ({v.shape[0]}) differ in length"
                )
            object.__setattr__(self, "labels", labels)

    def __len__(self):
        return self.values.shape[0]

    @property
    def has_missing(self) -> bool:
        return bool(np.isnan(self.values).any())

    def label(self, i: int) -> Optional[str]:
        return None if self.labels is None else self.labels[i]

    def slice(self, start: int, stop: int) -> "TimeSeries":
        labels = None if self.labels is None else self.labels[start:stop]
        return TimeSeries(self.values[start:stop], labels, self.name)

    def negated(self) -> "TimeSeries":
        return TimeSeries(-self.values, self.labels, self.name)

    def reversed(self) -> "TimeSeries":
        labels = None if self.labels is None else self.labels[::-1]
        return TimeSeries(self.values[::-1], labels, self.name)


SeriesLike = Union[TimeSeries, Sequence[float], np.ndarray]


def values_of(ts: SeriesLike) -> np.ndarray:
    """Finite float64 values of a series or array-like."""
    v = ts.values if isinstance(ts, TimeSeries) else np.asarray(ts, dtype=np.float64)
    if v.ndim != 1:
        raise DataError(f"series must be one-dimensional, got shape {v.shape}")
    if not np.isfinite(v).all():
        raise DataError("series contains missing or non-finite values; preprocess it first")
    return v


@dataclass(frozen=True)
class PreprocessSpec:
    """How to turn raw observations into an analysable series.

    ``jitter_amplitude`` is multiplied by the interquartile range of the
    (log-transformed) series when ``jitter_scale == "iqr"``; with
    ``"absolute"`` it is used as is. Zero disables jitter.
    """

    apply_log: bool = False
    jitter_amplitude: float = 1e-7
    jitter_scale: Literal["iqr", "absolute"] = "iqr"
    jitter_seed: int = 0
    missing_policy: Literal["drop", "fail"] = "drop"
    max_retries: int = field(default=8, repr=False)

    def __post_init__(self):
        if not self.jitter_amplitude >= 0:
            raise ValueError(f"jitter_amplitude must be >= 0, got {self.jitter_amplitude}")
        if self.jitter_scale not in ("iqr", "absolute"):
            raise ValueError(f"unknown jitter_scale {self.jitter_scale!r}")
        if self.missing_policy not in ("drop", "fail"):
            raise ValueError(f"unknown missing_policy {self.missing_policy!r}")


def _parse_cell(cell: str):
    s = cell.strip()
    if s.lower() in MISSING_MARKERS:
        return None
    return float(s)


def load_csv(
    path: Union[str, Path],
    column: Union[str, int] = -1,
    label_column: Union[str, int, None] = None,
    *,
    delimiter: str = ",",
    comment: Optional[str] = "#",
    header: Optional[bool] = None,
    missing_policy: Literal["drop", "fail"] = "drop",
    name: Optional[str] = None,
) -> TimeSeries:
    """Read one numeric column (and optionally a label column) from a CSV file.

    Integer selectors are 0-based column positions (negative counts from the
    right); string selectors need a header row. Lines starting with ``comment``
    are skipped. ``header=None`` detects a header
    by whether the first row's value cell parses as a number. Blank cells and
    common missing markers (``.``, ``NA``, ``NaN``) become NaN; other
    non-numeric cells are also recorded as missing unless
    ``missing_policy="fail"``, in which case they raise :class:`DataError`.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        lines = [ln for ln in fh if not (comment and ln.startswith(comment))]
    rows = [r for r in csv.reader(lines, delimiter=delimiter) if any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: no data rows")

    if header is None:
        header = isinstance(column, str) or isinstance(label_column, str)
        if not header:
            idx = column if isinstance(column, int) else 0
            try:
                _parse_cell(rows[0][idx])
            except (ValueError, IndexError):
                header = True
    names = [c.strip() for c in rows[0]] if header else None
    body = rows[1:] if header else rows

    def resolve(sel):
        if isinstance(sel, str):
            if names is None or sel not in names:
                raise DataError(f"{path}: column {sel!r} not found (header: {names})")
            return names.index(sel)
        width = len(names) if names is not None else max(len(r) for r in body)
        if not -width <= sel < width:
            raise DataError(f"{path}: column index {sel} out of range (width {width})")
        return sel % width

    vi = resolve(column)
    li = None if label_column is None else resolve(label_column)

    values = np.empty(len(body))
    labels = [] if li is not None else None
    for r, row in enumerate(body):
        cell = row[vi] if vi < len(row) else ""
        try:
            v = _parse_cell(cell)
        except ValueError:
            if missing_policy == "fail":
                raise DataError(f"{path}: row {r + 1 + bool(header)}: non-numeric cell {cell!r}")
            v = None
        if v is None:
            if missing_policy == "fail":
                raise DataError(f"{path}: row {r + 1 + bool(header)}: missing value")
            v = np.nan
        elif not np.isfinite(v):
            raise DataError(f"{path}: row {r + 1 + bool(header)}: non-finite value {cell!r}")
        values[r] = v
        if labels is not None:
            labels.append(row[li].strip() if li < len(row) else "")
    if name is None:
        name = names[vi] if names is not None else path.stem
    return TimeSeries(values, labels, name)


def _all_distinct(v: np.ndarray) -> bool:
    return np.unique(v).shape[0] == v.shape[0]


def preprocess(ts: TimeSeries, spec: PreprocessSpec = PreprocessSpec()) -> TimeSeries:
    """Drop or reject missing values, optionally take logs, then add uniform jitter.

    Jitter is ``uniform(0, a)`` per value with ``a`` the effective amplitude,
    drawn from a stream fixed by ``spec.jitter_seed``; if a tie survives, a
    stream derived from the same seed is tried again.
    """
    v = np.array(ts.values, dtype=np.float64)
    labels = ts.labels
    missing = np.isnan(v)
    if missing.any():
        if spec.missing_policy == "fail":
            raise DataError(f"{int(missing.sum())} missing values (missing_policy='fail')")
        keep = ~missing
        v = v[keep]
        if labels is not None:
            labels = tuple(l for l, k in zip(labels, keep) if k)
    if not np.isfinite(v).all():
        raise DataError("series contains non-finite values")

    if spec.apply_log:
        if v.size and v.min() <= 0:
            raise DataError("log transform needs strictly positive values")
        v = np.log(v)

    amp = float(spec.jitter_amplitude)
    if amp > 0 and v.size:
        if spec.jitter_scale == "iqr":
            q75, q25 = np.percentile(v, [75, 25])
            amp *= (q75 - q25) if q75 > q25 else 1.0
        for attempt in range(spec.max_retries):
            out = v + substream(spec.jitter_seed, attempt).uniform(0.0, amp, v.shape[0])
            if _all_distinct(out):
                v = out
                break
        else:
            raise TieError(f"ties survive {spec.max_retries} jitter attempts (amplitude {amp:g})")
    return TimeSeries(v, labels, ts.name)


def select_range(ts: TimeSeries, spec: str) -> TimeSeries:
    """Rows selected by a label range ``"START:STOP"`` or a WTI preset name.

    Labels are compared as strings: a row is kept when ``label >= START`` and
    its prefix of ``len(STOP)`` characters is ``<= STOP``, so ``"2015:2019"``
    keeps every date from 2015-01-01 through 2019-12-31. Either side may be
    empty.
    """
    if spec in WTI_SEGMENTS:
        start, stop = WTI_SEGMENTS[spec]
    else:
        if ":" not in spec:
            raise DataError(f"range {spec!r} must look like START:STOP or name a preset")
        start, stop = spec.split(":", 1)
    if ts.labels is None:
        raise DataError("label range selection needs a label column")
    keep = [
        i
        for i, lab in enumerate(ts.labels)
        if (not start or lab >= start) and (not stop or lab[: len(stop)] <= stop)
    ]
    if not keep:
        raise DataError(f"range {spec!r} selects no rows")
    lo, hi = keep[0], keep[-1] + 1
    if hi - lo != len(keep):
        raise DataError(f"range {spec!r} does not select a contiguous block (labels unsorted?)")
    return ts.slice(lo, hi)


def select_index_range(ts: TimeSeries, start: Optional[int], stop: Optional[int]) -> TimeSeries:
    """Rows ``start..stop`` (0-based, stop exclusive), Python slice semantics."""
    sub = ts.slice(start if start is not None else 0, stop if stop is not None else len(ts))
    if len(sub) == 0:
        raise DataError(f"index range {start}:{stop} selects no rows")
    return sub
