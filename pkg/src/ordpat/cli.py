"""Command-line front end: ``ordpat <command> [options]``.

Every run writes its result together with a metadata block (tool, version,
command, config echo, seed). Identical command lines give byte-identical
output. Exit codes: 0 success, 1 usage error, 2 data error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ordpat import __version__
from ordpat.changepoint import (
    changepoint_significance,
    find_change_point,
    local_change_curve,
    mean_change_curve,
    order_change_curve,
    recursive_segmentation,
    scalar_change_curve,
)
from ordpat.errors import DataError
from ordpat.hypotest import bienayme_test, coin_toss_test, mc_distance_test, variance_vs_lag
from ordpat.models import ModelSpec, simulate
from ordpat.patterns import frequency_table, lag_averaged_frequencies
from ordpat.ordstats import summarize
from ordpat.series import (
    PreprocessSpec,
    load_csv,
    preprocess,
    select_index_range,
    select_range,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_IO = 0, 1, 2, 3
OUTPUT_DIR_ENV = "ORDPAT_OUTPUT_DIR"
TOOL = "ordpat"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def parse_lags(text: str) -> tuple:
    """``"1..10"`` (inclusive range), ``"1,2,3"`` or a single lag."""
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lags = tuple(range(int(a), int(b) + 1))
        else:
            lags = tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad lag set {text!r}; use 1..10 or 1,2,3")
    if not lags or min(lags) < 1:
        raise argparse.ArgumentTypeError(f"lag set {text!r} must contain positive lags")
    return lags


def _selector(text: str):
    try:
        return int(text)
    except ValueError:
        return text


def _index_range(text: str):
    if ":" not in text:
        raise argparse.ArgumentTypeError("index range must look like START:STOP")
    a, b = text.split(":", 1)
    try:
        return (int(a) if a else None, int(b) if b else None)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad index range {text!r}")


def _add_input(p):
    g = p.add_argument_group("input")
    g.add_argument("--input", required=True, help="CSV file with the series")
    g.add_argument("--column", type=_selector, default=-1, help="value column (name or 0-based index)")
    g.add_argument("--label-column", type=_selector, default=None, help="date/label column")
    g.add_argument("--delimiter", default=",")
    g.add_argument("--range", dest="label_range", default=None, help="label range START:STOP or a preset name")
    g.add_argument("--index-range", type=_index_range, default=None, help="0-based rows START:STOP")
    g.add_argument("--log", action="store_true", help="analyse log values")
    g.add_argument("--jitter", type=float, default=1e-7, help="jitter amplitude (0 disables)")
    g.add_argument("--jitter-scale", choices=("iqr", "absolute"), default="iqr")
    g.add_argument("--missing", choices=("drop", "fail"), default="drop")


def _add_output(p):
    p.add_argument("--out", default="json", help="'json', 'csv' (stdout) or an output path")
    p.add_argument("--format", choices=("json", "csv"), default=None, help="format when --out is a path")


def _add_seed(p, workers=True):
    p.add_argument("--seed", type=int, default=0)
    if workers:
        p.add_argument("--workers", type=int, default=1, help="threads for Monte Carlo (result unchanged)")


def _add_model(p):
    p.add_argument("--model", choices=("bm", "ar1"), default="bm")
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--noise", choices=("gaussian", "exponential_centered"), default="gaussian")
    p.add_argument("--burn-in", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog=TOOL, description="Ordinal-pattern statistics for time series.")
    parser.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("patterns", help="pattern frequencies per lag and lag-averaged")
    _add_input(p)
    p.add_argument("--order", type=int, default=4)
    p.add_argument("--lags", type=parse_lags, default=(1,))
    _add_seed(p, workers=False)
    _add_output(p)

    p = sub.add_parser("summary", help="turning rate, up-down balance, entropies, z-scores")
    _add_input(p)
    p.add_argument("--order", type=int, default=3, help="pattern length for the entropy")
    p.add_argument("--lags", type=parse_lags, default=(1,))
    _add_seed(p, workers=False)
    _add_output(p)

    p = sub.add_parser("test-bm", help="Monte Carlo distance test against Brownian motion")
    _add_input(p)
    p.add_argument("--order", type=int, default=4)
    p.add_argument("--lags", type=parse_lags, default=(1, 2, 3))
    p.add_argument("--null-lags", type=parse_lags, default=None, help="lag set of the simulated paths")
    p.add_argument("--N", type=int, default=10_000)
    p.add_argument("--null-out", default=None, help="CSV path for the null distances")
    p.add_argument("--exact", action="store_true", help="exact binomial p-values for the coin-toss tests")
    _add_seed(p)
    _add_output(p)

    p = sub.add_parser("bienayme", help="turning-point and up-step tests of an i.i.d. null")
    _add_input(p)
    _add_seed(p, workers=False)
    _add_output(p)

    methods = ("mean", "order_distance", "beta", "alpha", "entropy", "cond_entropy")
    p = sub.add_parser("changepoint", help="change-point curve and its global extremum")
    _add_input(p)
    p.add_argument("--method", choices=methods, default="beta")
    p.add_argument("--order", type=int, default=4)
    p.add_argument("--lags", type=parse_lags, default=(1, 2, 3))
    p.add_argument("--margin", type=int, default=None)
    p.add_argument("--curve-out", default=None, help="CSV path for the curve (k, label, value, c_k)")
    p.add_argument("--null", choices=("bm", "ar1"), default=None, help="simulate a null for significance")
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--noise", choices=("gaussian", "exponential_centered"), default="gaussian")
    p.add_argument("--N", type=int, default=1000)
    _add_seed(p)
    _add_output(p)

    p = sub.add_parser("segment", help="recursive binary segmentation")
    _add_input(p)
    p.add_argument("--method", choices=methods, default="beta")
    p.add_argument("--order", type=int, default=4)
    p.add_argument("--lags", type=parse_lags, default=(1, 2, 3))
    p.add_argument("--max-points", type=int, default=3)
    p.add_argument("--min-segment", type=int, default=None)
    p.add_argument("--margin", type=int, default=None)
    _add_seed(p, workers=False)
    _add_output(p)

    p = sub.add_parser("local", help="windowed before/after difference curve")
    _add_input(p)
    p.add_argument("--statistic", choices=("mean", "beta", "alpha", "entropy", "cond_entropy"), default="mean")
    p.add_argument("--m", type=int, default=100)
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--lags", type=parse_lags, default=(1, 2, 3))
    _add_seed(p, workers=False)
    _add_output(p)

    p = sub.add_parser("simulate", help="simulate a null-model trajectory")
    _add_model(p)
    p.add_argument("--T", type=int, default=1000)
    _add_seed(p, workers=False)
    _add_output(p)

    p = sub.add_parser("variance-lag", help="simulated variance of turning rate and up-down balance per lag")
    _add_model(p)
    p.add_argument("--T", type=int, default=2500)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--lags", type=parse_lags, default=tuple(range(1, 11)))
    _add_seed(p)
    _add_output(p)
    return parser


# --- helpers ---------------------------------------------------------------


def output_schema() -> dict:
    """JSON schema that every JSON output of this tool validates against."""
    return json.loads((Path(__file__).parent / "schemas" / "output.schema.json").read_text())


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, NaN/inf to None, tuples to lists."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def _config(args) -> dict:
    skip = {"out", "format", "workers"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _metadata(args) -> dict:
    return _clean(
        {"tool": TOOL, "version": __version__, "command": args.command, "config": _config(args), "seed": args.seed}
    )


def _resolve(path: str) -> Path:
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def _target(args):
    """``(format, path or None)`` from ``--out`` and ``--format``."""
    if args.out in ("json", "csv"):
        return args.out, None
    fmt = args.format or ("csv" if args.out.lower().endswith(".csv") else "json")
    return fmt, _resolve(args.out)


def _csv_text(meta: dict, header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    buf.write(f"# {meta['tool']} {meta['version']} {meta['command']}\n")
    buf.write(f"# seed: {meta['seed']}\n")
    buf.write("# config: " + json.dumps(meta["config"], sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["" if v is None else (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for v in r])
    return buf.getvalue()


def _write(text: str, path: Optional[Path]):
    if path is None:
        sys.stdout.write(text)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _emit(args, result: dict, header, rows):
    meta = _metadata(args)
    fmt, path = _target(args)
    if fmt == "json":
        text = json.dumps({"metadata": meta, "result": _clean(result)}, sort_keys=True, indent=2) + "\n"
    else:
        text = _csv_text(meta, header, rows)
    _write(text, path)


def _load(args):
    ts = load_csv(
        args.input, args.column, args.label_column, delimiter=args.delimiter, missing_policy=args.missing
    )
    if args.label_range is not None:
        ts = select_range(ts, args.label_range)
    if args.index_range is not None:
        ts = select_index_range(ts, *args.index_range)
    spec = PreprocessSpec(
        apply_log=args.log,
        jitter_amplitude=args.jitter,
        jitter_scale=args.jitter_scale,
        jitter_seed=args.seed,
        missing_policy=args.missing,
    )
    return preprocess(ts, spec)


def _series_info(ts) -> dict:
    return {
        "name": ts.name,
        "T": len(ts),
        "first_label": ts.label(0) if len(ts) else None,
        "last_label": ts.label(len(ts) - 1) if len(ts) else None,
    }


def _curve(ts, args):
    if args.method == "mean":
        return mean_change_curve(ts, args.margin)
    if args.method == "order_distance":
        return order_change_curve(ts, args.order, args.lags, args.margin)
    order = args.order if args.method == "entropy" else 3
    return scalar_change_curve(ts, args.method, args.lags, args.margin, order)


def _curve_rows(curve):
    return [(k, lab, v, c) for k, lab, v, c in curve.to_rows()]


# --- commands --------------------------------------------------------------


def cmd_patterns(args):
    ts = _load(args)
    table = frequency_table(ts, args.order, args.lags)
    avg = lag_averaged_frequencies(ts, args.order, args.lags)
    lags = sorted(table)
    rows = [
        (i + 1, s, *[table[d].probabilities[i] for d in lags], avg.probabilities[i])
        for i, s in enumerate(avg.patterns)
    ]
    result = {
        "series": _series_info(ts),
        "order": args.order,
        "lags": lags,
        "per_lag": {str(d): table[d].to_dict() for d in lags},
        "lag_averaged": avg.to_dict(),
    }
    _emit(args, result, ["index", "pattern", *[f"lag{d}" for d in lags], "mean"], rows)


def cmd_summary(args):
    ts = _load(args)
    s = summarize(ts, args.lags, args.order)
    d = s.to_dict()
    _emit(args, {"series": _series_info(ts), "summary": d}, ["statistic", "value"], _kv_rows(d))


def _kv_rows(d: dict, prefix=""):
    rows = []
    for k, v in sorted(d.items()):
        if isinstance(v, dict):
            rows += _kv_rows(v, f"{prefix}{k}.")
        elif isinstance(v, (list, tuple)):
            rows.append((prefix + k, " ".join(map(str, v))))
        else:
            rows.append((prefix + k, v))
    return rows


def cmd_test_bm(args):
    ts = _load(args)
    q = lag_averaged_frequencies(ts, args.order, args.lags)
    r = mc_distance_test(
        q, len(ts), args.N, args.seed, null_lags=args.null_lags, workers=args.workers, keep_null=bool(args.null_out)
    )
    tp, up = coin_toss_test(ts, exact=args.exact)
    if args.null_out:
        meta = _metadata(args)
        _write(_csv_text(meta, ["k", "distance"], enumerate(r.null_sample)), _resolve(args.null_out))
    result = {
        "series": _series_info(ts),
        "distance_test": r.to_dict(),
        "coin_toss": {"turning_points": tp.to_dict(), "up_steps": up.to_dict()},
    }
    rows = [("distance_test", *_test_row(r)), ("turning_points", *_test_row(tp)), ("up_steps", *_test_row(up))]
    _emit(args, result, _TEST_HEADER, rows)


_TEST_HEADER = ["test", "statistic", "observed", "null_median", "p_value", "n_simulations"]


def _test_row(r):
    return (r.statistic_name, r.observed, r.null_median, r.p_value, r.n_simulations)


def cmd_bienayme(args):
    ts = _load(args)
    v, u = bienayme_test(ts)
    result = {"series": _series_info(ts), "turning_points": v.to_dict(), "up_steps": u.to_dict()}
    _emit(args, result, _TEST_HEADER, [("turning_points", *_test_row(v)), ("up_steps", *_test_row(u))])


def _points(cps):
    return [cp.to_dict() for cp in cps]


def cmd_changepoint(args):
    ts = _load(args)
    curve = _curve(ts, args)
    cp = find_change_point(curve)
    if args.curve_out:
        _write(_csv_text(_metadata(args), ["k", "label", "value", "c_k"], _curve_rows(curve)), _resolve(args.curve_out))
    result = {
        "series": _series_info(ts),
        "method": curve.method,
        "lags": list(curve.lags),
        "margin": curve.margin,
        "change_point": cp.to_dict(),
    }
    if args.null is not None:
        null = ModelSpec(args.null, len(ts), args.seed, args.phi, args.noise)
        sig = changepoint_significance(
            abs(cp.value), null, len(ts), args.method, args.lags, args.N, args.seed,
            margin=args.margin, order=args.order, workers=args.workers,
        )
        result["significance"] = dict(sig.to_dict(), null_model=null.describe())
    _emit(args, result, ["k", "label", "value", "c_k"], _curve_rows(curve))


def cmd_segment(args):
    ts = _load(args)
    cps = recursive_segmentation(
        ts, args.method, args.lags, args.max_points, args.min_segment, margin=args.margin, order=args.order
    )
    result = {"series": _series_info(ts), "method": args.method, "change_points": _points(cps)}
    rows = [(i + 1, cp.index, cp.label, cp.value, cp.sign) for i, cp in enumerate(cps)]
    _emit(args, result, ["rank", "k", "label", "value", "sign"], rows)


def cmd_local(args):
    ts = _load(args)
    curve = local_change_curve(ts, args.statistic, args.m, args.lags, args.order)
    cp = find_change_point(curve)
    result = {"series": _series_info(ts), "method": curve.method, "m": args.m, "change_point": cp.to_dict()}
    _emit(args, result, ["k", "label", "value", "c_k"], _curve_rows(curve))


def _model(args, T) -> ModelSpec:
    return ModelSpec(args.model, T, args.seed, args.phi, args.noise, args.burn_in)


def cmd_simulate(args):
    spec = _model(args, args.T)
    x = simulate(spec).values
    _emit(args, {"model": spec.describe(), "values": x}, ["t", "value"], enumerate(x))


def cmd_variance_lag(args):
    table = variance_vs_lag(_model(args, args.T), args.T, args.trials, args.lags, args.seed, workers=args.workers)
    rows = [(r["lag"], r["var_alpha"], r["var_beta"], r["mean_alpha"], r["mean_beta"]) for r in table.to_dict()["rows"]]
    _emit(args, table.to_dict(), ["lag", "var_alpha", "var_beta", "mean_alpha", "mean_beta"], rows)


COMMANDS = {
    "patterns": cmd_patterns,
    "summary": cmd_summary,
    "test-bm": cmd_test_bm,
    "bienayme": cmd_bienayme,
    "changepoint": cmd_changepoint,
    "segment": cmd_segment,
    "local": cmd_local,
    "simulate": cmd_simulate,
    "variance-lag": cmd_variance_lag,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Execute one command line and return its exit status."""
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:  # --help / --version
        return EXIT_OK if not e.code else EXIT_USAGE
    try:
        COMMANDS[args.command](args)
    except DataError as e:
        print(f"{TOOL}: data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except OSError as e:
        print(f"{TOOL}: I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, UsageError) as e:
        print(f"{TOOL}: {e}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
