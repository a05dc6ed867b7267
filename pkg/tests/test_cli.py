import json
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from ordpat.cli import EXIT_DATA, EXIT_IO, EXIT_OK, EXIT_USAGE, output_schema, parse_lags, run


@pytest.fixture
def series_csv(tmp_path):
    rng = np.random.default_rng(0)
    x = 50 + np.cumsum(rng.standard_normal(1200)) * 0.5
    dates = [f"{2015 + i // 250}-{1 + (i % 250) // 21:02d}-{1 + i % 21:02d}" for i in range(1200)]
    p = tmp_path / "prices.csv"
    p.write_text("date,close\n" + "".join(f"{d},{v:.4f}\n" for d, v in zip(dates, x)))
    return p


def call(capsys, *argv):
    code = run([str(a) for a in argv])
    return code, capsys.readouterr()


def as_json(capsys, *argv):
    code, out = call(capsys, *argv)
    assert code == EXIT_OK, out.err
    doc = json.loads(out.out)
    jsonschema.validate(doc, output_schema())
    return doc


def test_parse_lags():
    assert parse_lags("1..4") == (1, 2, 3, 4)
    assert parse_lags("3,1") == (3, 1)
    assert parse_lags("2") == (2,)


COMMANDS = [
    ["patterns", "--order", 4, "--lags", "1..10"],
    ["summary", "--lags", "1..3"],
    ["test-bm", "--N", 100, "--seed", 7],
    ["bienayme"],
    ["changepoint", "--method", "order_distance", "--order", 3],
    ["changepoint", "--method", "beta", "--null", "ar1", "--phi", 0.9, "--N", 100],
    ["segment", "--method", "beta", "--max-points", 2],
    ["local", "--statistic", "beta", "--m", 150],
]


@pytest.mark.parametrize("argv", COMMANDS, ids=lambda a: "-".join(map(str, a[:2])))
def test_commands_validate_and_are_byte_identical(capsys, series_csv, argv):
    full = [argv[0], "--input", series_csv, "--column", "close", "--label-column", "date", *argv[1:]]
    doc = as_json(capsys, *full)
    assert doc["metadata"]["command"] == argv[0]
    assert doc["metadata"]["version"]
    first = call(capsys, *full)[1].out
    second = call(capsys, *full)[1].out
    assert first == second


def test_patterns_csv_table(capsys, series_csv):
    code, out = call(capsys, "patterns", "--input", series_csv, "--column", "close", "--order", 4, "--lags", "1..10", "--out", "csv")
    lines = [ln for ln in out.out.splitlines() if not ln.startswith("#")]
    assert lines[0].split(",")[:3] == ["index", "pattern", "lag1"]
    assert len(lines) == 25 and len(lines[1].split(",")) == 2 + 10 + 1
    assert out.out.startswith("# ordpat ")


def test_simulate_then_patterns(capsys, tmp_path):
    out = tmp_path / "bm.csv"
    assert call(capsys, "simulate", "--model", "bm", "--T", 8500, "--seed", 1, "--out", out)[0] == EXIT_OK
    doc = as_json(capsys, "patterns", "--input", out, "--order", 4, "--lags", "1..3")
    assert doc["result"]["series"]["T"] == 8500
    p = np.array(list(doc["result"]["lag_averaged"]["probabilities"].values()))
    assert p.sum() == pytest.approx(1.0)
    from ordpat.models import ModelSpec, simulate

    text = out.read_text().splitlines()
    vals = np.array([float(r.split(",")[1]) for r in text if r and not r.startswith(("#", "t,"))])
    np.testing.assert_array_equal(vals, simulate(ModelSpec("bm", 8500, 1)).values)


def test_simulate_json_and_variance_lag(capsys):
    doc = as_json(capsys, "simulate", "--model", "ar1", "--phi", 0.5, "--noise", "exponential_centered", "--T", 50)
    assert len(doc["result"]["values"]) == 50
    doc = as_json(capsys, "variance-lag", "--T", 300, "--trials", 50, "--lags", "1..3")
    assert [r["lag"] for r in doc["result"]["rows"]] == [1, 2, 3]


def test_workers_do_not_change_output(capsys, series_csv):
    base = ["test-bm", "--input", series_csv, "--N", 200, "--seed", 3]
    a = json.loads(call(capsys, *base, "--workers", 1)[1].out)
    b = json.loads(call(capsys, *base, "--workers", 4)[1].out)
    assert a["result"] == b["result"]


def test_seed_recorded_and_changes_result(capsys, series_csv):
    a = as_json(capsys, "test-bm", "--input", series_csv, "--N", 200, "--seed", 1)
    b = as_json(capsys, "test-bm", "--input", series_csv, "--N", 200, "--seed", 2)
    assert a["metadata"]["seed"] == 1 and b["metadata"]["seed"] == 2
    assert a["result"]["distance_test"]["null_median"] != b["result"]["distance_test"]["null_median"]


def test_range_selection(capsys, series_csv):
    doc = as_json(capsys, "summary", "--input", series_csv, "--column", "close", "--label-column", "date", "--range", "2016:2017")
    s = doc["result"]["series"]
    assert s["T"] == 500 and s["first_label"].startswith("2016") and s["last_label"].startswith("2017")
    doc = as_json(capsys, "summary", "--input", series_csv, "--index-range", "100:400")
    assert doc["result"]["series"]["T"] == 300


def test_output_dir_env(capsys, series_csv, tmp_path, monkeypatch):
    monkeypatch.setenv("ORDPAT_OUTPUT_DIR", str(tmp_path / "out"))
    assert call(capsys, "bienayme", "--input", series_csv, "--out", "b.json")[0] == EXIT_OK
    doc = json.loads((tmp_path / "out" / "b.json").read_text())
    jsonschema.validate(doc, output_schema())


def test_side_outputs(capsys, series_csv, tmp_path):
    curve = tmp_path / "curve.csv"
    null = tmp_path / "null.csv"
    assert call(capsys, "changepoint", "--input", series_csv, "--curve-out", curve)[0] == EXIT_OK
    assert call(capsys, "test-bm", "--input", series_csv, "--N", 100, "--null-out", null)[0] == EXIT_OK
    assert "k,label,value,c_k" in curve.read_text()
    assert len([r for r in null.read_text().splitlines() if r[:1].isdigit()]) == 100


def test_exit_codes(capsys, series_csv, tmp_path):
    assert call(capsys, "nonsense")[0] == EXIT_USAGE
    assert call(capsys, "patterns")[0] == EXIT_USAGE
    assert call(capsys, "patterns", "--input", series_csv, "--order", 9)[0] == EXIT_USAGE
    assert call(capsys, "patterns", "--input", series_csv, "--lags", "0..2")[0] == EXIT_USAGE
    assert call(capsys, "patterns", "--input", tmp_path / "missing.csv")[0] == EXIT_IO
    short = tmp_path / "short.csv"
    short.write_text("1\n2\n")
    assert call(capsys, "summary", "--input", short)[0] == EXIT_DATA
    ties = tmp_path / "ties.csv"
    ties.write_text("".join("1\n" for _ in range(20)))
    code, out = call(capsys, "bienayme", "--input", ties, "--jitter", 0)
    assert code == EXIT_DATA and "jitter" in out.err
    assert call(capsys, "summary", "--input", series_csv, "--range", "2030:2031")[0] == EXIT_DATA


def test_console_entry_point(series_csv):
    r = subprocess.run(
        [sys.executable, "-m", "ordpat", "bienayme", "--input", str(series_csv)], capture_output=True, text=True
    )
    assert r.returncode == 0
    assert json.loads(r.stdout)["metadata"]["tool"] == "ordpat"
    r = subprocess.run([sys.executable, "-m", "ordpat", "bogus"], capture_output=True, text=True)
    assert r.returncode == 1
