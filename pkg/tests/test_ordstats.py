from math import log, sqrt

import numpy as np
import pytest

from ordpat.errors import SeriesTooShortError, TieError
from ordpat.models import ModelSpec, bm_pattern_probabilities, simulate
from ordpat.ordstats import (
    conditional_entropy,
    permutation_entropy,
    persistence,
    sliding_statistic,
    summarize,
    turning_rate,
    up_down_balance,
    z_scores,
)
from ordpat.patterns import PatternDistribution, pattern_frequencies


def test_beta_extremes():
    assert up_down_balance(np.arange(10.0)) == 1.0
    assert up_down_balance(np.arange(10.0)[::-1], 3) == -1.0


def test_turning_rate_examples():
    assert turning_rate(np.arange(20.0)) == 0.0
    assert turning_rate([1, 3, 2, 4, 3.5, 5]) == 1.0


def test_persistence_examples():
    assert persistence(np.arange(20.0)) == pytest.approx(2 / 3)
    wn = np.random.default_rng(0).standard_normal(200_000)
    assert abs(persistence(wn)) < 3 * sqrt(2 / 9 / 200_000) * 1.5
    bm = simulate(ModelSpec("bm", 200_000, seed=2)).values
    assert persistence(bm) == pytest.approx(1 / 6, abs=0.005)


def test_alpha_identity_with_patterns(bm_path):
    for d in (1, 2, 5):
        q = pattern_frequencies(bm_path, 3, d)
        assert turning_rate(bm_path, d) == pytest.approx(1 - q["123"] - q["321"], abs=1e-14)
        assert persistence(bm_path, d) == 2 / 3 - turning_rate(bm_path, d)


def test_entropy_examples():
    assert permutation_entropy(PatternDistribution(3, (1,), np.full(6, 1 / 6), 6)) == pytest.approx(log(6))
    assert permutation_entropy(PatternDistribution(3, (1,), np.eye(6)[0], 6)) == 0.0
    h = permutation_entropy(bm_pattern_probabilities(3).as_distribution())
    assert h == pytest.approx(0.5 * log(4) + 0.5 * log(8), abs=1e-12)
    assert h == pytest.approx(1.7329, abs=1e-4)


def test_conditional_entropy_examples():
    assert conditional_entropy(np.arange(30.0)) == 0.0
    wn = np.random.default_rng(1).standard_normal(400_000)
    assert conditional_entropy(wn) == pytest.approx(log(6) / 3 + 2 * log(3) / 3 - log(2), abs=0.005)
    bm = simulate(ModelSpec("bm", 400_000, seed=1)).values
    assert conditional_entropy(bm) == pytest.approx(log(2), abs=0.005)


def test_z_scores_printed_values():
    za, zb = z_scores(0.510, 0.032, 8497)
    assert round(za, 2) == 1.84
    assert round(zb, 2) == 2.95
    assert z_scores(0.5, 0.0, 50)[0] == 0.0
    with pytest.raises(SeriesTooShortError):
        z_scores(0.5, 0.0, 2)


def test_summarize_constant_increment():
    s = summarize(np.arange(1.0, 40.0), {1, 2, 3})
    assert s.alpha == 0.0 and s.beta == 1.0 and s.tau == pytest.approx(2 / 3)
    assert s.entropy == 0.0 and s.cond_entropy == 0.0


def test_summarize_averages_and_lag1_z(bm_path):
    s = summarize(bm_path, (1, 2, 3))
    assert s.alpha == pytest.approx(np.mean([turning_rate(bm_path, d) for d in (1, 2, 3)]))
    assert s.beta == pytest.approx(np.mean([up_down_balance(bm_path, d) for d in (1, 2, 3)]))
    za, zb = z_scores(turning_rate(bm_path), up_down_balance(bm_path), len(bm_path))
    assert (s.z_alpha, s.z_beta) == (za, zb)
    d = s.to_dict()
    assert set(d) >= {"lag_set", "alpha", "beta", "tau", "entropy", "cond_entropy", "T", "z_alpha", "z_beta"}
    assert d["lag_set"] == [1, 2, 3]


def test_summarize_order4_entropy(bm_path):
    s = summarize(bm_path, (1,), order=4)
    assert s.entropy == pytest.approx(permutation_entropy(pattern_frequencies(bm_path, 4, 1)))


def test_errors():
    with pytest.raises(SeriesTooShortError):
        turning_rate([1.0, 2.0])
    with pytest.raises(TieError):
        up_down_balance([1.0, 1.0, 2.0])
    with pytest.raises(SeriesTooShortError):
        summarize(np.arange(5.0), (1, 2, 3))


def test_sliding_statistic(bm_path):
    starts, vals = sliding_statistic(bm_path, "alpha", 1000, 500)
    assert starts.tolist() == [0, 500, 1000, 1500, 2000]
    assert vals[1] == turning_rate(bm_path[500:1500])
    with pytest.raises(ValueError):
        sliding_statistic(bm_path, "median")
