from math import asin, pi, sqrt

import numpy as np
import pytest

from ordpat._rng import substream
from ordpat.models import (
    BM_ORDER4_ROUNDED,
    ModelSpec,
    bm_pattern_probabilities,
    check_negation_symmetric,
    mc_bm_pattern_oracle,
    monte_carlo,
    simulate,
)
from ordpat.ordstats import turning_rate, up_down_balance


def test_bm_t1_is_first_draw():
    x = simulate(ModelSpec("bm", 1, seed=9)).values
    assert x.tolist() == [substream(9).standard_normal()]


def test_bm_is_cumsum_of_normals():
    x = simulate(ModelSpec("bm", 100, seed=4)).values
    z = substream(4).standard_normal(100)
    np.testing.assert_array_equal(x, np.cumsum(z))


def test_ar1_recursion():
    spec = ModelSpec("ar1", 50, seed=3, phi=0.7, noise="exponential_centered")
    x = simulate(spec).values
    z = 1.0 - substream(3).standard_exponential(50)
    ref = np.empty(50)
    ref[0] = z[0]
    for t in range(1, 50):
        ref[t] = 0.7 * ref[t - 1] + z[t]
    np.testing.assert_allclose(x, ref, rtol=1e-13, atol=1e-13)


def test_burn_in_discards_prefix():
    a = simulate(ModelSpec("ar1", 30, seed=1, phi=0.5, burn_in=10)).values
    b = simulate(ModelSpec("ar1", 40, seed=1, phi=0.5)).values
    np.testing.assert_allclose(a, b[10:])


def test_reproducible():
    s = ModelSpec("ar1", 500, seed=8, phi=0.99)
    assert simulate(s).values.tobytes() == simulate(s).values.tobytes()
    assert simulate(s).values.tobytes() != simulate(s.with_(seed=9)).values.tobytes()


@pytest.mark.parametrize(
    "kwargs",
    [dict(kind="ar1", phi=1.0), dict(kind="gbm"), dict(T=0), dict(seed=-1), dict(kind="ar1", noise="cauchy")],
)
def test_invalid_spec(kwargs):
    with pytest.raises(ValueError):
        ModelSpec(**kwargs)


def test_bm_alpha_long_path():
    T = 1_000_000
    x = simulate(ModelSpec("bm", T, seed=21)).values
    assert abs(turning_rate(x) - 0.5) < 3 / (2 * sqrt(T - 2))


def test_white_noise_alpha():
    T = 200_000
    x = simulate(ModelSpec("ar1", T, seed=5, phi=0.0)).values
    assert abs(turning_rate(x) - 2 / 3) < 3 * sqrt((16 * T - 29) / 90) / (T - 2)


@pytest.mark.slow
def test_ar1_exponential_beta_profile():
    spec = ModelSpec("ar1", 8500, phi=0.99, noise="exponential_centered")
    betas = np.array(
        [[up_down_balance(simulate(spec.with_(seed=s)).values, d) for d in range(1, 7)] for s in range(10)]
    )
    assert betas[:, 0].mean() == pytest.approx(0.25, abs=0.03)
    # single paths dip below 0.1 at larger lags now and then; the seed average does not
    assert np.all(betas.mean(axis=0) > 0.1)


def test_bm_table_small_orders():
    np.testing.assert_allclose(bm_pattern_probabilities(2).probabilities, [0.5, 0.5], atol=1e-15)
    np.testing.assert_allclose(
        bm_pattern_probabilities(3).probabilities, [1 / 4, 1 / 8, 1 / 8, 1 / 8, 1 / 8, 1 / 4], atol=1e-15
    )


def test_bm_table_order4_matches_printed_groups():
    p = bm_pattern_probabilities(4).probabilities
    assert p.sum() == pytest.approx(1.0, abs=1e-14)
    for idx, val in BM_ORDER4_ROUNDED.items():
        for i in idx:
            if val in (1 / 8, 1 / 16, 1 / 24, 1 / 48):
                assert p[i - 1] == pytest.approx(val, abs=1e-15)
            else:
                assert round(p[i - 1], 3) == val
    assert p[0] == 1 / 8 and round(p[10], 3) == 0.015


def test_bm_table_irrational_entries_closed_form():
    # the three irrational groups are linear in arcsin(1/3)
    p = bm_pattern_probabilities(4).probabilities
    a = asin(1 / 3) / (4 * pi)
    assert p[5] == pytest.approx(a, abs=1e-15)
    assert p[3] == pytest.approx(1 / 16 - a, abs=1e-15)
    assert p[10] == pytest.approx(1 / 24 - a, abs=1e-15)


def test_bm_table_negation_symmetric():
    for n in (2, 3, 4):
        assert check_negation_symmetric(bm_pattern_probabilities(n))
    with pytest.raises(ValueError):
        bm_pattern_probabilities(5)


def test_mc_oracle_order2_and_3():
    r = mc_bm_pattern_oracle(2, 1_000_000, seed=1)
    np.testing.assert_allclose(r.probabilities, [0.5, 0.5], atol=0.0015)
    r = mc_bm_pattern_oracle(3, 10_000_000, seed=2, chunk=1 << 20)
    b = bm_pattern_probabilities(3).probabilities
    assert np.all(np.abs(r.probabilities - b) < 3 * r.stderr * 1.5)


def test_mc_oracle_chunking_invariant():
    a = mc_bm_pattern_oracle(4, 100_000, seed=3, chunk=1 << 20)
    b = mc_bm_pattern_oracle(4, 100_000, seed=3, chunk=7_777)
    # different chunking changes the draws, but both stay in the binomial band
    bm = bm_pattern_probabilities(4).probabilities
    for r in (a, b):
        assert r.probabilities.sum() == pytest.approx(1.0)
        assert np.all(np.abs(r.probabilities - bm) < 5 * np.sqrt(bm * (1 - bm) / 100_000) * 2)


@pytest.mark.slow
def test_mc_oracle_order4_refines_table():
    r = mc_bm_pattern_oracle(4, 100_000_000, seed=7)
    b = bm_pattern_probabilities(4).probabilities
    # overlapping windows make the binomial error an underestimate; 5 of them is still tight
    assert np.all(np.abs(r.probabilities - b) < 5 * r.stderr)
    assert np.abs(r.probabilities - b).max() < 2e-4


def test_monte_carlo_worker_independent():
    spec = ModelSpec("bm", 200, seed=5)
    a = monte_carlo(spec, 50, lambda x: float(x[-1]))
    b = monte_carlo(spec, 50, lambda x: float(x[-1]), workers=4)
    assert a == b
    assert monte_carlo(spec, 3, lambda x: x.shape[0], T=17) == [17, 17, 17]
