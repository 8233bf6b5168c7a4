import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from fraccp.errors import OutOfRangeError
from fraccp.fracpoisson import (
    NEWTON_MAX_K,
    Regime,
    frac_difference,
    overdispersion_factor,
    pmf_space_frac,
    pmf_space_frac_table,
    pmf_time_frac,
    pmf_time_frac_table,
    regime_of,
    space_frac_newton_coeffs,
    tf_moments,
)
from fraccp.specfun import gen_binom
from fraccp.subord import RandomStream, sample_inv_stable, sample_stable

from conftest import z_score


def test_regime_classification():
    assert regime_of(0.3) is Regime.TIME
    assert regime_of(1.5) is Regime.SPACE
    for bad in (1.0, 0.0, -1.0, math.inf):
        with pytest.raises(ValueError):
            regime_of(bad)


def test_time_pmf_examples():
    assert pmf_time_frac(1, 0.5, 1, 0) == pytest.approx(0.4275835761558070, abs=1e-12)
    assert pmf_time_frac(2.0, 0.5, 0.0, 0) == 1.0
    assert pmf_time_frac(2.0, 0.5, 0.0, 3) == 0.0
    assert pmf_time_frac(1, 0.999, 1, 1) == pytest.approx(math.exp(-1), abs=1e-2)


def test_time_pmf_table_matches_scalar():
    ts = [0.0, 0.3, 1.0, 2.5]
    table = pmf_time_frac_table(1.3, 0.6, ts, 6)
    for i, t in enumerate(ts):
        for k in range(7):
            assert table[i, k] == pytest.approx(pmf_time_frac(1.3, 0.6, t, k), abs=1e-15)


@pytest.mark.parametrize("lam, nu, t", [(1.0, 0.5, 1.0), (2.0, 0.3, 0.5), (0.5, 0.8, 3.0)])
def test_time_pmf_normalised(lam, nu, t):
    k_max = 40
    while True:
        total = pmf_time_frac_table(lam, nu, [t], k_max)[0].sum()
        if 1 - total < 1e-7 or k_max > 400:
            break
        k_max *= 2
    assert total == pytest.approx(1.0, abs=1e-6)


def test_time_pmf_k0_nonincreasing_in_t():
    ts = np.linspace(0, 5, 60)
    p0 = pmf_time_frac_table(1.0, 0.4, ts, 0)[:, 0]
    assert np.all(np.diff(p0) <= 1e-15)


def test_space_pmf_examples():
    assert pmf_space_frac(1, 2, 1, 0) == pytest.approx(math.exp(-1), abs=1e-13)
    assert pmf_space_frac(1.7, 1.5, 0.0, 2) == 0.0
    assert pmf_space_frac(1.7, 1.5, 0.0, 0) == 1.0


@pytest.mark.parametrize("nu", [1.25, 1.5, 2.0, 3.0])
@pytest.mark.parametrize("x", [0.1, 1.0, 5.0])
def test_space_series_and_newton_forms_agree(nu, x):
    for k in range(8):
        a = pmf_space_frac(1.0, nu, x, k, "series")
        b = pmf_space_frac(1.0, nu, x, k, "newton")
        assert a == pytest.approx(b, abs=1e-12)


def test_space_series_range_and_newton_beyond():
    with pytest.raises(OutOfRangeError):
        pmf_space_frac(1.0, 1.5, 25.0, 1, "series")
    assert 0 < pmf_space_frac(1.0, 1.5, 25.0, 1, "newton") < 1
    with pytest.raises(OutOfRangeError):
        space_frac_newton_coeffs(1.5, NEWTON_MAX_K + 1)
    with pytest.raises(ValueError):
        pmf_space_frac(1.0, 1.5, 1.0, 1, "spline")


def test_space_pmf_normalised_up_to_heavy_tail():
    # the count has infinite mean, so only the mass below K is compared with 1 - P(N > K)
    p = pmf_space_frac_table(1.0, 1.5, [1.0], 60)[0]
    assert np.all(p >= -1e-15)
    assert 0.97 < p.sum() < 1.0


def test_space_pmf_matches_monte_carlo():
    lam, nu, t, k, n = 1.0, 1.25, 0.5, 2, 100_000
    level = lam * sample_stable(1 / nu, np.full(n, t), RandomStream(11))
    vals = stats.poisson.pmf(k, level)
    assert abs(z_score(vals, pmf_space_frac(lam, nu, t, k))) <= 3


def test_time_pmf_matches_monte_carlo():
    lam, nu, t, n = 1.0, 0.5, 1.0, 100_000
    level = lam * sample_inv_stable(nu, np.full(n, t), RandomStream(12))
    for k in range(4):
        assert abs(z_score(stats.poisson.pmf(k, level), pmf_time_frac(lam, nu, t, k))) <= 3


def test_frac_difference_examples():
    f = [0.3, 0.9, 0.2, 0.7]
    assert frac_difference(1.0, f, 2) == pytest.approx(f[2] - f[1])
    assert frac_difference(1.0, f, 0) == pytest.approx(f[0])
    delta = [1.0, 0.0, 0.0]
    assert frac_difference(0.5, delta, 0) == 1.0
    assert frac_difference(0.5, delta, 2) == pytest.approx(-gen_binom(0.5, 2) * -1)
    assert frac_difference(0.5, delta, 2) == pytest.approx(-0.125)
    with pytest.raises(IndexError):
        frac_difference(0.5, delta, 3)


def test_overdispersion_factor_reference_points():
    assert overdispersion_factor(0.5) == pytest.approx(0.72676, abs=1e-5)
    assert overdispersion_factor(0.2) == pytest.approx(1.06793, abs=1e-5)
    assert overdispersion_factor(0.9) == pytest.approx(0.111879, abs=1e-6)
    assert overdispersion_factor(1.0) == 0.0


@given(nu=st.floats(0.01, 0.99))
def test_overdispersion_positive(nu):
    assert overdispersion_factor(nu) > 0


def test_tf_moments():
    mean, var, z = tf_moments(1.0, 0.5, 1.0)
    assert z == pytest.approx(0.72676, abs=1e-5)
    assert mean == pytest.approx(1 / math.gamma(1.5))
    assert var - mean == pytest.approx(z)
    mean, var, z = tf_moments(2.0, 1.0, 3.0)
    assert (mean, var, z) == (pytest.approx(6.0), pytest.approx(6.0), 0.0)


@given(lam=st.floats(0.1, 3.0), nu=st.floats(0.2, 0.9), t=st.floats(0.1, 3.0))
@settings(max_examples=25, deadline=None)
def test_tf_moments_match_pmf_table(lam, nu, t):
    mean, var, _ = tf_moments(lam, nu, t)
    k_max = 60
    p = pmf_time_frac_table(lam, nu, [t], k_max)[0]
    while 1 - p.sum() > 1e-12 and k_max < 4096:
        k_max *= 2
        p = pmf_time_frac_table(lam, nu, [t], k_max)[0]
    k = np.arange(k_max + 1)
    assert (k * p).sum() == pytest.approx(mean, rel=1e-6)
    assert (k * k * p).sum() - (k * p).sum() ** 2 == pytest.approx(var, rel=1e-6)


# 60-digit mpmath sums of the three-parameter series
@pytest.mark.parametrize("lam,nu,t,k,expected", [
    (1.0, 0.5, 2.0, 20, 8.216204071508957e-08),
    (2.0, 0.3, 0.5, 80, 1.214127824992667e-25),
    (30.0, 0.5, 4.0, 55, 0.0075468180931923205),
    (30.0, 0.5, 4.0, 0, 0.009401854275176388),
    (1.0, 0.99, 1.0, 3, 0.0623140859214736),
    (1.0, 0.05, 1.0, 2, 0.12690705935329227),
])
def test_time_pmf_where_the_series_cancels(lam, nu, t, k, expected):
    assert pmf_time_frac(lam, nu, t, k) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("nu", [0.2, 0.45, 0.85])
def test_clock_density_route_matches_nested_quadrature(nu):
    from fraccp.fracpoisson import _pmf_time_frac_fallback, _pmf_time_frac_quad

    ts = np.array([0.01, 0.7, 3.0])
    for k in (0, 3, 25):
        table = _pmf_time_frac_fallback(2.0, nu, ts, k)
        nested = [_pmf_time_frac_quad(2.0, nu, t, k) for t in ts]
        assert np.allclose(table, nested, atol=1e-14, rtol=0)


def test_time_pmf_beyond_series_range_is_normalised():
    p = pmf_time_frac_table(40.0, 0.6, [3.0], 600)[0]
    assert abs(p.sum() - 1.0) < 1e-12
    assert np.all(p >= 0)
