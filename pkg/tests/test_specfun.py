import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import erfc, gammaln

from fraccp.errors import OutOfRangeError, SeriesConvergenceError
from fraccp.specfun import (
    SeriesControl,
    falling_factorial,
    gen_binom,
    log_stirling1_unsigned,
    ml_general,
    rising_factorial,
    stirling1_unsigned,
)


@pytest.mark.parametrize("alpha, beta, x, expected", [
    (1.0, 1.0, 1.0, math.e),
    (0.5, 1.0, -1.0, math.e * erfc(1.0)),
    (2.0, 1.0, 1.0, math.cosh(1.0)),
    (1.0, 2.0, 1.0, math.e - 1.0),
    (0.5, 1.0, -3.0, math.exp(9.0) * erfc(3.0)),
])
def test_ml_closed_forms(alpha, beta, x, expected):
    assert ml_general(x, alpha, beta) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("nu", [0.1, 0.5, 0.9, 1.7])
def test_ml_at_zero_is_inverse_gamma(nu):
    assert ml_general(0.0, nu) == 1.0
    assert ml_general(0.0, nu, 2.5) == pytest.approx(1 / math.gamma(2.5), rel=1e-15)


def test_ml_three_parameter_against_direct_sum():
    x, a, b, g = -0.7, 0.6, 1.3, 2.5
    direct = math.fsum(rising_factorial(g, r) * x**r / (math.factorial(r) * math.gamma(a * r + b))
                       for r in range(80))
    assert ml_general(x, a, b, g) == pytest.approx(direct, abs=1e-13)


def test_ml_vectorised_matches_scalar():
    xs = np.linspace(-5, 3, 17)
    vec = ml_general(xs, 0.7, 1.2, 1.5)
    assert isinstance(vec, np.ndarray)
    assert np.allclose(vec, [ml_general(float(x), 0.7, 1.2, 1.5) for x in xs], atol=1e-14, rtol=0)


@given(alpha=st.floats(0.3, 1.0, exclude_max=True), x=st.floats(-20.0, 0.0))
@settings(max_examples=60, deadline=None)
def test_ml_relaxation_is_a_decreasing_probability(alpha, x):
    value = ml_general(x, alpha)
    assert 0 < value <= 1
    assert ml_general(x - 0.5, alpha) <= value + 1e-12


def test_ml_range_guard():
    with pytest.raises(OutOfRangeError):
        ml_general(-60.0, 0.5)
    with pytest.raises(OutOfRangeError):
        ml_general(np.array([1.0, np.nan]), 0.5)


def test_ml_precision_loss_is_reported():
    # e^{-40} is ~4e-18 while the largest term is ~1e16: cannot be resolved
    with pytest.raises(OutOfRangeError, match="precision"):
        ml_general(-40.0, 1.0)


def test_ml_budget_exhaustion_carries_partial_sum():
    with pytest.raises(SeriesConvergenceError) as info:
        ml_general(-1.0, 0.5, control=SeriesControl(max_terms=3))
    assert info.value.n_terms == 3
    assert info.value.partial_sum is not None


def test_series_control_validation():
    with pytest.raises(ValueError):
        SeriesControl(abs_tol=0)
    with pytest.raises(ValueError):
        SeriesControl(max_terms=0)
    with pytest.raises(ValueError):
        ml_general(1.0, 0.0)


@pytest.mark.parametrize("g, r, expected", [(3, 2, 12), (0.37, 0, 1), (0.5, 3, 1.875)])
def test_rising_factorial(g, r, expected):
    assert rising_factorial(g, r) == pytest.approx(expected)


@pytest.mark.parametrize("g, r, expected", [(0.5, 2, -0.25), (0.37, 0, 1), (4, 2, 12)])
def test_falling_factorial(g, r, expected):
    assert falling_factorial(g, r) == pytest.approx(expected)


@pytest.mark.parametrize("g, r, expected", [(0.5, 2, -0.125), (0.37, 0, 1), (1, 3, 0)])
def test_gen_binom(g, r, expected):
    assert gen_binom(g, r) == pytest.approx(expected)


@given(g=st.floats(0.01, 30.0), r=st.integers(0, 40))
def test_rising_factorial_matches_gamma_ratio(g, r):
    assert math.log(rising_factorial(g, r)) == pytest.approx(
        gammaln(g + r) - gammaln(g), rel=1e-12, abs=1e-12)


def test_negative_order_rejected():
    with pytest.raises(ValueError):
        rising_factorial(1.0, -1)


@pytest.mark.parametrize("k, n, expected", [(3, 2, 3), (4, 2, 11), (0, 0, 1), (5, 0, 0), (2, 5, 0)])
def test_stirling_values(k, n, expected):
    assert stirling1_unsigned(k, n) == expected


@pytest.mark.parametrize("k", range(0, 13))
def test_stirling_diagonal_and_row_sums(k):
    assert stirling1_unsigned(k, k) == 1
    assert sum(stirling1_unsigned(k, n) for n in range(k + 1)) == math.factorial(k)


def test_stirling_large_rows_exact_and_logged():
    assert stirling1_unsigned(600, 1) == math.factorial(599)
    assert log_stirling1_unsigned(600, 1) == pytest.approx(math.lgamma(600), rel=1e-14)
    assert log_stirling1_unsigned(3, 4) == -math.inf
