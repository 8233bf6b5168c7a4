import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraccp.errors import QuadratureError
from fraccp.fracderiv import (
    ExpPoly,
    GridFunction,
    TailFunction,
    caputo_l1,
    caputo_l1_all,
    caputo_l1_iterated,
    classical_derivative,
    rl_right_quad,
    rl_right_values,
)
from fraccp.specfun import ml_general


def _grid(t_end: float, h: float) -> np.ndarray:
    return np.arange(int(round(t_end / h)) + 1) * h


def test_grid_function_validation():
    with pytest.raises(ValueError):
        GridFunction(0.0, 0.0, [1.0])
    with pytest.raises(ValueError):
        GridFunction(0.0, 0.1, [])


def test_caputo_needs_history_and_origin():
    f = GridFunction(0.0, 0.1, np.ones(5))
    with pytest.raises(ValueError, match="no history"):
        caputo_l1(f, 0.5, 0)
    with pytest.raises(ValueError):
        caputo_l1(GridFunction(1.0, 0.1, np.ones(5)), 0.5, 2)
    with pytest.raises(IndexError):
        caputo_l1(f, 0.5, 5)
    with pytest.raises(ValueError):
        caputo_l1_all(np.ones(5), 0.1, 1.0)


def test_caputo_of_constant_is_zero():
    d = caputo_l1_all(np.full(200, 3.7), 0.01, 0.4)
    assert np.isnan(d[0])
    assert np.all(d[1:] == 0.0)


@pytest.mark.parametrize("j", [0, 1, 2])
def test_caputo_power_rule(j):
    nu, h = 0.6, 1e-3
    p = nu * j + nu
    t = _grid(2.0, h)
    d = caputo_l1_all(t**p, h, nu)
    coeff = math.gamma(p + 1) / math.gamma(nu * j + 1)
    for i in (500, 1000, 2000):
        exact = coeff * t[i] ** (nu * j)
        assert abs(d[i] - exact) <= 1e-3 * exact
        assert caputo_l1(GridFunction(0.0, h, t**p), nu, i) == pytest.approx(d[i], rel=1e-12)


def test_caputo_order_of_accuracy():
    nu = 0.6
    p = 2 * nu
    exact = math.gamma(p + 1) / math.gamma(nu + 1)
    errs = []
    for h in (2e-3, 1e-3, 5e-4):
        t = _grid(1.0, h)
        errs.append(abs(caputo_l1_all(t**p, h, nu)[-1] - exact))
    for coarse, fine in zip(errs, errs[1:]):
        assert abs(math.log2(coarse / fine) - (2 - nu)) <= 0.2


@pytest.mark.parametrize("nu,c", [(0.5, -1.0), (0.7, -0.4), (0.3, -2.0)])
def test_caputo_mittag_leffler_eigenfunction(nu, c):
    h = 1e-3
    t = _grid(2.0, h)
    f = ml_general(c * t**nu, nu)
    d = caputo_l1_all(f, h, nu)
    sel = slice(250, None, 250)
    assert np.allclose(d[sel], c * f[sel], rtol=1e-2, atol=0)


def test_iterated_caputo_on_eigenfunction():
    nu, c, h = 0.6, -0.8, 1e-3
    t = _grid(2.0, h)
    f = ml_general(c * t**nu, nu)
    d2 = caputo_l1_iterated(f, h, nu)
    sel = slice(500, None, 500)
    assert np.allclose(d2[sel], c * c * f[sel], rtol=2e-2, atol=0)


@given(a=st.floats(-3, 3), b=st.floats(-3, 3))
@settings(max_examples=20, deadline=None)
def test_caputo_linearity(a, b):
    h, nu = 1e-2, 0.45
    t = _grid(1.0, h)
    f, g = np.sin(t), t**1.5
    lhs = caputo_l1_all(a * f + b * g, h, nu)[1:]
    rhs = a * caputo_l1_all(f, h, nu)[1:] + b * caputo_l1_all(g, h, nu)[1:]
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_caputo_classical_limit():
    h = 1e-3
    t = _grid(2.0, h)
    d = caputo_l1_all(np.sin(t) + t**2, h, 0.99)
    for i in (500, 1000, 2000):
        deriv = math.cos(t[i]) + 2 * t[i]
        assert abs(d[i] - deriv) <= 5e-2 * abs(deriv)


def _exp_tail(c: float) -> TailFunction:
    return TailFunction(lambda s: np.exp(-c * s), lambda s: math.exp(-c * s))


@pytest.mark.parametrize("nu,c,t", [(1.5, 1.0, 1.0), (1.25, 0.7, 0.3), (1.8, 2.0, 2.0), (2.0, 1.0, 1.0)])
def test_rl_exponential_eigenfunction(nu, c, t):
    exact = c**nu * math.exp(-c * t)
    assert rl_right_quad(_exp_tail(c), nu, t) == pytest.approx(exact, rel=1e-2)


def test_rl_exponential_eigenfunction_tight():
    # far below the 1e-2 requirement in practice
    assert rl_right_quad(_exp_tail(1.0), 1.5, 1.0) == pytest.approx(math.exp(-1.0), rel=1e-5)


@pytest.mark.parametrize("nu,c,t", [(1.5, 1.0, 1.0), (1.3, 0.5, 2.0)])
def test_rl_t_exp(nu, c, t):
    # t e^{-ct} = -d/dc e^{-ct}, so the derivative is -d/dc (c^nu e^{-ct})
    f = ExpPoly(c, np.array([0.0, 1.0]))
    exact = (t * c**nu - nu * c ** (nu - 1)) * math.exp(-c * t)
    assert rl_right_quad(f.as_tail(), nu, t) == pytest.approx(exact, rel=2e-2)


def test_rl_linearity():
    f = ExpPoly(1.0, np.array([1.0, 0.5]))
    g = ExpPoly(1.0, np.array([0.0, 0.0, 2.0]))
    a, b = 1.7, -0.6
    combo = ExpPoly(1.0, a * np.array([1.0, 0.5, 0.0]) + b * g.coeffs)
    ts = [0.2, 1.0, 3.0]
    lhs = rl_right_values(combo.as_tail(), 1.4, ts)
    rhs = a * rl_right_values(f.as_tail(), 1.4, ts) + b * rl_right_values(g.as_tail(), 1.4, ts)
    # quadrature errors are shared node for node; only the difference quotient sees rounding
    assert np.allclose(lhs, rhs, atol=1e-8, rtol=0)


def test_rl_classical_limit():
    c = 0.8
    f = ExpPoly(c, np.array([1.0, 0.5]))
    for t in (0.5, 1.0, 2.0):
        minus_deriv = -float(f.derivative()(t))
        val = rl_right_quad(f.as_tail(), 1.01, t)
        assert abs(val - minus_deriv) <= 5e-2 * abs(minus_deriv)
        exact = (c**1.01 + 0.5 * (t * c**1.01 - 1.01 * c**0.01)) * math.exp(-c * t)
        assert val == pytest.approx(exact, rel=1e-4)


def test_rl_insufficient_decay_reports_horizon():
    slow = TailFunction(lambda s: 1.0 / (1.0 + s) ** 1.2, lambda s: 1.0 / (1.0 + s) ** 1.2)
    with pytest.raises(QuadratureError) as info:
        rl_right_quad(slow, 1.5, 1.0, quad_tol=1e-10)
    assert "horizon" in str(info.value)


def test_rl_argument_validation():
    with pytest.raises(ValueError):
        rl_right_quad(_exp_tail(1.0), 0.5, 1.0)
    with pytest.raises(ValueError):
        rl_right_quad(_exp_tail(1.0), 1.5, -1.0)
    with pytest.raises(ValueError):
        rl_right_quad(_exp_tail(1.0), 1.5, 1.0, quad_tol=0.0)


def test_rl_near_zero_uses_forward_stencil():
    val = rl_right_quad(_exp_tail(1.0), 1.5, 0.0)
    assert val == pytest.approx(1.0, rel=1e-2)


def test_exppoly_derivative_and_bound():
    f = ExpPoly(2.0, np.array([1.0, -3.0, 0.5]))
    ts = np.linspace(0.1, 4.0, 9)
    fd = classical_derivative(f, ts, 1e-5)
    assert np.allclose(f.derivative()(ts), fd, rtol=1e-7, atol=1e-9)
    assert np.all(np.abs(f(ts)) <= f.abs_bound(ts) + 1e-15)
    bound = f.rl_bound(1.5)
    vals = rl_right_values(f.as_tail(), 1.5, ts)
    assert all(abs(v) <= bound(t) for v, t in zip(vals, ts))
