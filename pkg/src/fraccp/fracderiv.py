"""Numerical fractional derivatives used to check the governing equations.

* Caputo derivative of order ``nu`` in (0, 1) by the L1 scheme on a uniform
  grid starting at 0.
* Right-sided Riemann-Liouville derivative of order ``nu`` in (1, 2]:
  ``(d/dt)^2 I(t)`` with ``I(t) = 1/Gamma(2-nu) int_0^inf f(t+u) u^(1-nu) du``.
  The integral uses a fixed composite Gauss rule (Gauss-Jacobi on the panel
  holding the endpoint singularity, Gauss-Legendre beyond it) and the outer
  derivative is a central second difference. All stencil points share the
  same quadrature nodes, so quadrature error is smooth in ``t`` and is not
  amplified by the difference quotient.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import gamma as gamma_fn
from scipy.special import roots_jacobi, roots_legendre

from .errors import QuadratureError

__all__ = [
    "GridFunction",
    "TailFunction",
    "ExpPoly",
    "caputo_l1",
    "caputo_l1_all",
    "caputo_l1_iterated",
    "rl_right_quad",
    "rl_right_values",
    "classical_derivative",
]


@dataclass(frozen=True)
class GridFunction:
    """Samples ``values[i] = f(t0 + i h)`` on a uniform grid."""

    t0: float
    h: float
    values: np.ndarray

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError(f"grid step must be > 0, got {self.h}")
        vals = np.asarray(self.values, dtype=float)
        if vals.size == 0:
            raise ValueError("grid function needs at least one value")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class TailFunction:
    """A function on ``[0, inf)`` together with a certified bound on ``|f|``.

    ``eval`` must accept numpy arrays. ``decay_bound(s)`` must bound
    ``|f(s)|`` and be nonincreasing for large ``s``.
    """

    eval: Callable[[np.ndarray], np.ndarray]
    decay_bound: Callable[[float], float]


def _l1_weights(n: int, nu: float) -> np.ndarray:
    j = np.arange(n, dtype=float)
    return (j + 1.0) ** (1.0 - nu) - j ** (1.0 - nu)


def caputo_l1_all(values, h: float, nu: float) -> np.ndarray:
    """L1 approximation of the Caputo derivative at every node but the first.

    Entry 0 is NaN: there is no history at ``t = 0``.
    """
    if not 0 < nu < 1:
        raise ValueError(f"Caputo order must be in (0, 1), got {nu}")
    f = np.asarray(values, dtype=float)
    n = f.size
    out = np.full(n, np.nan)
    if n < 2:
        return out
    d = np.diff(f)
    b = _l1_weights(n - 1, nu)
    # D_i = sum_{j<i} b_j (f_{i-j} - f_{i-j-1}), a discrete convolution
    if n > 512:
        from scipy.signal import fftconvolve

        conv = fftconvolve(b, d)[: n - 1]
    else:
        conv = np.convolve(b, d)[: n - 1]
    out[1:] = conv / (h**nu * math.gamma(2.0 - nu))
    return out


def caputo_l1(f: GridFunction, nu: float, i: int) -> float:
    """L1 Caputo derivative of order ``nu`` at node ``i`` (``t = i h``)."""
    if f.t0 != 0:
        raise ValueError("the Caputo derivative is taken from t = 0; grid must start at 0")
    if i < 1:
        raise ValueError("node 0 has no history; need i >= 1")
    if i >= f.values.size:
        raise IndexError(f"node {i} outside grid of {f.values.size} points")
    d = np.diff(f.values[: i + 1])[::-1]
    b = _l1_weights(i, nu)
    return float(math.fsum(b * d) / (f.h**nu * math.gamma(2.0 - nu)))


def caputo_l1_iterated(values, h: float, nu: float) -> np.ndarray:
    """Caputo derivative applied twice on the same grid.

    The first pass has no value at ``t = 0``. It is filled by the limit of
    the derivative for ``f(t) = f(0) + a t^nu + ...``, namely
    ``Gamma(1 + nu) (f_1 - f_0) / h^nu``, before the second pass.
    """
    f = np.asarray(values, dtype=float)
    first = caputo_l1_all(f, h, nu)
    first[0] = math.gamma(1.0 + nu) * (f[1] - f[0]) / h**nu
    return caputo_l1_all(first, h, nu)


def classical_derivative(func: Callable, t, step: float = 1e-4):
    """Central first difference ``(f(t+h) - f(t-h)) / 2h``."""
    t = np.asarray(t, dtype=float)
    return (func(t + step) - func(t - step)) / (2.0 * step)


@dataclass(frozen=True)
class ExpPoly:
    """``f(t) = exp(-c t) * sum_i coeffs[i] t^i`` with ``c > 0``."""

    c: float
    coeffs: np.ndarray = field(repr=False)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(-self.c * t) * np.polynomial.polynomial.polyval(t, self.coeffs)

    def derivative(self, m: int = 1) -> ExpPoly:
        out = self
        for _ in range(m):
            P = np.polynomial.Polynomial(out.coeffs)
            new = P.deriv() - self.c * P
            out = ExpPoly(self.c, np.atleast_1d(new.coef))
        return out

    def abs_bound(self, s):
        """``exp(-c s) sum_i |coeffs[i]| s^i`` bounds ``|f(s)|`` for ``s >= 0``."""
        s = np.maximum(np.asarray(s, dtype=float), 0.0)
        return np.exp(-self.c * s) * np.polynomial.polynomial.polyval(s, np.abs(self.coeffs))

    def rl_bound(self, nu: float) -> Callable:
        """A bound on ``|D^nu_- f(t)|`` from ``|f''|`` and the kernel moments."""
        d2 = np.abs(self.derivative(2).coeffs)
        if nu == 2:
            return ExpPoly(self.c, d2).abs_bound
        beta = 2.0 - nu
        c = self.c

        def bound(t):
            t = max(float(t), 0.0)
            total = d2[0] * c ** (-beta)
            for i in range(1, d2.size):
                # (t + u)^i <= 2^(i-1) (t^i + u^i)
                total += d2[i] * 2.0 ** (i - 1) * (
                    t**i * c ** (-beta) + gamma_fn(i + beta) / gamma_fn(beta) * c ** (-(i + beta)))
            return math.exp(-c * t) * total

        return bound

    def as_tail(self) -> TailFunction:
        return TailFunction(self, lambda s: float(self.abs_bound(s)))


class _Rule:
    """Fixed nodes/weights for ``int_0^T g(u) u^(beta-1) du``."""

    def __init__(self, beta: float, horizon: float, level: int):
        n_sing = 8 * 2**level
        first = min(1.0, horizon)
        x, w = roots_jacobi(n_sing, 0.0, beta - 1.0)
        u = first * (x + 1.0) / 2.0
        w = w * (first / 2.0) ** beta
        nodes, weights = [u], [w]
        if horizon > first:
            n_panels = int(math.ceil((horizon - first) / 2.0)) * 2**level
            xl, wl = roots_legendre(12)
            edges = np.linspace(first, horizon, n_panels + 1)
            a, b = edges[:-1, None], edges[1:, None]
            uu = (a + b) / 2.0 + (b - a) / 2.0 * xl[None, :]
            ww = (b - a) / 2.0 * wl[None, :] * uu ** (beta - 1.0)
            nodes.append(uu.ravel())
            weights.append(ww.ravel())
        self.u = np.concatenate(nodes)
        self.w = np.concatenate(weights)

    def apply(self, f: Callable, ts: np.ndarray) -> np.ndarray:
        vals = f(ts[:, None] + self.u[None, :])
        return vals @ self.w


def _horizon(f: TailFunction, beta: float, t_min: float, tol: float,
             max_horizon: float) -> float:
    horizon = 8.0
    while True:
        if beta == 0.0:
            tail = abs(f.decay_bound(t_min + horizon))
        else:
            tail_int, _ = integrate.quad(f.decay_bound, t_min + horizon, np.inf, limit=200)
            tail = horizon ** (beta - 1.0) * tail_int / math.gamma(beta)
        if tail < tol / 10.0:
            return horizon
        if horizon >= max_horizon:
            raise QuadratureError(
                f"decay bound too weak: tail {tail:.3g} at horizon {horizon} exceeds {tol / 10:.3g}",
                required_horizon=None)
        horizon *= 2.0


def rl_right_values(f: TailFunction, nu: float, ts, quad_tol: float = 1e-10,
                    max_horizon: float = 4096.0, max_level: int = 6) -> np.ndarray:
    """Right-sided Riemann-Liouville derivative of order ``nu`` at each ``t`` in ``ts``."""
    if not 1 < nu <= 2:
        raise ValueError(f"right-sided RL order must be in (1, 2], got {nu}")
    if not quad_tol > 0:
        raise ValueError("quad_tol must be > 0")
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    if np.any(ts < 0):
        raise ValueError("t must be >= 0")
    step = quad_tol**0.25
    # central stencil where possible, forward stencil near t = 0
    centre = np.where(ts >= step, ts, ts + step)
    stencil = np.concatenate([centre - step, centre, centre + step])

    if nu == 2:
        vals = f.eval(stencil)
    else:
        beta = 2.0 - nu
        horizon = _horizon(f, beta, float(stencil.min()), quad_tol, max_horizon)
        prev = None
        for level in range(max_level + 1):
            rule = _Rule(beta, horizon, level)
            vals = rule.apply(f.eval, stencil) / math.gamma(beta)
            if prev is not None and np.max(np.abs(vals - prev)) < quad_tol:
                break
            prev = vals
        else:
            raise QuadratureError(
                f"composite Gauss rule did not reach {quad_tol:g} at level {max_level}")
    n = ts.size
    lo, mid, hi = vals[:n], vals[n:2 * n], vals[2 * n:]
    return (lo - 2.0 * mid + hi) / step**2


def rl_right_quad(f: TailFunction, nu: float, t: float, quad_tol: float = 1e-10) -> float:
    """Right-sided Riemann-Liouville derivative ``D^nu_- f(t)`` for ``nu`` in (1, 2].

    Raises :class:`QuadratureError` when the decay bound cannot certify a
    truncation horizon or the rule fails to converge.
    """
    return float(rl_right_values(f, nu, [t], quad_tol)[0])
