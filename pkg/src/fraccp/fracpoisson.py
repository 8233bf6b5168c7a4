"""Fractional Poisson processes: pmfs, moments and the fractional difference operator.

Two time changes of a rate-``lam`` Poisson process are covered:

* time-fractional, ``nu`` in (0, 1): the clock is an inverse stable
  subordinator and the pmf is ``(lam t^nu)^k E^{k+1}_{nu, nu k + 1}(-lam t^nu)``.
  Where that series cancels badly (small ``nu``, large ``k`` or large
  ``lam t^nu``) the pmf is computed instead as the Poisson probability averaged
  over the law of the clock. Writing ``L(t) = t^nu (E / K(U))^(1-nu)`` with
  ``U`` uniform on (0, pi), ``E`` standard exponential and ``K`` Kanter's
  function turns this into a double integral of a positive integrand. For
  ``nu <= 0.85`` the density of ``L(t) / t^nu`` is tabulated once per ``nu`` on
  a log grid, after which every ``(t, k)`` is a trapezoid sum; closer to 1 the
  grid gets too fine and the double integral is done adaptively per point;
* space-fractional, ``nu`` > 1: the clock is a stable subordinator of index
  ``1/nu`` and the pmf is the alternating series
  ``(-1)^k / k! sum_r (-x)^r / r! (r/nu)_k`` with ``x = lam^(1/nu) t``.

The space-fractional pmf can also be written exactly as ``exp(-x)`` times a
degree-``k`` polynomial in ``x`` (Newton forward-difference form). That form
is free of cancellation at large ``x`` and is what the quadrature-based
derivative checks use.
"""

from __future__ import annotations

import enum
import functools
import math
from collections.abc import Sequence

import numpy as np
from scipy import integrate
from scipy.special import gamma as gamma_fn
from scipy.special import gammaln

from .errors import OutOfRangeError, SeriesConvergenceError
from .specfun import ML_SAFE_ABS_X, SeriesControl, _ml_series, gen_binom

__all__ = [
    "Regime",
    "regime_of",
    "pmf_time_frac",
    "pmf_time_frac_table",
    "pmf_space_frac",
    "pmf_space_frac_table",
    "space_frac_newton_coeffs",
    "frac_difference",
    "overdispersion_factor",
    "tf_moments",
    "SPACE_SERIES_MAX_X",
]

SPACE_SERIES_MAX_X = 20.0
NEWTON_MAX_K = 60


class Regime(str, enum.Enum):
    TIME = "time"
    SPACE = "space"


def regime_of(nu: float) -> Regime:
    """Classify a fractional order; ``nu == 1`` is the classical case and rejected."""
    if not nu > 0 or not math.isfinite(nu):
        raise ValueError(f"fractional order nu must be positive and finite, got {nu}")
    if nu == 1:
        raise ValueError("nu = 1 is the classical Poisson process, not a fractional order")
    return Regime.TIME if nu < 1 else Regime.SPACE


def _check_common(lam: float, t, k: int):
    if not lam > 0:
        raise ValueError(f"lambda must be > 0, got {lam}")
    if np.any(np.asarray(t) < 0):
        raise ValueError("t must be >= 0")
    if k < 0:
        raise ValueError("k must be >= 0")


# pmfs are wanted to ~1e-12 absolute; anything the series cannot certify goes to quadrature
PMF_CONTROL = SeriesControl(abs_tol=1e-15, cancel_tol=1e-12)
# beyond this k log x the weight x^k overflows
_MAX_LOG_WEIGHT = 700.0


# above this nu the clock density table needs too many nodes to pay off
_TABLE_MAX_NU = 0.85


def _log_rate_factor(phi, nu: float):
    """``log K(phi)^(nu-1)`` for Kanter's function ``K``, in a form stable as ``nu -> 1``."""
    return (-nu * np.log(np.sin(nu * phi)) + np.log(np.sin(phi))
            - (1.0 - nu) * np.log(np.sin((1.0 - nu) * phi)))


@functools.lru_cache(maxsize=16)
def _clock_density_table(nu: float) -> tuple[np.ndarray, float, np.ndarray]:
    """Log grid ``u``, its step and ``h(u) = a f(a)`` at ``a = e^u``, ``f`` the density of ``L(1)``.

    Given ``U = phi``, ``P(L(1) <= a) = 1 - exp(-K(phi) a^(1/(1-nu)))``, so with
    ``w = K(phi) e^(u/(1-nu))`` one has ``h(u) = 1/(pi (1-nu)) int w e^-w dphi``.
    The trapezoid rule in ``u`` converges geometrically because the integrand is
    analytic in a strip of half-width ``(1-nu) pi / 2``; the step is a fixed
    fraction of that width.
    """
    scale = 1.0 - nu
    log_k_min = float(_log_rate_factor(1e-8, nu)) / (nu - 1.0)  # K increases in phi
    u_lo = -40.0  # P(L(1) < e^-40) ~ e^-40 / Gamma(1 - nu)
    u_hi = scale * (math.log(800.0) - log_k_min)
    step = 0.1 * scale
    # u_lo + step * i rather than arange: arange's step picks up rounding from u_lo
    u = u_lo + step * np.arange(int(math.ceil((u_hi - u_lo) / step)) + 1)
    z = u / scale

    def integrand(phi):
        w = np.exp(np.minimum(_log_rate_factor(phi, nu) / (nu - 1.0) + z, 700.0))
        return w * np.exp(-w)

    h, _ = integrate.quad_vec(integrand, 0.0, math.pi, epsabs=1e-17, epsrel=1e-13,
                              norm="max", limit=4000)
    return u, step, h / (math.pi * scale)


def _pmf_time_frac_fallback(lam: float, nu: float, ts: np.ndarray, k: int) -> np.ndarray:
    """``P(N(t) = k)`` at each ``t > 0`` by averaging the Poisson pmf over the clock."""
    if nu > _TABLE_MAX_NU:
        return np.array([_pmf_time_frac_quad(lam, nu, float(t), k) for t in ts])
    u, step, h = _clock_density_table(float(nu))
    log_m = (math.log(lam) + nu * np.log(ts))[:, None] + u[None, :]
    poisson = np.exp(k * log_m - np.exp(log_m) - math.lgamma(k + 1.0))
    return np.clip(step * (poisson @ h), 0.0, 1.0)


def _pmf_time_frac_quad(lam: float, nu: float, t: float, k: int) -> float:
    """``P(N(t) = k)`` as ``E[Poisson(k; lam L(t))]`` by nested adaptive quadrature."""
    if t == 0:
        return 1.0 if k == 0 else 0.0
    base = lam * t**nu
    lgk = math.lgamma(k + 1.0)

    # e^(-e) underflows past e = 745; below e^-75 the k = 0 integrand is negligible
    u_lo, u_hi = -75.0, math.log(745.0)

    def over_exponential(phi: float) -> float:
        log_c = math.log(base) + float(_log_rate_factor(phi, nu))

        # substitute e = exp(u): the mass sits at very different scales as phi varies
        def integrand(u: float) -> float:
            log_m = log_c + (1.0 - nu) * u
            return math.exp(u - math.exp(u) + k * log_m - math.exp(log_m) - lgk)

        # where the Poisson factor peaks (m = max(k, 1)) and where e^(-e) cuts off
        u_peak = (math.log(max(k, 1)) - log_c) / (1.0 - nu)
        pts = sorted({min(max(u_peak, u_lo + 1.0), u_hi - 1.0), 0.0})
        value, _ = integrate.quad(integrand, u_lo, u_hi, points=pts,
                                  epsabs=1e-17, epsrel=1e-12, limit=400)
        return value

    value, _ = integrate.quad(over_exponential, 0.0, math.pi, epsabs=1e-15, epsrel=1e-12,
                              limit=400)
    return min(max(value / math.pi, 0.0), 1.0)


def _series_block(x: np.ndarray, nu: float, k: int, ctl: SeriesControl):
    """Series pmf values at rates ``x`` and a mask of entries it could not certify."""
    ok = (x <= ML_SAFE_ABS_X) & (k * np.log(x) < _MAX_LOG_WEIGHT)
    vals = np.zeros_like(x)
    if ok.any():
        xk = x[ok] ** k
        sums, blown = _ml_series(-x[ok], nu, nu * k + 1.0, k + 1.0, ctl, xk)
        vals[ok] = xk * sums
        ok[np.flatnonzero(ok)[blown]] = False
    return vals, ~ok


def pmf_time_frac(lam: float, nu: float, t: float, k: int,
                  control: SeriesControl | None = None) -> float:
    """``P(N^nu_lam(t) = k)`` for ``nu`` in (0, 1)."""
    return float(pmf_time_frac_table(lam, nu, [t], k, control, ks=[k])[0, 0])


def pmf_time_frac_table(lam: float, nu: float, t, k_max: int,
                        control: SeriesControl | None = None, *, ks=None) -> np.ndarray:
    """Array of shape ``(len(t), k_max + 1)`` with ``P(N^nu_lam(t_i) = k)``.

    ``ks`` restricts the columns to the listed counts.
    """
    if not 0 < nu < 1:
        raise ValueError(f"time-fractional pmf needs nu in (0, 1), got {nu}")
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    _check_common(lam, ts, k_max)
    cols = range(k_max + 1) if ks is None else list(ks)
    out = np.zeros((ts.size, len(cols)))
    pos = np.flatnonzero(ts > 0)
    x = lam * ts[pos] ** nu
    ctl = control or PMF_CONTROL
    for j, k in enumerate(cols):
        if k == 0:
            out[ts == 0, j] = 1.0
        vals, todo = _series_block(x, nu, k, ctl)
        out[pos, j] = vals
        if todo.any():
            out[pos[todo], j] = _pmf_time_frac_fallback(lam, nu, ts[pos[todo]], k)
    return out


def _space_series(x: float, nu: float, k: int, ctl: SeriesControl) -> float:
    if x == 0:
        return 1.0 if k == 0 else 0.0
    logx = math.log(x)
    terms = []
    abs_sum = 0.0
    prev = math.inf
    for r in range(ctl.max_terms):
        ff = math.prod(r / nu - i for i in range(k)) if k else 1.0
        if ff == 0.0:
            mag = 0.0
            term = 0.0
        else:
            mag = math.exp(r * logx - math.lgamma(r + 1.0) + math.log(abs(ff)))
            sign = (-1.0) ** r * math.copysign(1.0, ff)
            term = sign * mag
        terms.append(term)
        abs_sum += mag
        # stop once past the peak, the signs have settled and the tail is negligible
        settled = r > x and r / nu > k - 1
        if settled and mag < ctl.abs_tol and mag <= prev:
            break
        if mag > 0:
            prev = mag
    else:
        raise SeriesConvergenceError(
            f"space-fractional series did not converge in {ctl.max_terms} terms",
            partial_sum=math.fsum(terms) * (-1) ** k / math.factorial(k),
            n_terms=ctl.max_terms)
    scale = 1.0 / math.factorial(k)
    err = 4.0 * np.finfo(float).eps * abs_sum * scale
    if err > ctl.cancel_tol:
        raise OutOfRangeError(
            f"space-fractional series loses precision at x={x} "
            f"(estimated rounding error {err:.3g})")
    return (-1) ** k * scale * math.fsum(terms)


@functools.lru_cache(maxsize=1024)
def space_frac_newton_coeffs(nu: float, k: int) -> np.ndarray:
    """Coefficients ``a_i`` with ``P(N^hat(t)=k) = exp(-x) sum_i a_i x^i``, ``x = lam^(1/nu) t``.

    Expanding ``(r/nu)_k`` in falling factorials of ``r`` with forward
    differences turns the alternating series into a finite sum.
    """
    if k > NEWTON_MAX_K:
        raise OutOfRangeError(f"Newton form limited to k <= {NEWTON_MAX_K}, got {k}")
    poly_vals = np.array([math.prod(m / nu - i for i in range(k)) for m in range(k + 1)])
    b = np.empty(k + 1)
    for i in range(k + 1):
        diff = math.fsum((-1) ** (i - m) * math.comb(i, m) * poly_vals[m] for m in range(i + 1))
        b[i] = diff / math.factorial(i)
    signs = np.array([(-1.0) ** i for i in range(k + 1)])
    coeffs = (-1) ** k / math.factorial(k) * b * signs
    coeffs.flags.writeable = False  # cached and shared between callers
    return coeffs


def pmf_space_frac(lam: float, nu: float, t: float, k: int, method: str = "series",
                   control: SeriesControl | None = None) -> float:
    """``P(N^hat^nu_lam(t) = k)`` for ``nu > 1``.

    ``method="series"`` sums the alternating series directly and is limited
    to ``lam^(1/nu) t <= 20``; ``method="newton"`` uses the finite
    exponential-polynomial form and accepts any ``t``.
    """
    if not nu > 1:
        raise ValueError(f"space-fractional pmf needs nu > 1, got {nu}")
    _check_common(lam, t, k)
    x = lam ** (1.0 / nu) * t
    if method == "series":
        if x > SPACE_SERIES_MAX_X:
            raise OutOfRangeError(
                f"space-fractional series limited to lam^(1/nu) t <= {SPACE_SERIES_MAX_X}, got {x}")
        return _space_series(x, nu, k, control or SeriesControl())
    if method == "newton":
        coeffs = space_frac_newton_coeffs(nu, k)
        return float(math.exp(-x) * np.polynomial.polynomial.polyval(x, coeffs))
    raise ValueError(f"unknown method {method!r}")


def pmf_space_frac_table(lam: float, nu: float, t, k_max: int,
                         method: str = "newton") -> np.ndarray:
    """Array of shape ``(len(t), k_max + 1)``; vectorised over ``t`` for the Newton form."""
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    _check_common(lam, ts, k_max)
    if not nu > 1:
        raise ValueError(f"space-fractional pmf needs nu > 1, got {nu}")
    if method == "series":
        return np.array([[pmf_space_frac(lam, nu, ti, k) for k in range(k_max + 1)] for ti in ts])
    x = lam ** (1.0 / nu) * ts
    ex = np.exp(-x)
    out = np.empty((ts.size, k_max + 1))
    for k in range(k_max + 1):
        out[:, k] = ex * np.polynomial.polynomial.polyval(x, space_frac_newton_coeffs(nu, k))
    return out


def frac_difference(eta: float, f: Sequence[float], k: int) -> float:
    """``(1 - B)^eta f(k) = sum_{j=0}^{k} (-1)^j binom(eta, j) f(k - j)``.

    ``f`` is indexed from 0; entries at negative indices are taken as 0.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if k >= len(f):
        raise IndexError(f"sequence has {len(f)} entries, k={k} requested")
    return math.fsum((-1) ** j * gen_binom(eta, j) * f[k - j] for j in range(k + 1))


def overdispersion_factor(nu):
    """``Z(nu) = (1/nu) (1/Gamma(2 nu) - 1/(nu Gamma(nu)^2))``; zero at ``nu = 1``."""
    nu = np.asarray(nu, dtype=float)
    z = (np.exp(-gammaln(2 * nu)) - np.exp(-2 * gammaln(nu)) / nu) / nu
    z = np.where(nu == 1.0, 0.0, z)
    return float(z) if z.ndim == 0 else z


def tf_moments(lam: float, nu: float, t: float) -> tuple[float, float, float]:
    """Mean, variance and ``Z(nu)`` of the time-fractional Poisson count at ``t``.

    ``nu = 1`` is accepted and gives the classical Poisson moments.
    """
    if not 0 < nu <= 1:
        raise ValueError(f"nu must be in (0, 1], got {nu}")
    if not lam > 0 or not t > 0:
        raise ValueError("lambda and t must be > 0")
    z = overdispersion_factor(nu)
    lt = lam * t**nu
    mean = lt / float(gamma_fn(nu + 1.0))
    return mean, mean + lt**2 * z, z
