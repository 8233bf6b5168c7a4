"""Scalar special functions: Mittag-Leffler series, factorial symbols, Stirling numbers.

The three-parameter Mittag-Leffler function

    E^g_{a,b}(x) = sum_{r>=0} (g)^{(r)} x^r / (r! Gamma(a r + b))

is evaluated by direct summation. Terms are built in log space with sign
tracking and accumulated with Neumaier compensation, so transient growth of
individual terms does not overflow. The sum of absolute terms is tracked as
well; when rounding of the largest terms would swamp the result the
evaluation refuses instead of returning digits that are not there.

The relaxation function ``E_a(-x)`` (``0 < a < 1``, ``beta = gamma = 1``) has
the completely monotone representation

    E_a(-x) = int_0^inf exp(-r x^(1/a)) K_a(r) dr,
    K_a(r) = sin(a pi) r^(a-1) / (pi (r^(2a) + 2 r^a cos(a pi) + 1)),

which is used by quadrature wherever the series would lose precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from .errors import OutOfRangeError, SeriesConvergenceError

__all__ = [
    "SeriesControl",
    "ml_general",
    "rising_factorial",
    "falling_factorial",
    "gen_binom",
    "stirling1_unsigned",
    "log_stirling1_unsigned",
    "ML_SAFE_ABS_X",
]

ML_SAFE_ABS_X = 50.0
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class SeriesControl:
    """Truncation controls for series evaluation.

    ``cancel_tol`` bounds the admissible rounding error, estimated as
    ``eps * (4 sum|terms| + sqrt(sum (|term| * |log-space exponent|)^2))``.
    Larger estimates raise :class:`OutOfRangeError`.
    """

    abs_tol: float = 1e-12
    max_terms: int = 10_000
    cancel_tol: float = 1e-9

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError(f"abs_tol must be > 0, got {self.abs_tol}")
        if self.max_terms < 1:
            raise ValueError(f"max_terms must be >= 1, got {self.max_terms}")
        if not self.cancel_tol > 0:
            raise ValueError(f"cancel_tol must be > 0, got {self.cancel_tol}")


DEFAULT_CONTROL = SeriesControl()


def ml_general(x, alpha: float, beta: float = 1.0, gamma: float = 1.0,
               control: SeriesControl | None = None, *, weight=None):
    """Three-parameter Mittag-Leffler function ``E^gamma_{alpha,beta}(x)``.

    ``x`` may be a scalar or an array; the return type follows it. With
    ``gamma=1`` this is the two-parameter function ``E_{alpha,beta}``.

    ``weight`` (broadcast against ``x``) applies the stopping rule and the
    rounding-error guard to ``weight * E`` instead of ``E``. Callers that
    multiply the result by a known factor, such as ``x^k`` in a pmf, pass
    that factor here.

    Raises
    ------
    OutOfRangeError
        ``|x| > 50``, or the estimated rounding error exceeds
        ``control.cancel_tol`` and no integral representation applies.
    SeriesConvergenceError
        The stopping rule was not met within ``control.max_terms`` terms.
    """
    if not (alpha > 0 and beta > 0 and gamma > 0):
        raise ValueError(
            f"alpha, beta, gamma must all be > 0 (got {alpha}, {beta}, {gamma})")
    ctl = control or DEFAULT_CONTROL
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(~np.isfinite(xs)) or np.any(np.abs(xs) > ML_SAFE_ABS_X):
        raise OutOfRangeError(
            f"Mittag-Leffler series limited to |x| <= {ML_SAFE_ABS_X}; "
            f"got max |x| = {np.max(np.abs(xs))}")

    w = np.ones_like(xs) if weight is None else np.broadcast_to(
        np.abs(np.asarray(weight, dtype=float)), xs.shape)
    try:
        result, blown = _ml_series(xs, alpha, beta, gamma, ctl, w)
    except SeriesConvergenceError as exc:
        if scalar:
            exc.partial_sum = float(np.asarray(exc.partial_sum)[0])
        raise
    relaxation = gamma == 1 and beta == 1 and alpha < 1
    if blown.any():
        fixable = blown & (xs < 0) if relaxation else np.zeros_like(blown)
        if np.any(blown & ~fixable):
            bad = float(xs[np.argmax(blown & ~fixable)])
            raise OutOfRangeError(
                f"Mittag-Leffler series loses precision at x={bad} "
                f"(estimated rounding error exceeds {ctl.cancel_tol})")
        for i in np.flatnonzero(fixable):
            result[i] = _relaxation_integral(-xs[i], alpha, ctl.abs_tol)
    return float(result[0]) if scalar else result


def _ml_series(xs: np.ndarray, alpha: float, beta: float, gamma: float,
                     ctl: SeriesControl, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sum the series for each entry of ``xs`` (``|xs| <= 50``, weights ``w``).

    Returns the sums and a mask of entries whose rounding estimate exceeded
    ``ctl.cancel_tol``; those sums are unreliable and left for the caller.
    """
    total = np.zeros_like(xs)
    comp = np.zeros_like(xs)
    abs_total = np.zeros_like(xs)
    log_err_sq = np.zeros_like(xs)
    done = np.zeros(xs.shape, dtype=bool)
    blown = np.zeros(xs.shape, dtype=bool)
    zero = xs == 0.0
    with np.errstate(divide="ignore"):
        logabs = np.log(np.abs(xs))
    neg = xs < 0
    lg_gamma0 = gammaln(gamma)
    prev = np.full_like(xs, np.inf)

    for r in range(ctl.max_terms):
        parts = (gammaln(gamma + r), lg_gamma0, gammaln(r + 1.0), gammaln(alpha * r + beta))
        logc = parts[0] - parts[1] - parts[2] - parts[3]
        log_norm_sq = sum(v * v for v in parts)
        if r == 0:
            term = np.full_like(xs, math.exp(logc))
        else:
            mag = np.where(zero, 0.0, np.exp(logc + r * np.where(zero, 0.0, logabs)))
            term = np.where(neg & (r % 2 == 1), -mag, mag)
        term = np.where(done, 0.0, term)
        # Neumaier compensated accumulation
        s = total + term
        comp += np.where(np.abs(total) >= np.abs(term), (total - s) + term, (term - s) + total)
        total = s
        mag = np.abs(term)
        abs_total += mag
        # exp of a log-space sum turns its absolute rounding into relative error;
        # those errors are independent across terms, so they add in quadrature
        log_err_sq += mag**2 * (log_norm_sq + (r * np.where(zero, 0.0, logabs)) ** 2)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(prev > 0, mag / prev, 0.0)
            tail = np.where(ratio < 1.0, mag * ratio / (1.0 - ratio), np.inf)
        finished = (mag * w < ctl.abs_tol) & (tail * w < ctl.abs_tol)
        if r == 0:
            finished |= zero
        # stop early once rounding alone would exceed the tolerance
        rounding = _EPS * (4.0 * abs_total + np.sqrt(log_err_sq))
        lost = ~done & (rounding * w > ctl.cancel_tol)
        blown |= lost
        done |= (finished | lost) & ~done
        prev = np.where(done, 0.0, mag)
        if done.all():
            break
    else:
        result = total + comp
        raise SeriesConvergenceError(
            f"Mittag-Leffler series did not converge in {ctl.max_terms} terms",
            partial_sum=result,
            n_terms=ctl.max_terms)

    return total + comp, blown


def _relaxation_integral(x: float, alpha: float, abs_tol: float) -> float:
    """``E_alpha(-x)`` for ``x > 0`` and ``0 < alpha < 1`` from its spectral integral."""
    s = x ** (1.0 / alpha)
    c, sn = math.cos(alpha * math.pi), math.sin(alpha * math.pi)

    def smooth(r):
        ra = r**alpha
        return math.exp(-r * s) * sn / (math.pi * (ra * ra + 2.0 * ra * c + 1.0))

    # r^(alpha-1) is handled as an algebraic weight on [0, 1]
    head, _ = integrate.quad(smooth, 0.0, 1.0, weight="alg", wvar=(alpha - 1.0, 0.0),
                             epsabs=abs_tol / 10, epsrel=1e-13, limit=200)
    tail, _ = integrate.quad(lambda r: r ** (alpha - 1.0) * smooth(r), 1.0, np.inf,
                             epsabs=abs_tol / 10, epsrel=1e-13, limit=200)
    return head + tail


def rising_factorial(g: float, r: int) -> float:
    """Pochhammer symbol ``g (g+1) ... (g+r-1)``; 1 when ``r == 0``."""
    if r < 0:
        raise ValueError("r must be a nonnegative integer")
    return math.prod(g + i for i in range(r)) if r else 1.0


def falling_factorial(g: float, r: int) -> float:
    """``g (g-1) ... (g-r+1)``; 1 when ``r == 0``."""
    if r < 0:
        raise ValueError("r must be a nonnegative integer")
    return math.prod(g - i for i in range(r)) if r else 1.0


def gen_binom(g: float, r: int) -> float:
    """Generalised binomial coefficient ``falling_factorial(g, r) / r!``."""
    if r < 0:
        raise ValueError("r must be a nonnegative integer")
    # interleave numerator and denominator factors so the running product
    # stays near 1 and only overflows or underflows if the result does
    value, i, j = 1.0, 0, 0
    while i < r or j < r:
        if j < r and (abs(value) >= 1.0 or i == r):
            j += 1
            value /= j
        else:
            value *= g - i
            i += 1
            if value == 0.0:
                return 0.0
    return value


@lru_cache(maxsize=None)
def _stirling_row(k: int) -> tuple[int, ...]:
    if k == 0:
        return (1,)
    prev = _stirling_row(k - 1)
    # |s(k, n)| = |s(k-1, n-1)| + (k-1) |s(k-1, n)|
    row = [0] * (k + 1)
    for n in range(1, k + 1):
        row[n] = prev[n - 1] + (k - 1) * (prev[n] if n < k else 0)
    return tuple(row)


def stirling1_unsigned(k: int, n: int) -> int:
    """Unsigned Stirling number of the first kind ``|s(k, n)|`` as an exact int.

    Rows are built from ``|s(0, 0)| = 1`` with the triangular recurrence and
    cached. Values grow like ``k!``; use :func:`log_stirling1_unsigned` when a
    float is needed for large ``k``.
    """
    if k < 0 or n < 0:
        raise ValueError("k and n must be nonnegative")
    if n > k:
        return 0
    if k > 2000:
        raise OverflowError("stirling1_unsigned is limited to k <= 2000")
    for j in range(0, k, 256):  # warm the cache without deep recursion
        _stirling_row(j)
    return _stirling_row(k)[n]


def log_stirling1_unsigned(k: int, n: int) -> float:
    """``log |s(k, n)|`` (``-inf`` when the number is zero), safe for large ``k``."""
    value = stirling1_unsigned(k, n)
    return math.log(value) if value > 0 else -math.inf
