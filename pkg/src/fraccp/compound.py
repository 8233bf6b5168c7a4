"""Compound-representation pmfs and moments of the fractional compound Poisson processes."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import gamma as gamma_fn

from .fracderiv import ExpPoly
from .fracpoisson import (
    Regime,
    overdispersion_factor,
    pmf_space_frac_table,
    pmf_time_frac_table,
    regime_of,
    space_frac_newton_coeffs,
)
from .jumplaws import (
    JumpLaw,
    UnitJump,
    conv_table,
    negative_binomial_law,
    pig_lambda,
    pig_law,
    polya_aeppli_law,
)

__all__ = [
    "ProcessSpec",
    "compound_pmf",
    "compound_pmf_table",
    "compound_moments",
    "overdispersion_curve",
    "space_pmf_exppoly",
]


@dataclass(frozen=True)
class ProcessSpec:
    """Jump law, Poisson rate ``lam``, fractional order ``nu`` and the extra order ``eta``.

    ``eta = 1`` gives the one-parameter processes; ``eta < 1`` additionally
    time-changes the unit Poisson process of the mixed representation by a
    stable subordinator of index ``eta``.
    """

    law: JumpLaw | UnitJump
    lam: float
    nu: float
    eta: float = 1.0

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lambda must be > 0, got {self.lam}")
        if not self.nu > 0:
            raise ValueError(f"nu must be > 0, got {self.nu}")
        if not 0 < self.eta <= 1:
            raise ValueError(f"eta must be in (0, 1], got {self.eta}")

    @property
    def regime(self) -> Regime:
        return regime_of(self.nu)

    @classmethod
    def polya_aeppli(cls, p: float, lam: float, nu: float, eta: float = 1.0) -> ProcessSpec:
        return cls(polya_aeppli_law(p), lam, nu, eta)

    @classmethod
    def pig(cls, beta: float, mu: float, nu: float, eta: float = 1.0) -> ProcessSpec:
        return cls(pig_law(beta), pig_lambda(beta, mu), nu, eta)

    @classmethod
    def negative_binomial(cls, p: float, nu: float, eta: float = 1.0) -> ProcessSpec:
        return cls(negative_binomial_law(p), -math.log(p), nu, eta)


def _counting_table(spec: ProcessSpec, ts: np.ndarray, k_max: int, space_method: str):
    if spec.regime is Regime.TIME:
        return pmf_time_frac_table(spec.lam, spec.nu, ts, k_max)
    return pmf_space_frac_table(spec.lam, spec.nu, ts, k_max, method=space_method)


def compound_pmf_table(spec: ProcessSpec, t, k_max: int, space_method: str = "newton") -> np.ndarray:
    """Array ``P[i, k] = P(M(t_i) = k)`` for ``k <= k_max``.

    Each row is ``sum_n q_k^{*n} P(N(t_i) = n)``, the compound pmf of the
    fractional process selected by ``spec.regime``.
    """
    if spec.eta != 1:
        raise ValueError("series pmfs exist only for eta = 1")
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    counts = _counting_table(spec, ts, k_max, space_method)
    return counts @ conv_table(spec.law, k_max, k_max)


def compound_pmf(spec: ProcessSpec, t: float, k: int, space_method: str = "series") -> float:
    """``P(M(t) = k)`` for the process described by ``spec`` (``eta = 1``)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if t < 0:
        raise ValueError("t must be >= 0")
    return float(compound_pmf_table(spec, [t], k, space_method)[0, k])


def space_pmf_exppoly(spec: ProcessSpec, k: int) -> ExpPoly:
    """Space-fractional compound pmf ``t -> P(M^hat(t) = k)`` as ``exp(-c t)`` times a polynomial.

    ``c = lam^(1/nu)``; the representation is exact and usable for any ``t >= 0``.
    """
    if spec.regime is not Regime.SPACE:
        raise ValueError("exp-polynomial form exists only for the space-fractional process")
    c = spec.lam ** (1.0 / spec.nu)
    table = conv_table(spec.law, k, k)
    coeffs = np.zeros(k + 1)
    for n in range(k + 1):
        if table[n, k] == 0.0:
            continue
        a = space_frac_newton_coeffs(spec.nu, n)
        coeffs[: n + 1] += table[n, k] * a * c ** np.arange(n + 1)
    return ExpPoly(c, coeffs)


def compound_moments(spec: ProcessSpec, t: float) -> tuple[float, float, float]:
    """Mean, variance and overdispersion gap ``variance - mean`` at time ``t``.

    Only the time-fractional process (``0 < nu <= 1``) has finite moments;
    ``nu = 1`` is accepted as the classical reference.
    """
    if not 0 < spec.nu <= 1:
        raise ValueError(
            f"moments are infinite for the space-fractional process (nu={spec.nu} > 1)")
    if not t > 0:
        raise ValueError("t must be > 0")
    m1, m2 = spec.law.moments()
    lt = spec.lam * t**spec.nu
    mean_n = lt / float(gamma_fn(spec.nu + 1.0))
    z = overdispersion_factor(spec.nu)
    var_n = mean_n + lt**2 * z
    mean = mean_n * m1
    variance = mean_n * (m2 - m1 * m1) + var_n * m1 * m1
    # sum of two nonnegative terms, not variance - mean, to avoid cancellation
    gap = mean_n * (m2 - m1) + lt**2 * z * m1 * m1
    return mean, variance, gap


def overdispersion_curve(spec: ProcessSpec, nu_grid, t: float) -> list[tuple[float, float]]:
    """``(nu, gap)`` pairs for the time-fractional process over ``nu_grid``."""
    out = []
    for nu in nu_grid:
        if not 0 < nu <= 1:
            raise ValueError(f"nu grid values must lie in (0, 1], got {nu}")
        out.append((float(nu), compound_moments(replace(spec, nu=float(nu)), t)[2]))
    return out
