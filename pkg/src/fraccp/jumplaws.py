"""Zero-truncated negative binomial jump laws and their n-fold convolutions.

A law is parameterised by ``alpha`` in (0, 1) and ``r > -1``:

    q_k = binom(r + k - 1, k) (1 - alpha)^k / (alpha^(-r) - 1)      (r != 0)
    q_k = -(1 - alpha)^k / (k log alpha)                            (r == 0)

``r = 1`` is the geometric law of the Polya-Aeppli process, ``r = -1/2``
the law of the Poisson-inverse-Gaussian process and ``r = 0`` the
logarithmic law of the negative binomial process.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .specfun import gen_binom, log_stirling1_unsigned

__all__ = [
    "Variant",
    "JumpLaw",
    "UnitJump",
    "ztnb_pmf",
    "ztnb_pgf",
    "conv_pmf",
    "conv_pmf_bruteforce",
    "conv_table",
    "polya_aeppli_law",
    "pig_law",
    "negative_binomial_law",
    "pig_lambda",
]


class Variant(str, enum.Enum):
    POLYA_AEPPLI = "pa"
    PIG = "pig"
    LOGARITHMIC = "nb"
    GENERAL = "ztnb"


@dataclass(frozen=True)
class JumpLaw:
    """Zero-truncated negative binomial law on {1, 2, ...}."""

    alpha: float
    r: float

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if not self.r > -1:
            raise ValueError(f"r must be > -1, got {self.r}")

    @property
    def variant(self) -> Variant:
        if self.r == 1:
            return Variant.POLYA_AEPPLI
        if self.r == -0.5:
            return Variant.PIG
        if self.r == 0:
            return Variant.LOGARITHMIC
        return Variant.GENERAL

    def pmf(self, k: int) -> float:
        return ztnb_pmf(self, k)

    def pmf_array(self, k_max: int) -> np.ndarray:
        """``q_0, ..., q_{k_max}`` with ``q_0 = 0``, via the ratio recurrence."""
        q = np.zeros(k_max + 1)
        if k_max == 0:
            return q
        a = self.alpha
        if self.r == 0:
            k = np.arange(1, k_max + 1)
            q[1:] = -np.exp(k * math.log1p(-a)) / (k * math.log(a))
            return q
        q[1] = self.r * (1 - a) / (a ** (-self.r) - 1)
        k = np.arange(1, k_max)
        q[2:] = q[1] * np.cumprod((self.r + k) / (k + 1) * (1 - a))
        return q

    def pgf(self, u: float) -> float:
        return ztnb_pgf(self, u)

    def moments(self, tol: float = 1e-15) -> tuple[float, float]:
        """``E[X]`` and ``E[X^2]`` by summing the differentiated pgf series at ``u = 1``."""
        k_max = 64
        while True:
            q = self.pmf_array(k_max)
            k = np.arange(k_max + 1)
            if k_max**2 * q[-1] < tol or k_max > 1_000_000:
                break
            k_max *= 2
        return math.fsum(k * q), math.fsum(k * k * q)


@dataclass(frozen=True)
class UnitJump:
    """Degenerate law ``X = 1``; turns the compound process into the counting process."""

    variant = "unit"

    def pmf(self, k: int) -> float:
        return 1.0 if k == 1 else 0.0

    def pmf_array(self, k_max: int) -> np.ndarray:
        q = np.zeros(k_max + 1)
        if k_max >= 1:
            q[1] = 1.0
        return q

    def pgf(self, u: float) -> float:
        return u

    def moments(self, tol: float = 0.0) -> tuple[float, float]:
        return 1.0, 1.0


def ztnb_pmf(law: JumpLaw, k: int) -> float:
    """``q_k = P(X = k)`` for ``k >= 1`` (0 for ``k = 0``)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return 0.0
    a, r = law.alpha, law.r
    if r == 0:
        return -((1 - a) ** k) / (k * math.log(a))
    return gen_binom(r + k - 1, k) * (1 - a) ** k / (a ** (-r) - 1)


def ztnb_pgf(law: JumpLaw, u: float) -> float:
    """Probability generating function, defined for ``|u| < 1/(1 - alpha)``."""
    a, r = law.alpha, law.r
    if not abs(u) < 1.0 / (1.0 - a):
        raise ValueError(f"pgf argument must satisfy |u| < {1.0 / (1.0 - a)}, got {u}")
    w = 1.0 - u * (1.0 - a)
    if r == 0:
        return math.log(w) / math.log(a)
    return (a**r / (1.0 - a**r)) * (1.0 - w**r) / w**r


@lru_cache(maxsize=64)
def _conv_table_cached(law, n_max: int, k_max: int) -> np.ndarray:
    q = law.pmf_array(k_max)
    table = np.zeros((n_max + 1, k_max + 1))
    table[0, 0] = 1.0
    for n in range(1, n_max + 1):
        table[n] = np.convolve(table[n - 1], q)[: k_max + 1]
    table.setflags(write=False)
    return table


def conv_table(law, n_max: int, k_max: int) -> np.ndarray:
    """Read-only table ``T[n, k] = q_k^{*n}`` for ``n <= n_max``, ``k <= k_max``.

    Built by repeated discrete convolution and cached per ``(law, n_max, k_max)``.
    """
    if n_max < 0 or k_max < 0:
        raise ValueError("n_max and k_max must be >= 0")
    return _conv_table_cached(law, n_max, k_max)


def conv_pmf_bruteforce(law, n: int, k: int) -> float:
    """``q_k^{*n}`` by dynamic-programming convolution, whatever the variant."""
    if n < 0 or k < 0:
        raise ValueError("n and k must be >= 0")
    if k < n:
        return 0.0
    return float(conv_table(law, n, k)[n, k])


def conv_pmf(law, n: int, k: int) -> float:
    """``q_k^{*n} = P(X_1 + ... + X_n = k)``.

    Closed forms are used for the geometric (``r = 1``) and logarithmic
    (``r = 0``) laws; other laws fall back to brute-force convolution.
    """
    if n < 0 or k < 0:
        raise ValueError("n and k must be >= 0")
    if n == 0:
        return 1.0 if k == 0 else 0.0
    if k < n:
        return 0.0
    if isinstance(law, JumpLaw) and law.variant is Variant.POLYA_AEPPLI:
        a = law.alpha
        return math.comb(k - 1, n - 1) * a**n * (1 - a) ** (k - n)
    if isinstance(law, JumpLaw) and law.variant is Variant.LOGARITHMIC:
        a = law.alpha
        logv = (math.lgamma(n + 1) - n * math.log(-math.log(a)) + k * math.log1p(-a)
                + log_stirling1_unsigned(k, n) - math.lgamma(k + 1))
        return math.exp(logv)
    return conv_pmf_bruteforce(law, n, k)


def polya_aeppli_law(p: float) -> JumpLaw:
    """Geometric jumps ``q_k = (1 - p) p^(k-1)``: ``alpha = 1 - p``, ``r = 1``."""
    return JumpLaw(alpha=1.0 - p, r=1.0)


def pig_law(beta: float) -> JumpLaw:
    """Jumps of the Poisson-inverse-Gaussian process: ``alpha = 1/(1 + 2 beta)``, ``r = -1/2``."""
    if not beta > 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    return JumpLaw(alpha=1.0 - 2.0 * beta / (1.0 + 2.0 * beta), r=-0.5)


def pig_lambda(beta: float, mu: float) -> float:
    """Poisson rate ``(mu / beta) (sqrt(1 + 2 beta) - 1)`` paired with :func:`pig_law`."""
    if not (beta > 0 and mu > 0):
        raise ValueError("beta and mu must be > 0")
    return mu / beta * (math.sqrt(1.0 + 2.0 * beta) - 1.0)


def negative_binomial_law(p: float) -> JumpLaw:
    """Logarithmic jumps: ``alpha = p``, ``r = 0``; the matching rate is ``-log p``."""
    return JumpLaw(alpha=p, r=0.0)
