"""Subordinator samplers, Laplace exponents and fixed-time count simulation.

Counts are drawn through the mixed representation: an outer random clock
(inverse stable for ``nu < 1``, stable of index ``1/nu`` for ``nu > 1``), the
mixing subordinator ``S`` at that clock, an optional stable time change of
index ``eta`` and finally a unit-rate Poisson draw.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Union

import numpy as np

from .compound import ProcessSpec
from .jumplaws import JumpLaw, UnitJump, Variant
from .specfun import ml_general

__all__ = [
    "StableSubordinator",
    "InverseStable",
    "InverseGaussian",
    "GammaProc",
    "CompoundPoissonExp",
    "SubordinatorSpec",
    "RandomStream",
    "sample_stable",
    "sample_inv_stable",
    "sample_subordinator",
    "kappa_s",
    "mixing_subordinator",
    "simulate_count",
    "simulate_counts",
    "BLOCK_SIZE",
]

# Draws are generated in blocks of this size, each from its own substream, so
# a sample does not depend on how many workers produced it.
BLOCK_SIZE = 1 << 14
# numpy's Poisson sampler rejects larger means; heavy-tailed clocks can exceed it
_POISSON_MEAN_CAP = 1e15


@dataclass(frozen=True)
class StableSubordinator:
    """``A^alpha`` with ``E exp(-s A(t)) = exp(-t s^alpha)``."""

    alpha: float

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"stable index alpha must be in (0, 1), got {self.alpha}")


@dataclass(frozen=True)
class InverseStable:
    """First-passage time ``L^nu(t) = inf{z : A^nu(z) > t}``."""

    nu: float

    def __post_init__(self):
        if not 0 < self.nu < 1:
            raise ValueError(f"inverse-stable index nu must be in (0, 1), got {self.nu}")


@dataclass(frozen=True)
class InverseGaussian:
    """Inverse Gaussian subordinator: ``S(t)`` has mean ``mu t`` and shape ``(mu t)^2 / beta``."""

    mu: float
    beta: float

    def __post_init__(self):
        if not (self.mu > 0 and self.beta > 0):
            raise ValueError(f"mu and beta must be > 0, got mu={self.mu}, beta={self.beta}")


@dataclass(frozen=True)
class GammaProc:
    """Gamma subordinator with rate ``p/(1-p)`` and shape ``shape_rate * t``.

    ``shape_rate = 1`` is the process paired with the logarithmic jump law at
    its natural Poisson rate ``-log p``; other rates scale the shape.
    """

    p: float
    shape_rate: float = 1.0

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise ValueError(f"p must be in (0, 1), got {self.p}")
        if not self.shape_rate > 0:
            raise ValueError(f"shape_rate must be > 0, got {self.shape_rate}")

    @property
    def rate(self) -> float:
        return self.p / (1.0 - self.p)


@dataclass(frozen=True)
class CompoundPoissonExp:
    """``sum_{i <= N_mu(t)} Y_i`` with ``Y_i`` exponential of rate ``beta``."""

    mu: float
    beta: float

    def __post_init__(self):
        if not (self.mu > 0 and self.beta > 0):
            raise ValueError(f"mu and beta must be > 0, got mu={self.mu}, beta={self.beta}")


SubordinatorSpec = Union[StableSubordinator, InverseStable, InverseGaussian, GammaProc,
                         CompoundPoissonExp]


@dataclass(frozen=True)
class RandomStream:
    """Reproducible substream: the same ``(seed, stream_id)`` always yields the same draws."""

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if self.seed < 0 or self.stream_id < 0:
            raise ValueError("seed and stream_id must be nonnegative")

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,)))

    def child(self, index: int) -> RandomStream:
        # substreams of substreams stay disjoint from plain stream ids
        return RandomStream(self.seed, (self.stream_id + 1) * (1 << 32) + index)


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RandomStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError("rng must be a RandomStream or numpy Generator")


def _positive_times(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(~np.isfinite(t)):
        raise ValueError("times must be finite and >= 0")
    return t


def _stable_unit(alpha: float, gen: np.random.Generator, size) -> np.ndarray:
    # Kanter's representation of the positive stable law exp(-s^alpha)
    u = gen.uniform(0.0, math.pi, size)
    e = gen.standard_exponential(size)
    return (np.sin(alpha * u) / np.sin(u) ** (1.0 / alpha)
            * (np.sin((1.0 - alpha) * u) / e) ** ((1.0 - alpha) / alpha))


def sample_stable(alpha: float, t, rng, size=None):
    """Draw ``A^alpha(t)``, using ``A(t) = t^(1/alpha) A(1)``.

    ``t`` may be an array, in which case one draw per entry is returned.
    """
    StableSubordinator(alpha)
    t = _positive_times(t)
    gen = _as_generator(rng)
    shape = t.shape if size is None else size
    return t ** (1.0 / alpha) * _stable_unit(alpha, gen, shape)


def sample_inv_stable(nu: float, t, rng, size=None):
    """Draw ``L^nu(t)`` through ``L^nu(t) = (t / A^nu(1))^nu`` in distribution."""
    InverseStable(nu)
    t = _positive_times(t)
    gen = _as_generator(rng)
    shape = t.shape if size is None else size
    return (t / _stable_unit(nu, gen, shape)) ** nu


def sample_subordinator(s: SubordinatorSpec, t, rng, size=None):
    """Draw ``S(t)`` for any subordinator spec; ``t`` may be an array of times."""
    t = _positive_times(t)
    gen = _as_generator(rng)
    shape = t.shape if size is None else size
    t = np.broadcast_to(t, shape)
    if isinstance(s, StableSubordinator):
        return sample_stable(s.alpha, t, gen)
    if isinstance(s, InverseStable):
        return sample_inv_stable(s.nu, t, gen)
    if isinstance(s, InverseGaussian):
        out = np.zeros(shape)
        pos = t > 0
        m = s.mu * t[pos]
        out[pos] = gen.wald(m, m * m / s.beta)
        return out
    if isinstance(s, GammaProc):
        return gen.gamma(s.shape_rate * t, 1.0 / s.rate)
    if isinstance(s, CompoundPoissonExp):
        n = gen.poisson(s.mu * t)
        return gen.gamma(n.astype(float), 1.0 / s.beta)
    raise TypeError(f"unknown subordinator spec {s!r}")


def kappa_s(s: SubordinatorSpec, theta: float) -> float:
    """Laplace exponent ``log E exp(theta S(1))``; ``math.inf`` where the expectation diverges."""
    theta = float(theta)
    if theta == 0:
        return 0.0
    if isinstance(s, InverseGaussian):
        if theta >= 1.0 / (2.0 * s.beta):
            return math.inf
        return -(s.mu / s.beta) * (math.sqrt(1.0 - 2.0 * s.beta * theta) - 1.0)
    if isinstance(s, GammaProc):
        if theta >= s.rate:
            return math.inf
        return -s.shape_rate * math.log1p(-theta / s.rate)
    if isinstance(s, CompoundPoissonExp):
        if theta >= s.beta:
            return math.inf
        return s.mu * theta / (s.beta - theta)
    if isinstance(s, StableSubordinator):
        if theta > 0:
            return math.inf
        return -((-theta) ** s.alpha)
    if isinstance(s, InverseStable):
        # L(1) has moments of all orders, so this is finite for every theta
        return math.log(ml_general(theta, s.nu, 1.0))
    raise TypeError(f"unknown subordinator spec {s!r}")


def mixing_subordinator(law, lam: float) -> SubordinatorSpec | None:
    """Subordinator ``S`` with ``N_1(S(t))`` equal in law to the compound process at rate ``lam``.

    Returns ``None`` for jump laws outside the three named families.
    """
    if not lam > 0:
        raise ValueError(f"lambda must be > 0, got {lam}")
    if not isinstance(law, JumpLaw):
        return None
    v = law.variant
    if v is Variant.POLYA_AEPPLI:
        p = 1.0 - law.alpha
        return CompoundPoissonExp(mu=lam / p, beta=(1.0 - p) / p)
    if v is Variant.PIG:
        beta = (1.0 / law.alpha - 1.0) / 2.0
        mu = lam * beta / (math.sqrt(1.0 + 2.0 * beta) - 1.0)
        return InverseGaussian(mu=mu, beta=beta)
    if v is Variant.LOGARITHMIC:
        p = law.alpha
        return GammaProc(p=p, shape_rate=lam / -math.log(p))
    return None


def _sample_jumps(law, n_jumps: np.ndarray, gen: np.random.Generator) -> np.ndarray:
    """Sum ``n_jumps[i]`` i.i.d. jumps from ``law`` for each ``i``."""
    total = int(n_jumps.sum())
    if isinstance(law, UnitJump) or total == 0:
        return n_jumps.astype(np.int64)
    k_max = 64
    while True:
        q = law.pmf_array(k_max)
        if 1.0 - q.sum() < 1e-15 or k_max >= 1 << 20:
            break
        k_max *= 2
    cdf = np.cumsum(q)
    jumps = np.searchsorted(cdf, gen.uniform(0.0, cdf[-1], total), side="right")
    owner = np.repeat(np.arange(n_jumps.size), n_jumps)
    return np.bincount(owner, weights=jumps, minlength=n_jumps.size).astype(np.int64)


def _outer_clock(spec: ProcessSpec, t: float, gen, n: int) -> np.ndarray:
    if spec.nu == 1:
        return np.full(n, float(t))
    if spec.nu < 1:
        return sample_inv_stable(spec.nu, np.full(n, float(t)), gen)
    return sample_stable(1.0 / spec.nu, np.full(n, float(t)), gen)


def _simulate_block(spec: ProcessSpec, t: float, n: int, gen: np.random.Generator) -> np.ndarray:
    if t == 0:
        return np.zeros(n, dtype=np.int64)
    clock = _outer_clock(spec, t, gen, n)
    s = mixing_subordinator(spec.law, spec.lam) if not isinstance(spec.law, UnitJump) else None
    if s is None:
        if spec.eta != 1:
            raise ValueError("eta < 1 needs a jump law with a named mixing subordinator")
        # compound route: Poisson number of jumps at the random clock
        n_jumps = gen.poisson(np.minimum(spec.lam * clock, _POISSON_MEAN_CAP))
        return _sample_jumps(spec.law, n_jumps, gen)
    level = sample_subordinator(s, clock, gen)
    if spec.eta != 1:
        level = sample_stable(spec.eta, level, gen)
    return gen.poisson(np.minimum(level, _POISSON_MEAN_CAP)).astype(np.int64)


def simulate_count(spec: ProcessSpec, t: float, rng) -> int:
    """One draw of the count at time ``t`` through the mixed-representation chain."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return int(_simulate_block(spec, float(t), 1, _as_generator(rng))[0])


def simulate_counts(spec: ProcessSpec, t: float, n: int, seed: int, workers: int = 1,
                    stream_id: int = 0) -> np.ndarray:
    """``n`` independent draws of the count at time ``t``.

    Draws are produced in blocks of :data:`BLOCK_SIZE`, block ``b`` using
    substream ``RandomStream(seed, stream_id).child(b)``. The result depends
    only on ``(seed, stream_id, n)``, never on ``workers``.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if t < 0:
        raise ValueError("t must be >= 0")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    base = RandomStream(seed, stream_id)
    sizes = [min(BLOCK_SIZE, n - start) for start in range(0, n, BLOCK_SIZE)]

    def block(b: int) -> np.ndarray:
        return _simulate_block(spec, float(t), sizes[b], base.child(b).generator())

    if workers == 1 or len(sizes) <= 1:
        parts = [block(b) for b in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(block, range(len(sizes))))
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
