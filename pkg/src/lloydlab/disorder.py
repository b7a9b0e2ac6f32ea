"""Paired Cauchy disorder and closed-form Cauchy analytics.

Every random quantity is produced by quantile inversion of a single uniform
per site. Uniforms come from a PCG64 stream keyed by (master seed, experiment
family, realization, component), and site ``i`` always consumes the ``i``-th
draw of that stream, so any block of sites can be regenerated on its own.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import ndtri

from .lattice import BoxSpec

MAX_DERIVATIVE_ORDER = 10

_COMPONENTS = {"omega1": 1, "omega2": 2, "A": 3, "D": 4}


@dataclass(frozen=True)
class RandomStream:
    """Deterministic source of uniforms for one Monte Carlo realization."""

    seed: int
    realization: int = 0
    family: int = 0

    def uniforms(self, component: str, count: int, start: int = 0) -> np.ndarray:
        """Uniforms in the open interval (0, 1), draws ``start .. start+count-1``."""
        ss = np.random.SeedSequence(
            entropy=self.seed, spawn_key=(self.family, self.realization, _COMPONENTS[component])
        )
        bg = np.random.PCG64(ss)
        if start:
            bg.advance(start)
        raw = bg.random_raw(count)
        return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53


@dataclass(frozen=True)
class Delta:
    c: float = 0.0

    def quantile(self, u):
        return np.full(np.shape(u), float(self.c))

    def atoms(self):
        return np.array([self.c], dtype=float), np.array([1.0])


@dataclass(frozen=True)
class Uniform:
    a: float = -1.0
    b: float = 1.0

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"uniform needs a < b, got ({self.a}, {self.b})")

    def quantile(self, u):
        return self.a + (self.b - self.a) * np.asarray(u)

    def atoms(self):
        raise ValueError("uniform law has no atomic representation")


@dataclass(frozen=True)
class Bernoulli:
    """Mass ``p`` at ``v1`` and ``1 - p`` at ``v2``."""

    p: float = 0.5
    v1: float = 1.0
    v2: float = -1.0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"bernoulli needs p in [0, 1], got {self.p}")

    def quantile(self, u):
        return np.where(np.asarray(u) < self.p, self.v1, self.v2).astype(float)

    def atoms(self):
        return np.array([self.v1, self.v2], dtype=float), np.array([self.p, 1 - self.p])


@dataclass(frozen=True)
class Gaussian:
    mean: float = 0.0
    sd: float = 1.0

    def __post_init__(self):
        if self.sd < 0:
            raise ValueError(f"gaussian needs sd >= 0, got {self.sd}")

    def quantile(self, u):
        return self.mean + self.sd * ndtri(np.asarray(u))

    def atoms(self):
        if self.sd == 0:
            return np.array([self.mean], dtype=float), np.array([1.0])
        raise ValueError("gaussian law with sd > 0 has no atomic representation")


Mu2 = Union[Delta, Uniform, Bernoulli, Gaussian]


@dataclass(frozen=True)
class DisorderSpec:
    lam: float = 1.0
    mu2: Mu2 = Delta(0.0)

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"Cauchy scale must be positive, got {self.lam}")


@dataclass(frozen=True)
class DisorderSample:
    omega1: np.ndarray
    omega2: np.ndarray
    omega: np.ndarray


def sample_cauchy(lam: float, u):
    """Cauchy(lam) quantile ``lam * tan(pi (u - 1/2))``."""
    u = np.asarray(u, dtype=float)
    if np.any((u <= 0) | (u >= 1)):
        raise ValueError("Cauchy quantile needs u in the open interval (0, 1)")
    out = lam * np.tan(np.pi * (u - 0.5))
    return float(out) if out.ndim == 0 else out


def sample_disorder(
    spec: DisorderSpec, box: BoxSpec | int, stream: RandomStream, start: int = 0,
    count: int | None = None,
) -> DisorderSample:
    """Draw ``(omega1, omega2)`` for the sites ``start .. start+count-1``.

    ``box`` may be a :class:`BoxSpec` or a plain number of sites.
    """
    n = box.n_sites if isinstance(box, BoxSpec) else int(box)
    if count is None:
        count = n - start
    w1 = sample_cauchy(spec.lam, stream.uniforms("omega1", count, start))
    w2 = spec.mu2.quantile(stream.uniforms("omega2", count, start))
    w1 = np.atleast_1d(w1)
    w2 = np.atleast_1d(np.asarray(w2, dtype=float))
    return DisorderSample(omega1=w1, omega2=w2, omega=w1 + w2)


def cauchy_density(lam: float, x):
    x = np.asarray(x, dtype=float)
    return lam / (np.pi * (x * x + lam * lam))


def cauchy_char(lam: float, alpha: float, t):
    """Characteristic function ``E exp(-i t alpha X) = exp(-lam |alpha t|)``."""
    return np.exp(-lam * np.abs(alpha * np.asarray(t, dtype=float)))


def cauchy_kernel_derivative(lam: float, k: int, x):
    """k-th derivative of the Cauchy density, ``Im[(-1)^k k! / (x - i lam)^(k+1)] / pi``."""
    if k < 0 or k > MAX_DERIVATIVE_ORDER:
        raise ValueError(f"derivative order must be in [0, {MAX_DERIVATIVE_ORDER}]")
    z = np.asarray(x, dtype=float) - 1j * lam
    out = ((-1) ** k * math.factorial(k) / z ** (k + 1)).imag / np.pi
    return float(out) if out.ndim == 0 else out


def cauchy_interval_probability(lam: float, a: float, b: float) -> float:
    return (math.atan(b / lam) - math.atan(a / lam)) / math.pi
