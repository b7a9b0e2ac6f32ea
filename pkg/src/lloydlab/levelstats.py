"""Rescaled local eigenvalue statistics and Wegner/Minami moments."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .lattice import HamiltonianMatrix, SubBoxPartition, restrict
from .runner import mean_and_stderr
from .spectra import SpectralSample, eigensolve


@dataclass(frozen=True)
class RescaleParams:
    """Zoom ``(2L+1)^gamma (H_L - E)`` with mass ``(2L+1)^(-beta)``, ``beta = d - gamma``."""

    E: float
    gamma: float
    L: int
    d: int

    def __post_init__(self):
        upper = (self.d - 1) / (2 * self.d)
        if not 0 < self.gamma < upper:
            warnings.warn(
                f"gamma={self.gamma} is outside (0, {upper:.4g}) where vague "
                f"convergence to rho(E) Lebesgue is known for d={self.d}",
                stacklevel=2,
            )

    @property
    def beta(self) -> float:
        return self.d - self.gamma

    @property
    def scale(self) -> float:
        return (2 * self.L + 1) ** self.gamma

    @property
    def weight(self) -> float:
        return (2 * self.L + 1) ** (-self.beta)


@dataclass
class PointMeasure:
    atoms: np.ndarray
    weight: float

    def mass(self, a: float, b: float) -> float:
        """Mass of the closed interval ``[a, b]``."""
        inside = np.count_nonzero((self.atoms >= a) & (self.atoms <= b))
        return inside * self.weight

    @property
    def total_mass(self) -> float:
        return len(self.atoms) * self.weight


def rescaled_measure(sample: SpectralSample, p: RescaleParams) -> PointMeasure:
    atoms = p.scale * (np.asarray(sample.eigenvalues) - p.E)
    return PointMeasure(atoms=atoms, weight=p.weight)


def _infer_dimension(M: int, L: int) -> int:
    side = 2 * L + 1
    if side == 1:
        raise ValueError("dimension cannot be inferred for L = 0; pass d")
    d = round(math.log(M) / math.log(side))
    if side ** d != M:
        raise ValueError(f"{M} eigenvalues do not come from a box with side {side}")
    return d


def window_count(sample: SpectralSample, E: float, a: float, b: float, gamma: float,
                 L: int, d: int | None = None) -> float:
    """``#{E_j in [E + a s, E + b s]} / ((b - a)(2L+1)^(d - gamma))``, ``s = (2L+1)^-gamma``."""
    if not a < b:
        raise ValueError(f"window needs a < b, got [{a}, {b}]")
    if d is None:
        d = _infer_dimension(len(sample.eigenvalues), L)
    side = 2 * L + 1
    s = side ** (-gamma)
    ev = np.asarray(sample.eigenvalues)
    count = np.count_nonzero((ev >= E + a * s) & (ev <= E + b * s))
    return count / ((b - a) * side ** (d - gamma))


def subbox_samples(H: HamiltonianMatrix, partition: SubBoxPartition) -> list[SpectralSample]:
    """Spectra of ``H`` restricted to each piece (same disorder values)."""
    if H.box is not None and H.order != partition.parent.n_sites:
        raise ValueError("Hamiltonian and partition refer to different boxes")
    return [eigensolve(restrict(H, rows)) for rows in partition.pieces]


def superposition_measure(subbox_samples, p: RescaleParams,
                          expected_sites: int | None = None) -> PointMeasure:
    """Union of the per-piece rescaled atoms with the common weight ``(2L+1)^(-beta)``."""
    subbox_samples = list(subbox_samples)
    if expected_sites is not None:
        got = sum(len(s) for s in subbox_samples)
        if got != expected_sites:
            raise ValueError(f"pieces cover {got} sites, expected {expected_sites}")
    atoms = np.concatenate([np.asarray(s.eigenvalues) for s in subbox_samples])
    return PointMeasure(atoms=p.scale * (atoms - p.E), weight=p.weight)


@dataclass
class LLNRow:
    L: int
    n: int
    mean: float
    variance: float
    variance_stderr: float
    wegner_constant: float
    bound: float

    @property
    def within_bound(self) -> bool:
        return self.variance <= self.bound


@dataclass
class LLNReport:
    rows: list[LLNRow]

    @property
    def all_within_bound(self) -> bool:
        return all(r.within_bound for r in self.rows)

    @property
    def variance_decreasing(self) -> bool:
        v = [r.variance for r in sorted(self.rows, key=lambda r: r.L)]
        return all(b <= a for a, b in zip(v, v[1:]))


def lln_variance_diagnostic(values_by_L: dict, interval_length: float, d: int,
                            gamma: float, epsilon: float,
                            wegner_constant: float | None = None,
                            min_realizations: int = 30) -> LLNReport:
    """Empirical variance of ``eta(I)`` per ``L`` against
    ``C (2L+1)^(-beta) |I| + C^2 (2L+1)^(-d eps) |I|^2``.

    ``C`` defaults to the empirical Wegner constant ``mean(eta(I)) / |I|``.
    ``epsilon`` should be the realized exponent ``log N_L / log(2L+1)`` when
    the sub-box count was rounded to a divisor.
    """
    beta = d - gamma
    rows = []
    for L in sorted(values_by_L):
        v = np.asarray(values_by_L[L], dtype=float)
        if len(v) < min_realizations:
            raise ValueError(f"L={L}: {len(v)} realizations, need >= {min_realizations}")
        mean = float(v.mean())
        var = float(v.var(ddof=1))
        # standard error of the sample variance, fourth-moment form
        m4 = float(np.mean((v - mean) ** 4))
        n = len(v)
        var_se = math.sqrt(max(m4 - var ** 2 * (n - 3) / (n - 1), 0.0) / n)
        C = wegner_constant if wegner_constant is not None else mean / interval_length
        side = 2 * L + 1
        eps = epsilon(L) if callable(epsilon) else epsilon
        bound = C * side ** (-beta) * interval_length + C ** 2 * side ** (-d * eps) * interval_length ** 2
        rows.append(LLNRow(L=L, n=n, mean=mean, variance=var, variance_stderr=var_se,
                           wegner_constant=C, bound=bound))
    return LLNReport(rows=rows)


@dataclass
class WegnerMinamiStats:
    n_sites: int
    interval: tuple[float, float]
    n_realizations: int
    mean_count: float
    mean_stderr: float
    second_factorial_moment: float
    second_stderr: float
    wegner_bound: float
    minami_bound: float
    nsigma: float = 3.0

    @staticmethod
    def _ok(value, se, bound, nsigma):
        # the slack is nsigma relative standard errors, applied to the bound
        if value <= bound:
            return True
        rel = se / value if value > 0 else 0.0
        return value <= bound * (1 + nsigma * rel)

    @property
    def wegner_ok(self) -> bool:
        return self._ok(self.mean_count, self.mean_stderr, self.wegner_bound, self.nsigma)

    @property
    def minami_ok(self) -> bool:
        return self._ok(self.second_factorial_moment, self.second_stderr,
                        self.minami_bound, self.nsigma)


def interval_counts(realizations, interval) -> np.ndarray:
    lo, hi = interval
    return np.array([np.count_nonzero((s.eigenvalues >= lo) & (s.eigenvalues <= hi))
                     for s in realizations], dtype=float)


def wegner_minami_stats(realizations, interval, lam: float,
                        min_realizations: int = 30, nsigma: float = 3.0) -> WegnerMinamiStats:
    """Monte Carlo ``E[X]`` and ``E[X(X-1)]`` for ``X = Tr E_H(I)``.

    Bounds use ``C = 1/(pi lam)``, the peak of the Cauchy density, which
    dominates the density of any Cauchy convolution.
    """
    realizations = list(realizations)
    lo, hi = (float(v) for v in interval)
    if not (math.isfinite(lo) and math.isfinite(hi)) or not lo <= hi:
        raise ValueError(f"need a bounded interval, got [{lo}, {hi}]")
    if len(realizations) < min_realizations:
        raise ValueError(f"{len(realizations)} realizations, need >= {min_realizations}")
    X = interval_counts(realizations, (lo, hi))
    n_sites = len(realizations[0])
    m1, se1 = mean_and_stderr(X)
    m2, se2 = mean_and_stderr(X * (X - 1))
    C = 1.0 / (math.pi * lam)
    wb = C * n_sites * (hi - lo)
    return WegnerMinamiStats(
        n_sites=n_sites, interval=(lo, hi), n_realizations=len(realizations),
        mean_count=float(m1), mean_stderr=float(se1),
        second_factorial_moment=float(m2), second_stderr=float(se2),
        wegner_bound=wb, minami_bound=wb ** 2, nsigma=nsigma,
    )
