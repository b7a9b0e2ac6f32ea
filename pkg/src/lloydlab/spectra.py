"""Eigensolving and elementary spectral functionals."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .lattice import HamiltonianMatrix


class ConvergenceError(RuntimeError):
    """The dense eigensolver failed to converge."""


@dataclass
class SpectralSample:
    """Sorted eigenvalues of one realization.

    ``overlaps[j, c]`` is ``|<e_n, psi_j>|^2`` for ``n = overlap_sites[c]``.
    ``tag`` identifies the realization, which lets paired pipelines check
    that their inputs line up.
    """

    eigenvalues: np.ndarray
    overlaps: np.ndarray | None = None
    overlap_sites: tuple[int, ...] = ()
    tag: int | None = None

    def __len__(self) -> int:
        return len(self.eigenvalues)


@dataclass
class MeasureEstimate:
    """Histogram or weighted point-mass representation of a spectral measure.

    For ``kind == "histogram"``, ``support`` holds the bin edges and
    ``weights`` the bin masses; for ``"point-masses"`` it holds the atom
    locations.
    """

    kind: str
    support: np.ndarray
    weights: np.ndarray
    mc_realizations: int = 1

    def __post_init__(self):
        self.support = np.asarray(self.support, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.kind not in ("histogram", "point-masses"):
            raise ValueError(f"unknown measure kind {self.kind!r}")
        if np.any(self.weights < 0):
            raise ValueError("measure weights must be non-negative")
        if self.kind == "histogram":
            if len(self.support) != len(self.weights) + 1:
                raise ValueError("histogram needs len(edges) == len(weights) + 1")
            if np.any(np.diff(self.support) <= 0):
                raise ValueError("histogram edges must be strictly increasing")
        elif len(self.support) != len(self.weights):
            raise ValueError("point masses need one weight per location")

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weights))

    @property
    def locations(self) -> np.ndarray:
        """Atom locations, or bin midpoints for a histogram."""
        if self.kind == "histogram":
            return 0.5 * (self.support[1:] + self.support[:-1])
        return self.support

    @property
    def density(self) -> np.ndarray:
        if self.kind != "histogram":
            raise ValueError("density is only defined for histograms")
        return self.weights / np.diff(self.support)

    def cdf(self, x):
        """``F(x) = mass of (-inf, x]`` (point masses only)."""
        if self.kind != "point-masses":
            raise ValueError("cdf is only tabulated for point masses")
        order = np.argsort(self.support, kind="stable")
        locs = self.support[order]
        cum = np.concatenate([[0.0], np.cumsum(self.weights[order])])
        return cum[np.searchsorted(locs, x, side="right")]


def _as_array(H) -> np.ndarray:
    return H.entries if isinstance(H, HamiltonianMatrix) else np.asarray(H, dtype=float)


def eigensolve(H, want_overlaps_for=None, tag: int | None = None) -> SpectralSample:
    """Full spectrum of a dense symmetric matrix.

    ``want_overlaps_for`` is a sequence of row indices, ``"all"`` or ``None``.
    """
    A = _as_array(H)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.array_equal(A, A.T):
        raise ValueError("matrix is not symmetric")
    try:
        if want_overlaps_for is None:
            w = scipy.linalg.eigh(A, eigvals_only=True, check_finite=True)
            return SpectralSample(eigenvalues=w, tag=tag)
        w, V = scipy.linalg.eigh(A, check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(str(exc)) from exc
    if isinstance(want_overlaps_for, str):
        if want_overlaps_for != "all":
            raise ValueError(f"unknown overlap selector {want_overlaps_for!r}")
        sites = tuple(range(A.shape[0]))
    else:
        sites = tuple(int(n) for n in want_overlaps_for)
    overlaps = np.abs(V[list(sites), :].T) ** 2
    return SpectralSample(eigenvalues=w, overlaps=overlaps, overlap_sites=sites, tag=tag)


def counting_function(sample: SpectralSample, E):
    """Number of eigenvalues ``<= E``."""
    out = np.searchsorted(sample.eigenvalues, E, side="right")
    return int(out) if np.ndim(out) == 0 else out


def esd(sample: SpectralSample) -> MeasureEstimate:
    M = len(sample.eigenvalues)
    if M == 0:
        raise ValueError("empty spectrum")
    return MeasureEstimate(
        kind="point-masses",
        support=np.array(sample.eigenvalues, dtype=float),
        weights=np.full(M, 1.0 / M),
    )


def spectral_fourier_trace(sample: SpectralSample, t_grid) -> np.ndarray:
    """``(1/M) sum_j exp(-i t E_j)`` for each ``t``."""
    t = np.atleast_1d(np.asarray(t_grid, dtype=float))
    phase = np.multiply.outer(t, sample.eigenvalues)
    M = len(sample.eigenvalues)
    return (np.cos(phase).sum(axis=1) - 1j * np.sin(phase).sum(axis=1)) / M


def diagonal_evolution(sample: SpectralSample, n: int, t):
    """``<e_n, exp(-itH) e_n>`` from the eigendecomposition."""
    if sample.overlaps is None or n not in sample.overlap_sites:
        raise KeyError(f"overlaps were not computed for site {n}")
    col = sample.overlap_sites.index(n)
    weights = sample.overlaps[:, col]
    t = np.asarray(t, dtype=float)
    out = np.exp(-1j * np.multiply.outer(t, sample.eigenvalues)) @ weights
    return complex(out) if out.ndim == 0 else out
