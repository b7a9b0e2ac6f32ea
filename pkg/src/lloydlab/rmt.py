"""Random matrices ``A_N + D_N`` with an i.i.d. Cauchy diagonal ``D_N``."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import ndtri

from .disorder import RandomStream, sample_cauchy
from .dos import (FactorizationResidual, FourierCurve, convolve_dos,
                  factorization_residual, mc_fourier_dosm, pooled_point_measure)
from .lattice import HamiltonianMatrix


@dataclass(frozen=True)
class RandomMatrixSpec:
    """``a_model`` is ``"zero"``, ``"wigner"`` or ``"fixed"``.

    Wigner entries (diagonal included) are i.i.d. standard gaussian or
    symmetric ``+-1`` scaled by ``1/sqrt(N)``.
    """

    N: int
    a_model: str = "zero"
    entries: str = "gaussian"
    lam: float = 1.0
    matrix: np.ndarray | None = None

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.a_model not in ("zero", "wigner", "fixed"):
            raise ValueError(f"unknown a_model {self.a_model!r}")
        if self.entries not in ("gaussian", "bernoulli"):
            raise ValueError(f"unknown Wigner entry law {self.entries!r}")
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if self.a_model == "fixed":
            if self.matrix is None:
                raise ValueError("fixed a_model needs a matrix")
            m = np.asarray(self.matrix)
            if m.shape != (self.N, self.N) or not np.array_equal(m, m.T):
                raise ValueError("fixed matrix must be symmetric of order N")


def sample_base_matrix(spec: RandomMatrixSpec, stream: RandomStream) -> np.ndarray:
    N = spec.N
    if spec.a_model == "zero":
        return np.zeros((N, N))
    if spec.a_model == "fixed":
        return np.array(spec.matrix, dtype=float)
    iu = np.triu_indices(N)
    u = stream.uniforms("A", len(iu[0]))
    if spec.entries == "gaussian":
        vals = ndtri(u)
    else:
        vals = np.where(u < 0.5, -1.0, 1.0)
    A = np.zeros((N, N))
    A[iu] = vals / np.sqrt(N)
    A = np.triu(A) + np.triu(A, 1).T
    return A


def sample_matrix_pair(spec: RandomMatrixSpec, stream: RandomStream):
    """``(A, A + D)`` sharing the same ``A`` draw; ``D`` uses an independent substream."""
    A = sample_base_matrix(spec, stream)
    D = np.atleast_1d(sample_cauchy(spec.lam, stream.uniforms("D", spec.N)))
    P = A.copy()
    P[np.diag_indices(spec.N)] += D
    return HamiltonianMatrix(box=None, entries=A), HamiltonianMatrix(box=None, entries=P)


def sample_perturbed_matrix(spec: RandomMatrixSpec, stream: RandomStream) -> HamiltonianMatrix:
    return sample_matrix_pair(spec, stream)[1]


@dataclass
class EESDFourier:
    perturbed: FourierCurve
    base: FourierCurve
    residual: FactorizationResidual


def _check_paired(perturbed, base):
    if len(perturbed) != len(base):
        raise ValueError("perturbed and base realizations are not paired")
    for p, b in zip(perturbed, base):
        if p.tag is not None and b.tag is not None and p.tag != b.tag:
            raise ValueError(f"realization tags differ ({p.tag} vs {b.tag})")
        if len(p) != len(b):
            raise ValueError("paired matrices have different orders")


def eesd_fourier(perturbed_samples, base_samples, t_grid, lam: float) -> EESDFourier:
    perturbed_samples = list(perturbed_samples)
    base_samples = list(base_samples)
    _check_paired(perturbed_samples, base_samples)
    cp = mc_fourier_dosm(perturbed_samples, t_grid, lam=lam)
    cb = mc_fourier_dosm(base_samples, t_grid)
    return EESDFourier(perturbed=cp, base=cb, residual=factorization_residual(cp, cb, lam))


def eesd_density_derivative(base_samples, lam: float, k: int, x_grid) -> np.ndarray:
    """k-th derivative of the smoothed EESD density, ``(g^(k) * L_N)(x)``."""
    return convolve_dos(pooled_point_measure(base_samples), lam, k, x_grid)


def read_matrix_file(path) -> np.ndarray:
    """Plain-text symmetric matrix: a header line ``N`` then N whitespace-separated rows."""
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty matrix file")
    try:
        N = int(lines[0].strip())
    except ValueError as exc:
        raise ValueError(f"{path}: header must be the matrix order") from exc
    rows = [np.array(ln.split(), dtype=float) for ln in lines[1:]]
    if len(rows) != N or any(len(r) != N for r in rows):
        raise ValueError(f"{path}: expected {N} rows of {N} values")
    M = np.vstack(rows)
    if not np.array_equal(M, M.T):
        raise ValueError(f"{path}: matrix is not symmetric")
    return M


def write_matrix_file(path, matrix) -> None:
    M = np.asarray(matrix, dtype=float)
    body = "\n".join(" ".join(format(v, ".17g") for v in row) for row in M)
    Path(path).write_text(f"{M.shape[0]}\n{body}\n")
