"""Density-of-states estimators, Fourier factorization checks and the Lloyd oracle.

Fourier convention: forward transforms use ``exp(-itx)``; inverse transforms
carry ``1/(2 pi)``, so that a normalized measure has transform 1 at ``t = 0``
and its density integrates to 1.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import IntegrationWarning, quad_vec, simpson

from .bessel import j0
from .disorder import cauchy_kernel_derivative
from .lattice import BoxSpec, build_laplacian
from .runner import mean_and_stderr
from .spectra import MeasureEstimate, SpectralSample, eigensolve, spectral_fourier_trace


_BLOCK = 1 << 20


class InsufficientDecay(ValueError):
    """The Fourier curve has not decayed enough at the truncation point."""


class QuadratureError(RuntimeError):
    pass


@dataclass
class FourierCurve:
    """Monte Carlo (or exact) Fourier transform of a spectral measure.

    ``samples`` optionally keeps the per-realization traces (R x T) so that
    linear functionals of the curve can be given honest standard errors.
    """

    t: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    lambda_tag: float | None = None
    samples: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        self.stderr = np.asarray(self.stderr, dtype=float)
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("t grid must be strictly increasing")
        if not (self.t.shape == self.values.shape == self.stderr.shape):
            raise ValueError("t, values and stderr must have equal shapes")
        if np.any(self.stderr < 0):
            raise ValueError("stderr must be non-negative")


def estimate_ldos(realizations, box: BoxSpec | int, bins) -> MeasureEstimate:
    """Histogram of all eigenvalues, each with mass ``1 / (|Lambda| R)``.

    ``bins`` is an array of edges (anything accepted by ``np.histogram``).
    """
    realizations = list(realizations)
    if not realizations:
        raise ValueError("no realizations")
    n_sites = box.n_sites if isinstance(box, BoxSpec) else int(box)
    R = len(realizations)
    edges = np.asarray(bins, dtype=float)
    counts = np.zeros(len(edges) - 1)
    for s in realizations:
        counts += np.histogram(s.eigenvalues, bins=edges)[0]
    return MeasureEstimate(
        kind="histogram", support=edges, weights=counts / (n_sites * R), mc_realizations=R
    )


def _fourier_samples(realizations, t) -> np.ndarray:
    return np.stack([spectral_fourier_trace(s, t) for s in realizations])


def mc_fourier_dosm(realizations, t_grid, lam: float | None = None, keep_samples: bool = True):
    """Monte Carlo mean of the normalized spectral Fourier trace."""
    realizations = list(realizations)
    if len(realizations) < 2:
        raise ValueError("need at least 2 realizations for a standard error")
    t = np.asarray(t_grid, dtype=float)
    S = _fourier_samples(realizations, t)
    mean, se = mean_and_stderr(S)
    return FourierCurve(t=t, values=mean, stderr=se, lambda_tag=lam,
                        samples=S if keep_samples else None)


def lloyd_finite_curve(box: BoxSpec, lam: float, t_grid) -> FourierCurve:
    """Exact finite-volume transform for pure Cauchy disorder.

    With ``mu2 = delta(0)`` the companion operator is the free Laplacian, so the
    curve is ``exp(-lam |t|) Tr exp(-it Delta_L) / |Lambda|`` with no Monte
    Carlo error.
    """
    t = np.asarray(t_grid, dtype=float)
    free = eigensolve(build_laplacian(box))
    values = np.exp(-lam * np.abs(t)) * spectral_fourier_trace(free, t)
    return FourierCurve(t=t, values=values, stderr=np.zeros_like(t), lambda_tag=lam)


def lloyd_infinite_curve(d: int, lam: float, t_grid) -> FourierCurve:
    """``exp(-lam |t|) J0(2t)^d``: the transform of the infinite-volume Lloyd DOS."""
    t = np.asarray(t_grid, dtype=float)
    values = np.exp(-lam * np.abs(t)) * j0(2 * t) ** d
    return FourierCurve(t=t, values=values.astype(complex), stderr=np.zeros_like(t),
                        lambda_tag=lam)


@dataclass
class FactorizationResidual:
    t: np.ndarray
    signed: np.ndarray
    stderr: np.ndarray

    @property
    def residual(self) -> np.ndarray:
        return np.abs(self.signed)

    def within(self, nsigma: float = 3.0) -> np.ndarray:
        return self.residual <= nsigma * self.stderr + 1e-14

    def fraction_within(self, nsigma: float = 3.0) -> float:
        return float(np.mean(self.within(nsigma)))


def factorization_residual(curve_H: FourierCurve, curve_h2: FourierCurve, lam: float):
    """Compare ``curve_H(t)`` with ``exp(-lam |t|) curve_h2(t)``.

    The combined standard error treats the two curves as independent
    estimates.
    """
    if curve_H.t.shape != curve_h2.t.shape or not np.array_equal(curve_H.t, curve_h2.t):
        raise ValueError("t grids differ")
    damp = np.exp(-lam * np.abs(curve_H.t))
    signed = curve_H.values - damp * curve_h2.values
    se = np.sqrt(curve_H.stderr ** 2 + (damp * curve_h2.stderr) ** 2)
    return FactorizationResidual(t=curve_H.t, signed=signed, stderr=se)


@dataclass
class DecayReport:
    t: np.ndarray
    bound: np.ndarray
    status: np.ndarray  # "ok", "inconclusive" or "violation" per t

    @property
    def violations(self) -> np.ndarray:
        return self.t[self.status == "violation"]

    @property
    def passed(self) -> bool:
        return not np.any(self.status == "violation")


def decay_bound_check(curve: FourierCurve, lam: float, nsigma: float = 3.0) -> DecayReport:
    """Flag ``t`` where ``|curve(t)| > exp(-lam |t|) + nsigma * stderr``.

    Points where the bound itself is below ``nsigma * stderr`` cannot
    discriminate and are reported as inconclusive unless they violate.
    """
    bound = np.exp(-lam * np.abs(curve.t))
    slack = nsigma * curve.stderr
    mod = np.abs(curve.values)
    status = np.where(bound < slack, "inconclusive", "ok").astype(object)
    status[mod > bound + slack + 1e-12] = "violation"
    return DecayReport(t=curve.t, bound=bound, status=status.astype(str))


def _inversion_weights(t: np.ndarray, x: np.ndarray):
    """Matrix W with ``rho(x) = Re(W @ values)``, plus the imaginary-part matrix."""
    if t[0] >= 0:
        if t[0] != 0:
            raise ValueError("half-line inversion needs a grid starting at t = 0")
        # conjugate symmetry folds the integral onto [0, t_max]
        weights = simpson(np.eye(len(t)), x=t, axis=1) / math.pi
        return np.exp(1j * np.multiply.outer(x, t)) * weights, None
    weights = simpson(np.eye(len(t)), x=t, axis=1) / (2 * math.pi)
    return np.exp(1j * np.multiply.outer(x, t)) * weights, True


def _check_tail(curve: FourierCurve, t_max: float, lam: float | None, tail_tol: float):
    lam = lam if lam is not None else curve.lambda_tag
    if lam is not None:
        tail = math.exp(-lam * t_max) / lam
    else:
        tail = float(np.abs(curve.values[np.abs(curve.t) <= t_max][-1]))
    if tail > tail_tol:
        raise InsufficientDecay(f"tail estimate {tail:.3g} exceeds tolerance {tail_tol:.3g}")


def _truncate(curve: FourierCurve, t_max: float | None):
    if t_max is None:
        t_max = float(np.max(np.abs(curve.t)))
    keep = np.abs(curve.t) <= t_max + 1e-12
    return t_max, keep


def invert_fourier(curve: FourierCurve, x_grid, t_max: float | None = None,
                   lam: float | None = None, tail_tol: float = 1e-6,
                   return_imag: bool = False):
    """Density ``(1/2pi) int exp(itx) value(t) dt`` by composite Simpson.

    A grid on ``[0, t_max]`` is treated as half of a conjugate-symmetric curve.
    """
    t_max, keep = _truncate(curve, t_max)
    _check_tail(curve, t_max, lam, tail_tol)
    x = np.atleast_1d(np.asarray(x_grid, dtype=float))
    W, full = _inversion_weights(curve.t[keep], x)
    raw = W @ curve.values[keep]
    rho = raw.real
    if return_imag:
        imag = raw.imag if full else np.zeros_like(rho)
        return rho, imag
    return rho


def invert_fourier_with_error(curve: FourierCurve, x_grid, t_max: float | None = None,
                              lam: float | None = None, tail_tol: float = 1e-6):
    """Inversion plus a Monte Carlo standard error from the per-realization traces."""
    if curve.samples is None:
        raise ValueError("curve carries no per-realization samples")
    t_max, keep = _truncate(curve, t_max)
    _check_tail(curve, t_max, lam, tail_tol)
    x = np.atleast_1d(np.asarray(x_grid, dtype=float))
    W, _ = _inversion_weights(curve.t[keep], x)
    per_real = (curve.samples[:, keep] @ W.T).real
    return mean_and_stderr(per_real)


def _point_masses(nu2):
    if isinstance(nu2, MeasureEstimate):
        return nu2.locations, nu2.weights
    if hasattr(nu2, "atoms"):
        return nu2.atoms()
    raise TypeError(f"cannot convolve with {type(nu2).__name__}")


def convolve_dos(nu2, lam: float, k: int, x_grid, mass_tol: float = 1e-8):
    """``(g^(k) * nu2)(x)`` with ``g`` the Cauchy(lam) density.

    ``nu2`` is a normalized :class:`MeasureEstimate` (histograms contribute
    their bin midpoints) or an atomic disorder law such as ``Delta``.
    """
    locs, w = _point_masses(nu2)
    total = float(np.sum(w))
    if abs(total - 1.0) > mass_tol:
        raise ValueError(f"nu2 is not normalized (total mass {total!r})")
    x = np.atleast_1d(np.asarray(x_grid, dtype=float))
    # merge coincident atoms; identical eigenvalues are common for deterministic h
    locs, inverse = np.unique(np.asarray(locs, dtype=float), return_inverse=True)
    w = np.bincount(inverse, weights=w)
    out = np.zeros_like(x)
    # blocks of at most ~2^20 kernel evaluations bound the working memory
    step_x = max(1, min(len(x), _BLOCK // 64))
    step_a = max(1, _BLOCK // step_x)
    for i in range(0, len(x), step_x):
        xs = x[i:i + step_x]
        for j in range(0, len(locs), step_a):
            kern = cauchy_kernel_derivative(lam, k, np.subtract.outer(xs, locs[j:j + step_a]))
            out[i:i + step_x] += kern @ w[j:j + step_a]
    return out


def pooled_point_measure(realizations) -> MeasureEstimate:
    """All eigenvalues of all realizations, each with mass ``1/(M R)``."""
    realizations = list(realizations)
    if not realizations:
        raise ValueError("no realizations")
    locs = np.concatenate([s.eigenvalues for s in realizations])
    weights = np.concatenate(
        [np.full(len(s), 1.0 / (len(s) * len(realizations))) for s in realizations]
    )
    return MeasureEstimate(kind="point-masses", support=locs, weights=weights,
                           mc_realizations=len(realizations))


def lloyd_oracle(d: int, lam: float, E, epsabs: float = 1e-10):
    """Lloyd DOS ``(1/pi) int_0^inf exp(-lam t) J0(2t)^d cos(E t) dt``.

    Accepts a scalar or an array of energies; the integral is truncated where
    ``exp(-lam t) / lam`` drops below ``epsabs``.
    """
    if d not in (1, 2, 3):
        raise ValueError(f"Lloyd oracle is provided for d in {{1, 2, 3}}, got {d}")
    if not lam > 0:
        raise ValueError("lam must be positive")
    E_arr = np.atleast_1d(np.asarray(E, dtype=float))
    t_end = max(math.log(1.0 / (epsabs * lam)), 1.0) / lam

    def integrand(t):
        return math.exp(-lam * t) * j0(2.0 * t) ** d * np.cos(E_arr * t)

    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            val, err = quad_vec(integrand, 0.0, t_end, epsabs=epsabs, epsrel=1e-10,
                                limit=20000, norm="max")
        except IntegrationWarning as exc:
            raise QuadratureError(str(exc)) from exc
    if err > 1e-8:
        raise QuadratureError(f"quadrature error estimate {err:.3g} above 1e-8")
    out = val / math.pi
    return float(out[0]) if np.ndim(E) == 0 else out


@dataclass
class AppendixReport:
    t: np.ndarray
    difference: np.ndarray
    bound: np.ndarray

    @property
    def ok(self) -> np.ndarray:
        return self.difference <= self.bound

    @property
    def passed(self) -> bool:
        return bool(np.all(self.ok))


def appendix_bound_check(curve_L1: FourierCurve, curve_L2: FourierCurve, d: int,
                         L1: int, L2: int, nsigma: float = 3.0, atol: float = 1e-8):
    """``|c1(t) - c2(t)| <= 2d|t| (1/(2L1+1) + 1/(2L2+1)) + nsigma * combined stderr``.

    ``atol`` absorbs round-off in exact curves.
    """
    if not np.array_equal(curve_L1.t, curve_L2.t):
        raise ValueError("t grids differ")
    t = curve_L1.t
    diff = np.abs(curve_L1.values - curve_L2.values)
    se = np.sqrt(curve_L1.stderr ** 2 + curve_L2.stderr ** 2)
    bound = 2 * d * np.abs(t) * (1 / (2 * L1 + 1) + 1 / (2 * L2 + 1)) + nsigma * se + atol
    return AppendixReport(t=t, difference=diff, bound=bound)
