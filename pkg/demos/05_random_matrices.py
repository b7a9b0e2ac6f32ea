"""
Random matrices with a Cauchy diagonal
======================================

Adding an independent Cauchy diagonal to any symmetric matrix multiplies
the transform of the expected spectral distribution by exp(-lam|t|) and
smooths the density into g * L_N.
"""
import numpy as np

from lloydlab.experiments import rmt_realization
from lloydlab.rmt import RandomMatrixSpec, eesd_density_derivative, eesd_fourier

spec = RandomMatrixSpec(N=100, a_model="wigner", entries="gaussian", lam=0.5)
pairs = [rmt_realization(r, seed=5, spec=spec) for r in range(100)]
base = [b for b, _ in pairs]
pert = [p for _, p in pairs]

t = np.linspace(0, 4, 9)
out = eesd_fourier(pert, base, t, spec.lam)
for ti, a, b in zip(t, out.perturbed.values, out.base.values):
    print(f"t={ti:.1f}  perturbed {a.real:+.4f}  exp(-lam t) base {np.exp(-spec.lam * ti) * b.real:+.4f}")

x = np.linspace(-3, 3, 7)
print("smoothed density:", np.round(eesd_density_derivative(base, spec.lam, 0, x), 4))
print("its derivative:  ", np.round(eesd_density_derivative(base, spec.lam, 1, x), 4))
