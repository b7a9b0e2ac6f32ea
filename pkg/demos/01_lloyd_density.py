"""
Density of states of the Lloyd model
====================================

With purely Cauchy disorder the density of states is known in closed form
through its Fourier transform exp(-lam|t|) J0(2t)^d. Here we estimate it by
Monte Carlo on a finite chain and compare.
"""
import numpy as np

from lloydlab.disorder import DisorderSpec
from lloydlab.dos import invert_fourier_with_error, lloyd_oracle, mc_fourier_dosm
from lloydlab.experiments import anderson_realization

lam, L, R = 1.0, 200, 60
spec = DisorderSpec(lam)

# one spectrum per realization of the potential
samples = [anderson_realization(r, seed=1, family=0, d=1, L=L, spec=spec, max_sites=10_000)
           for r in range(R)]

# Fourier transform of the finite-volume DOS; exp(-14) is below 1e-6
t = np.arange(0, 14.0 + 1e-9, 0.01)
curve = mc_fourier_dosm(samples, t, lam=lam)
print("transform at t=1:", curve.values[100], "+-", curve.stderr[100])

x = np.linspace(-3, 3, 7)
rho, se = invert_fourier_with_error(curve, x, lam=lam)
exact = lloyd_oracle(1, lam, x)
print(f"{'E':>6} {'estimate':>10} {'stderr':>8} {'oracle':>10}")
for e, r, s, o in zip(x, rho, se, exact):
    print(f"{e:6.2f} {r:10.5f} {s:8.5f} {o:10.5f}")

# the same function in two and three dimensions
for d in (2, 3):
    print(f"rho(0) in d={d}:", lloyd_oracle(d, lam, 0.0))
