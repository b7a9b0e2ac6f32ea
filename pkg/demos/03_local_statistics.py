"""
Eigenvalues in shrinking windows
================================

In two dimensions, count eigenvalues of H_L in a window of width
2(2L+1)^(-gamma) around E and normalize by the expected count. The result
should approach the density of states rho(E).
"""
import numpy as np

from lloydlab.disorder import DisorderSpec, RandomStream, sample_disorder
from lloydlab.dos import lloyd_oracle
from lloydlab.experiments import anderson_realization
from lloydlab.lattice import build_hamiltonian, enumerate_box, partition_subboxes
from lloydlab.levelstats import (RescaleParams, rescaled_measure, subbox_samples,
                                 superposition_measure, window_count)
from lloydlab.spectra import eigensolve

spec = DisorderSpec(1.0)
target = lloyd_oracle(2, 1.0, 0.0)
print("rho(0) =", round(target, 5))

for L in (6, 9, 12):
    vals = [window_count(anderson_realization(r, seed=3, family=L, d=2, L=L, spec=spec,
                                              max_sites=10_000),
                         E=0.0, a=-1.0, b=1.0, gamma=0.2, L=L)
            for r in range(20)]
    print(f"L={L:2d}  normalized count {np.mean(vals):.4f} +- {np.std(vals, ddof=1) / np.sqrt(20):.4f}")

# cutting the box into independent pieces changes little
box = enumerate_box(2, 12)
H = build_hamiltonian(box, sample_disorder(spec, box, RandomStream(3, 0)).omega)
part = partition_subboxes(box, epsilon=0.6)
p = RescaleParams(E=0.0, gamma=0.2, L=12, d=2)
mu = rescaled_measure(eigensolve(H), p)
eta = superposition_measure(subbox_samples(H, part), p, expected_sites=box.n_sites)
print(f"{len(part)} pieces of side {part.piece_side}: full box mass {mu.mass(-1, 1):.4f}, "
      f"pieces {eta.mass(-1, 1):.4f}")
