"""
Wegner and Minami moments
=========================

The expected number of eigenvalues in I is at most |Lambda||I|/(pi lam), and
the second factorial moment at most the square of that.
"""
from lloydlab.disorder import DisorderSpec, Uniform
from lloydlab.experiments import anderson_realization
from lloydlab.levelstats import wegner_minami_stats

for spec in (DisorderSpec(1.0), DisorderSpec(1.0, Uniform(-1.0, 1.0))):
    print(spec.mu2)
    for d, L, I in ((1, 30, (-0.2, 0.2)), (2, 5, (0.0, 0.25))):
        runs = [anderson_realization(r, seed=11, family=0, d=d, L=L, spec=spec, max_sites=10_000)
                for r in range(100)]
        s = wegner_minami_stats(runs, I, spec.lam)
        print(f"  d={d} |Lambda|={s.n_sites:4d} I={I}: "
              f"E[X]={s.mean_count:.3f} (bound {s.wegner_bound:.3f}), "
              f"E[X(X-1)]={s.second_factorial_moment:.3f} (bound {s.minami_bound:.3f})")
