"""Experiment pipelines behind the command line, one per experiment tag."""
from __future__ import annotations

import math
from functools import partial

import numpy as np

from . import __version__
from .config import ExperimentConfig, config_hash, grid_values
from .disorder import Delta, DisorderSpec, RandomStream, sample_disorder
from .dos import (convolve_dos, decay_bound_check, factorization_residual,
                  invert_fourier_with_error, lloyd_finite_curve, lloyd_oracle,
                  mc_fourier_dosm, pooled_point_measure, appendix_bound_check)
from .lattice import build_hamiltonian, build_laplacian, enumerate_box, partition_subboxes
from .levelstats import (RescaleParams, lln_variance_diagnostic, rescaled_measure,
                         subbox_samples, superposition_measure, wegner_minami_stats)
from .results import ResultTable
from .rmt import RandomMatrixSpec, eesd_fourier, read_matrix_file, sample_matrix_pair
from .runner import map_realizations, mean_and_stderr
from .spectra import counting_function, eigensolve


# --- per-realization tasks (module level so they pickle) -------------------

def anderson_realization(r, *, seed, family, d, L, spec: DisorderSpec, max_sites,
                         with_h2=False):
    """Spectra of ``H = Delta + omega1 + omega2`` and optionally ``h = Delta + omega2``."""
    box = enumerate_box(d, L, max_sites)
    dis = sample_disorder(spec, box, RandomStream(seed, r, family))
    sH = eigensolve(build_hamiltonian(box, dis.omega), tag=r)
    if not with_h2:
        return sH
    return sH, eigensolve(build_hamiltonian(box, dis.omega2), tag=r)


def superposition_realization(r, *, seed, family, d, L, spec, max_sites, epsilon,
                              n_per_axis, E, gamma, a, b):
    box = enumerate_box(d, L, max_sites)
    dis = sample_disorder(spec, box, RandomStream(seed, r, family))
    H = build_hamiltonian(box, dis.omega)
    part = partition_subboxes(box, epsilon, n_per_axis)
    p = RescaleParams(E=E, gamma=gamma, L=L, d=d)
    mu = rescaled_measure(eigensolve(H), p)
    eta = superposition_measure(subbox_samples(H, part), p, expected_sites=box.n_sites)
    return mu.mass(a, b), eta.mass(a, b)


def rmt_realization(r, *, seed, spec: RandomMatrixSpec):
    base, pert = sample_matrix_pair(spec, RandomStream(seed, r))
    return eigensolve(base, tag=r), eigensolve(pert, tag=r)


# --- helpers ----------------------------------------------------------------

def _new_table(cfg: ExperimentConfig, columns, units) -> ResultTable:
    name = cfg.output.name or cfg.experiment
    prov = {"config_hash": config_hash(cfg), "code_version": __version__,
            "seed": cfg.mc.seed, "experiment": cfg.experiment,
            "realizations": cfg.mc.realizations}
    return ResultTable(name=name, columns=list(columns) + ["config_hash"],
                       units=units, provenance=prov)


def _add(table: ResultTable, **values):
    table.add(config_hash=table.provenance["config_hash"], **values)


def _realize(cfg, L, family, with_h2=False):
    m = cfg.model
    task = partial(anderson_realization, seed=cfg.mc.seed, family=family, d=m.d, L=L,
                   spec=m.disorder_spec(), max_sites=m.max_sites, with_h2=with_h2)
    return map_realizations(task, cfg.mc.realizations, cfg.mc.workers)


def _lloyd_reference(spec: DisorderSpec, d: int, E):
    """Infinite-volume DOS when it is known in closed form (atomic mu2 at one point)."""
    E = np.asarray(E, dtype=float)
    if isinstance(spec.mu2, Delta) and d in (1, 2, 3):
        return lloyd_oracle(d, spec.lam, E - spec.mu2.c)
    return np.full(E.shape, np.nan)


# --- experiments ------------------------------------------------------------

def run_ids(cfg: ExperimentConfig) -> ResultTable:
    table = _new_table(cfg, ["L", "E", "mean_count", "ids", "stderr"],
                       {"E": "hopping", "ids": "fraction of states"})
    E = grid_values(cfg.grids.x)
    for fam, L in enumerate(cfg.model.L_list):
        samples = _realize(cfg, L, fam)
        M = len(samples[0])
        counts = np.stack([counting_function(s, E) for s in samples]).astype(float)
        mean, se = mean_and_stderr(counts)
        for e, c, s in zip(E, mean, se):
            _add(table, L=L, E=e, mean_count=c, ids=c / M, stderr=s / M)
    return table


def run_dos_fourier(cfg: ExperimentConfig) -> ResultTable:
    lam = cfg.model.lam
    t = grid_values(cfg.grids.t)
    table = _new_table(cfg, ["L", "t", "re", "im", "stderr", "h2_re", "h2_im", "h2_stderr",
                             "residual", "residual_stderr", "within_3sigma",
                             "decay_bound", "decay_status"],
                       {"t": "1/hopping"})
    for fam, L in enumerate(cfg.model.L_list):
        pairs = _realize(cfg, L, fam, with_h2=True)
        cH = mc_fourier_dosm([p[0] for p in pairs], t, lam=lam, keep_samples=False)
        ch = mc_fourier_dosm([p[1] for p in pairs], t, keep_samples=False)
        res = factorization_residual(cH, ch, lam)
        decay = decay_bound_check(cH, lam)
        within = res.within(3.0)
        for i in range(len(t)):
            _add(table, L=L, t=t[i], re=cH.values[i].real, im=cH.values[i].imag,
                 stderr=cH.stderr[i], h2_re=ch.values[i].real, h2_im=ch.values[i].imag,
                 h2_stderr=ch.stderr[i], residual=res.residual[i],
                 residual_stderr=res.stderr[i], within_3sigma=bool(within[i]),
                 decay_bound=decay.bound[i], decay_status=decay.status[i])
    return table


def run_dos_invert(cfg: ExperimentConfig) -> ResultTable:
    m = cfg.model
    spec = m.disorder_spec()
    t = grid_values(cfg.grids.t)
    x = grid_values(cfg.grids.x)
    table = _new_table(cfg, ["L", "x", "rho", "stderr", "rho_conv", "oracle"],
                       {"x": "hopping", "rho": "1/hopping"})
    atomic = isinstance(spec.mu2, Delta)
    for fam, L in enumerate(m.L_list):
        pairs = _realize(cfg, L, fam, with_h2=not atomic)
        samples = [p[0] for p in pairs] if not atomic else pairs
        curve = mc_fourier_dosm(samples, t, lam=m.lam)
        rho, se = invert_fourier_with_error(curve, x, t_max=cfg.inversion.t_max, lam=m.lam,
                                            tail_tol=cfg.inversion.tail_tol)
        if atomic:
            box = enumerate_box(m.d, L, m.max_sites)
            h2 = eigensolve(build_laplacian(box))
            h2.eigenvalues = h2.eigenvalues + spec.mu2.c
            nu2 = pooled_point_measure([h2])
        else:
            nu2 = pooled_point_measure([p[1] for p in pairs])
        conv = convolve_dos(nu2, m.lam, 0, x)
        oracle = _lloyd_reference(spec, m.d, x)
        for i in range(len(x)):
            _add(table, L=L, x=x[i], rho=rho[i], stderr=se[i], rho_conv=conv[i],
                 oracle=oracle[i])
    return table


def run_level_stats(cfg: ExperimentConfig) -> ResultTable:
    m = cfg.model
    w = cfg.grids.window
    table = _new_table(cfg, ["L", "E", "gamma", "beta", "a", "b", "count",
                             "normalized_count", "stderr", "oracle"],
                       {"E": "hopping", "normalized_count": "1/hopping"})
    oracle = float(_lloyd_reference(m.disorder_spec(), m.d, w.E))
    for fam, L in enumerate(m.L_list):
        samples = _realize(cfg, L, fam)
        side = 2 * L + 1
        s = side ** (-w.gamma)
        ev = [smp.eigenvalues for smp in samples]
        counts = np.array([np.count_nonzero((e >= w.E + w.a * s) & (e <= w.E + w.b * s))
                           for e in ev], dtype=float)
        norm = counts / ((w.b - w.a) * side ** (m.d - w.gamma))
        cm, _ = mean_and_stderr(counts)
        nm, nse = mean_and_stderr(norm)
        _add(table, L=L, E=w.E, gamma=w.gamma, beta=m.d - w.gamma, a=w.a, b=w.b,
             count=cm, normalized_count=nm, stderr=nse, oracle=oracle)
    return table


def run_wegner_minami(cfg: ExperimentConfig) -> ResultTable:
    m = cfg.model
    g = cfg.grids
    pairs = [(p.d, p.L, tuple(p.interval)) for p in g.pairs or []]
    if g.intervals:
        pairs += [(m.d, L, tuple(I)) for L in m.L_list for I in g.intervals]
    table = _new_table(cfg, ["d", "L", "sites", "I_lo", "I_hi", "mean_count", "mean_stderr",
                             "second_factorial", "second_stderr", "wegner_bound",
                             "minami_bound", "wegner_ok", "minami_ok"], {})
    spec = m.disorder_spec()
    for fam, (d, L, I) in enumerate(pairs):
        task = partial(anderson_realization, seed=cfg.mc.seed, family=fam, d=d, L=L,
                       spec=spec, max_sites=m.max_sites)
        samples = map_realizations(task, cfg.mc.realizations, cfg.mc.workers)
        st = wegner_minami_stats(samples, I, m.lam)
        _add(table, d=d, L=L, sites=st.n_sites, I_lo=I[0], I_hi=I[1],
             mean_count=st.mean_count, mean_stderr=st.mean_stderr,
             second_factorial=st.second_factorial_moment, second_stderr=st.second_stderr,
             wegner_bound=st.wegner_bound, minami_bound=st.minami_bound,
             wegner_ok=st.wegner_ok, minami_ok=st.minami_ok)
    return table


def run_superposition(cfg: ExperimentConfig) -> ResultTable:
    m = cfg.model
    w = cfg.grids.window
    part_cfg = cfg.partition
    table = _new_table(cfg, ["L", "n_per_axis", "epsilon_eff", "mu_mass", "mu_stderr",
                             "eta_mass", "eta_stderr", "abs_diff", "abs_diff_stderr",
                             "eta_variance", "lln_bound", "lln_ok"], {})
    values, eps_eff, rows = {}, {}, []
    for fam, L in enumerate(m.L_list):
        box = enumerate_box(m.d, L, m.max_sites)
        part = partition_subboxes(box, part_cfg.epsilon, part_cfg.n_per_axis)
        task = partial(superposition_realization, seed=cfg.mc.seed, family=fam, d=m.d, L=L,
                       spec=m.disorder_spec(), max_sites=m.max_sites,
                       epsilon=part_cfg.epsilon, n_per_axis=part.n_per_axis,
                       E=w.E, gamma=w.gamma, a=w.a, b=w.b)
        out = np.array(map_realizations(task, cfg.mc.realizations, cfg.mc.workers))
        mu, eta = out[:, 0], out[:, 1]
        values[L] = eta
        eps_eff[L] = math.log(part.n_per_axis) / math.log(box.side)
        rows.append((L, part.n_per_axis, mu, eta))
    lln = None
    if cfg.mc.realizations >= 30:
        lln = {r.L: r for r in lln_variance_diagnostic(
            values, w.b - w.a, m.d, w.gamma, lambda L: eps_eff[L]).rows}
    for L, n_axis, mu, eta in rows:
        mm, ms = mean_and_stderr(mu)
        em, es = mean_and_stderr(eta)
        dm, ds = mean_and_stderr(np.abs(mu - eta))
        row = lln.get(L) if lln else None
        _add(table, L=L, n_per_axis=n_axis, epsilon_eff=eps_eff[L], mu_mass=mm, mu_stderr=ms,
             eta_mass=em, eta_stderr=es, abs_diff=dm, abs_diff_stderr=ds,
             eta_variance=float(np.var(eta, ddof=1)),
             lln_bound=row.bound if row else float("nan"),
             lln_ok=row.within_bound if row else False)
    return table


def run_eesd(cfg: ExperimentConfig) -> ResultTable:
    r = cfg.rmt
    matrix = read_matrix_file(r.matrix_file) if r.a_model == "fixed" else None
    spec = RandomMatrixSpec(N=r.N, a_model=r.a_model, entries=r.entries, lam=cfg.model.lam,
                            matrix=matrix)
    t = grid_values(cfg.grids.t)
    task = partial(rmt_realization, seed=cfg.mc.seed, spec=spec)
    pairs = map_realizations(task, cfg.mc.realizations, cfg.mc.workers)
    out = eesd_fourier([p[1] for p in pairs], [p[0] for p in pairs], t, spec.lam)
    within = out.residual.within(3.0)
    table = _new_table(cfg, ["t", "re", "im", "stderr", "base_re", "base_im", "base_stderr",
                             "residual", "residual_stderr", "within_3sigma"],
                       {"t": "1/energy"})
    cp, cb = out.perturbed, out.base
    for i in range(len(t)):
        _add(table, t=t[i], re=cp.values[i].real, im=cp.values[i].imag, stderr=cp.stderr[i],
             base_re=cb.values[i].real, base_im=cb.values[i].imag, base_stderr=cb.stderr[i],
             residual=out.residual.residual[i], residual_stderr=out.residual.stderr[i],
             within_3sigma=bool(within[i]))
    return table


def run_appendix_bound(cfg: ExperimentConfig) -> ResultTable:
    m = cfg.model
    spec = m.disorder_spec()
    L1, L2 = sorted(m.L_list)
    t = grid_values(cfg.grids.t)
    curves = []
    for fam, L in enumerate((L1, L2)):
        if isinstance(spec.mu2, Delta):
            c = lloyd_finite_curve(enumerate_box(m.d, L, m.max_sites), m.lam, t)
            c.values = c.values * np.exp(-1j * t * spec.mu2.c)
        else:
            c = mc_fourier_dosm(_realize(cfg, L, fam), t, lam=m.lam, keep_samples=False)
        curves.append(c)
    rep = appendix_bound_check(curves[0], curves[1], m.d, L1, L2)
    table = _new_table(cfg, ["t", "L1_re", "L1_im", "L2_re", "L2_im", "difference",
                             "bound", "ok"], {"t": "1/hopping"})
    for i in range(len(t)):
        _add(table, t=t[i], L1_re=curves[0].values[i].real, L1_im=curves[0].values[i].imag,
             L2_re=curves[1].values[i].real, L2_im=curves[1].values[i].imag,
             difference=rep.difference[i], bound=rep.bound[i], ok=bool(rep.ok[i]))
    return table


PIPELINES = {
    "ids": run_ids,
    "dos-fourier": run_dos_fourier,
    "dos-invert": run_dos_invert,
    "level-stats": run_level_stats,
    "wegner-minami": run_wegner_minami,
    "superposition": run_superposition,
    "eesd": run_eesd,
    "appendix-bound": run_appendix_bound,
}
