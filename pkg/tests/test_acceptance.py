"""Acceptance suite: one test per criterion, one pass/fail line per criterion.

Run with ``pytest tests/test_acceptance.py -v -s``.  Heavy steady-state
solves are shared through the session-scoped solver cache.
"""

import math
import time

import numpy as np
import pytest

import grainkin as gk
from test_dynamics import eta_weights, random_state
from test_diagnostics import make_report

TOL = 1e-9


def record(num, ok, detail):
    print(f"ACCEPTANCE {num}: {'PASS' if ok else 'FAIL'} — {detail}")
    assert ok, f"criterion {num}: {detail}"


def test_criterion_01_zero_balance():
    p = gk.Parameters(beta=1.3, n_max=25, domain_length=20, cells=400)
    kappa_n = (p.beta + 1.0) * p.n_max
    rng = np.random.default_rng(99)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        f = rng.uniform(0.0, 1.0, p.num_classes)
        s = abs(float(gk.apply_coupling(f, p).sum())) / (kappa_n * float(np.abs(f).sum()))
        worst = max(worst, s)
    wall = time.perf_counter() - t0
    record(1, worst <= 1e-12 and wall < 1.0,
           f"max |sum Jf| / (kappa_N ||f||_1) = {worst:.2e} (<= 1e-12), {wall:.2f}s")


def test_criterion_02_exact_conservation():
    p = gk.Parameters(beta=1.0, n_max=25, domain_length=20, cells=400, seed=0)
    grid = gk.Grid.from_parameters(p)
    init = gk.initial_state(p, grid, "random")
    t0 = time.perf_counter()
    rep = gk.integrate_to_steady(init, grid, p, tol=1e-300, max_steps=100_000,
                                 sample_every=10_000)
    wall = time.perf_counter() - t0
    ok = (rep.steps == 100_000 and rep.drift_area <= 1e-8
          and rep.drift_pq <= 1e-8 and rep.min_g >= 0.0 and wall < 120.0)
    record(2, ok,
           f"1e5 steps: |A-1| <= {rep.drift_area:.2e}, |P+eQ| <= {rep.drift_pq:.2e}, "
           f"min g = {rep.min_g:.2e}, {wall:.0f}s")


def test_criterion_03_steady_states(solver_cache):
    details = []
    ok = True
    for beta in (0.5, 1.0, 1.5):
        _, _, r1 = solver_cache(beta=beta, kind="random", tol=TOL)
        _, _, r2 = solver_cache(beta=beta, kind="uniform", tol=TOL)
        lo, hi = 1.0 / (6.0 * (2.0 * beta + 1.0)), 5.0 / (2.0 - beta)
        sup = float(np.abs(r1.profile.g - r2.profile.g).max())
        ok &= r1.converged and r2.converged
        ok &= r1.steps <= 10_000_000 and r2.steps <= 10_000_000
        ok &= lo <= r1.gamma <= hi and lo <= r2.gamma <= hi
        ok &= sup <= 1e-6
        details.append(f"beta={beta}: gamma={r1.gamma:.5f} in [{lo:.4f},{hi:.3f}], "
                       f"sup diff {sup:.1e}")
    record(3, ok, "; ".join(details))


def test_criterion_04_mass_identity(solver_cache):
    details = []
    ok = True
    for beta in (0.5, 1.0, 1.5):
        p, grid, rep = solver_cache(beta=beta, kind="random", tol=TOL)
        ids = gk.verify_steady_identities(rep, grid, p)
        bound = 10.0 * TOL * float(np.sum(rep.moments.X))
        ok &= ids.mass_identity <= bound
        details.append(f"beta={beta}: {ids.mass_identity:.2e} <= {bound:.2e}")
    record(4, ok, "; ".join(details))


def test_criterion_05_moment_balance_property():
    p = gk.Parameters(beta=1.0, n_max=25, domain_length=20, cells=400)
    grid = gk.Grid.from_parameters(p)
    eps = p.eps
    rng = np.random.default_rng(7)
    from grainkin.model import stencil_for
    st = stencil_for(p)
    worst_z = worst_x = worst_y = 0.0
    for trial in range(100):
        state = random_state(p, 5000 + trial)
        mu = rng.normal(size=state.g.shape)
        gam = rng.uniform(0.0, 3.0)
        ev = gk.rhs(state, grid, p, gam)
        eta = eta_weights(mu, p, grid)
        jg = gk.apply_coupling(state.g, p)
        inter = slice(1, -1)
        z = eps * (mu[:, inter] * state.g[:, inter]).sum(axis=1)
        dz = eps * (mu[:, inter] * ev.dg[:, inter]).sum(axis=1)
        bnd = np.where(p.class_values <= 5, 6.0 - p.class_values, 0.0)
        zeta = bnd * mu[:, 0] * state.g[:, 1] \
            + eps * (eta[:, inter] * state.g[:, inter]).sum(axis=1)
        rhs_side = 2.0 * z - zeta + gam * eps * (mu[:, inter] * jg[:, inter]).sum(axis=1)
        scale = np.abs(dz) + np.abs(2 * z) + np.abs(zeta) + 1e-30
        worst_z = max(worst_z, float((np.abs(dz - rhs_side) / scale).max()))
        # X balance
        m = gk.moments(state, grid, p)
        dX = eps * ev.dg[:, inter].sum(axis=1)
        exp_x = m.X + gam * gk.apply_coupling(m.X, p) - bnd * state.g[:, 1]
        worst_x = max(worst_x, float((np.abs(dX - exp_x)
                                      / (np.abs(dX) + np.abs(m.X) + 1e-30)).max()))
        # Y balance
        dY = eps * (grid.xi[None, inter] * ev.dg[:, inter]).sum(axis=1)
        corr = eps**2 * (st.sign[:, inter] * state.g[:, inter]).sum(axis=1)
        exp_y = (p.class_values - 6.0) * m.X + gam * gk.apply_coupling(m.Y, p) + corr
        worst_y = max(worst_y, float((np.abs(dY - exp_y)
                                      / (np.abs(dY) + np.abs(m.Y) + 1e-30)).max()))
    ok = worst_z <= 1e-12 and worst_x <= 1e-12 and worst_y <= 1e-12
    record(5, ok, f"100 triples: abstract {worst_z:.2e}, X {worst_x:.2e}, "
                  f"Y {worst_y:.2e} (all <= 1e-12 relative)")


def test_criterion_06_decay_law(solver_cache):
    p, grid, rep = solver_cache(beta=1.0, cells=400, kind="random", tol=TOL)
    dd = gk.decay_diagnostics(rep, p, window=(12, 22))
    target = -math.log(2.0)
    rel = abs(dd.slope - target) / abs(target)
    slope_ok = rel <= 0.15

    shrink = []
    for cells in (200, 400):
        pc, gc, rc = solver_cache(beta=1.0, cells=cells, kind="random", tol=TOL)
        dc = gk.decay_diagnostics(rc, pc)
        sel = (dc.recursion_classes >= 7) & (dc.recursion_classes <= 15)
        shrink.append(float(np.abs(dc.recursion_residual[sel]).max()))
    ratio = shrink[0] / shrink[1]
    rec_ok = ratio >= 1.5
    record(6, slope_ok and rec_ok,
           f"slope {dd.slope:.4f} vs -ln2 ({rel:.1%} off, <= 15%); recursion residual "
           f"max_n |r_n| eps=0.1: {shrink[0]:.2e}, eps=0.05: {shrink[1]:.2e}, "
           f"shrink factor {ratio:.2f} (>= 1.5 required)")


def test_criterion_07_singularity_correction(solver_cache):
    gaps = {}
    ok = True
    for cells in (400, 800):
        p, grid, rep = solver_cache(beta=1.0, cells=cells, kind="random", tol=TOL)
        sing = gk.classify_singularities(rep, grid, p)
        worst = 0.0
        for n in range(10, 21):
            row = sing.by_class(n)
            ok &= row.gamma_kappa > 2.0
            gap = abs(row.measured_ratio - row.predicted_ratio)
            if cells == 400:
                ok &= gap <= 0.10 * row.predicted_ratio
            worst = max(worst, gap)
        gaps[cells] = worst
    ok &= gaps[800] < gaps[400]
    record(7, ok, f"n=10..20 supercritical; max |measured-predicted| "
                  f"eps=0.05: {gaps[400]:.4f} (<=10% of ratio), eps=0.025: {gaps[800]:.4f} (shrinking)")


def test_criterion_08_ode_oracle(solver_cache):
    p, grid, rep = solver_cache(beta=1.0, cells=400, kind="random", tol=TOL)
    bound = 5.0 * p.eps
    d2 = gk.ode_oracle(rep, 2, (0.5, 3.5), grid, p)
    d10a = gk.ode_oracle(rep, 10, (0.5, 2.8), grid, p)
    d10b = gk.ode_oracle(rep, 10, (5.3, 6.8), grid, p)

    # manufactured: zero neighbours, zero coupling weight, closed form known
    n = 10
    a, b = 5.5, 8.5
    state = gk.State.zeros(p)
    mask = grid.xi > 4.25
    state.g[n - 2, mask] = ((a - 4.0) / (grid.xi[mask] - 4.0)) ** 2
    state.g[:, -1] = 0.0
    manufactured = make_report(gk.State(state.g, validate=False), grid, p, gamma=0.0)
    dm = gk.ode_oracle(manufactured, n, (a, b), grid, p)

    ok = d2 <= bound and d10a <= bound and d10b <= bound and dm <= 1e-8
    record(8, ok, f"deviations n=2: {d2:.2e}, n=10: {d10a:.2e}/{d10b:.2e} "
                  f"(<= {bound}); manufactured {dm:.2e} (<= 1e-8)")


def test_criterion_09_eps_convergence(solver_cache):
    def cached_solver(params):
        _, _, rep = solver_cache(beta=params.beta, cells=params.cells, tol=TOL)
        return rep

    p = gk.Parameters(beta=1.0)
    rows = gk.epsilon_convergence(p, [0.2, 0.1, 0.05], solver=cached_solver)
    by_eps = {round(r.eps, 10): r for r in rows}
    dg_coarse = abs(by_eps[0.2].gamma - by_eps[0.1].gamma)
    dg_fine = abs(by_eps[0.1].gamma - by_eps[0.05].gamma)
    l1 = [by_eps[0.2].l1_to_finest, by_eps[0.1].l1_to_finest, by_eps[0.05].l1_to_finest]
    ok = dg_fine < dg_coarse and l1[0] > l1[1] > l1[2] == 0.0
    record(9, ok, f"|G(0.1)-G(0.05)|={dg_fine:.2e} < |G(0.2)-G(0.1)|={dg_coarse:.2e}; "
                  f"L1 to finest {l1[0]:.2e} > {l1[1]:.2e} > {l1[2]:.1e}")


def test_criterion_10_compact_support(solver_cache):
    p, grid, rep = solver_cache(beta=1.0, cells=400, kind="random", tol=TOL)
    k_n_max = grid.singular_index(p.n_max)
    tail = rep.profile.g[:, k_n_max + 1:-1]
    worst = float(tail.max(initial=0.0))
    record(10, worst <= 10.0 * TOL,
           f"max profile entry beyond xi = N-6: {worst:.2e} (<= {10 * TOL:.0e})")
