"""End-to-end acceptance checks, one test per shipped guarantee.

Each test prints a single machine-greppable line
``ACCEPTANCE <n>: PASS/FAIL (<detail>)`` in addition to its assertions.
"""
import math
import sys
import time

import numpy as np
import pytest

from bubblekit import ansatz, energy, greens, kirchhoff_routh as kr
from bubblekit import pde_solver as ps
from bubblekit import radial_profiles as rp
from bubblekit import special_integrals as si

T_STAR = math.sqrt(math.sqrt(5.0) - 2.0)


@pytest.fixture
def announce(capsys):
    # emit the one-line verdict on the live terminal, bypassing capture
    def _report(n, ok, detail):
        line = f"ACCEPTANCE {n}: {'PASS' if ok else 'FAIL'} ({detail})\n"
        with capsys.disabled():
            sys.stdout.write(line)
            sys.stdout.flush()
    return _report


def _build(backend, pts, signs, p, lam):
    params = ansatz.make_params(backend, pts, signs, p, lam)
    return ansatz.build_ansatz(backend, pts, signs, params), params


def test_criterion_01_identity_catalog(announce):
    t0 = time.perf_counter()
    records = si.verify_catalog()
    elapsed = time.perf_counter() - t0
    worst = max(r.abs_err / max(1.0, abs(r.closed_value)) for r in records)
    ok = (len(records) >= 45
          and all(r.abs_err <= max(1e-7, 1e-7 * abs(r.closed_value))
                  for r in records)
          and elapsed < 60.0
          and abs(si.ZETA3 - 1.2020569) < 1e-7
          and abs(si.ZETA4 - 1.0823232) < 1e-7)
    announce(1, ok, f"{len(records)} identities, worst rel err {worst:.2e}, "
                   f"{elapsed:.1f}s")
    assert ok


def test_criterion_02_nystrom_robin(disk, circle_nystrom, announce):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    worst = 0.0
    count = 0
    while count < 50:
        y = rng.uniform(-0.8, 0.8, size=2)
        if np.hypot(*y) > 0.8:
            continue
        count += 1
        worst = max(worst, abs(greens.robin(circle_nystrom, y)
                               - greens.robin(disk, y)))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-6 and elapsed < 5.0
    announce(2, ok, f"max |H_nystrom - H_disk| = {worst:.2e} "
                   f"over 50 probes, {elapsed:.2f}s")
    assert ok


def test_criterion_03_kirchhoff_routh_criticals(disk, announce):
    reports = kr.find_critical(disk, [1, -1], starts=48, seed=7)
    t_found = sorted(abs(reports[0].points[k, 0]) for k in range(2))
    # independent 1D brute-force oracle along the diameter
    ts = np.linspace(0.05, 0.95, 2001)
    vals = [kr.phi_m(disk, np.array([[t, 0.0], [-t, 0.0]]), [1, -1])
            for t in ts]
    t_brute = ts[int(np.argmax(vals))]
    origin = kr.find_critical(disk, [1], starts=16, seed=3)[0]
    r_origin = float(np.hypot(*origin.points[0]))
    ok = (abs(t_found[0] - T_STAR) < 1e-5
          and abs(t_found[1] - T_STAR) < 1e-5
          and abs(t_brute - T_STAR) < 1e-3
          and r_origin < 1e-6)
    announce(3, ok, f"|t - t*| = {abs(t_found[0] - T_STAR):.1e}, "
                   f"oracle |t - t*| = {abs(t_brute - T_STAR):.1e}, "
                   f"m=1 at |x| = {r_origin:.1e}")
    assert ok


def test_criterion_04_d_constants(announce):
    worst1 = 0.0
    for mu in (0.5, 1.0, 2.0):
        expect = 4.0 * si.LOG8 - 8.0 - 8.0 * math.log(mu)
        prof = rp.correction_profile(1, 1.5, mu)
        worst1 = max(worst1, abs(prof.d_moment - expect),
                     abs(prof.d_slope - expect))
    worst2 = 0.0
    for mu in (0.5, 1.0, 2.0):
        for p in (0.5, 1.5, 2.0):
            prof = rp.correction_profile(2, p, mu)
            worst2 = max(worst2, abs(prof.d_moment - si.d2_closed(mu, p)))
    ok = worst1 < 1e-10 and worst2 < 1e-6
    announce(4, ok, f"D1 worst err {worst1:.1e} (both routes), "
                   f"D2 worst err {worst2:.1e} over 3x3 grid")
    assert ok


def test_criterion_05_mu_system(disk, announce):
    pts = np.zeros((1, 2))
    gamma, eps = ansatz.resolve_scales(1.0, 1e-8)
    mu1 = ansatz.solve_mu(disk, pts, [1], 1.0, gamma, eps)
    err_center = abs(mu1[0] - 1.0 / (2.0 * math.sqrt(2.0)))

    errs = []
    for lam in (1e-6, 1e-8, 1e-10):
        gamma, eps = ansatz.resolve_scales(1.5, lam)
        mu = ansatz.solve_mu(disk, pts, [1], 1.5, gamma, eps)
        x_lim = ansatz.mu_limit_log(disk, pts, [1], 1.5)
        mu_lim = np.sqrt(np.exp(x_lim) / 8.0)
        errs.append(abs(mu[0] - mu_lim[0]))
    ok = err_center < 1e-10 and errs[0] > errs[1] > errs[2]
    announce(5, ok, f"center err {err_center:.1e}, p=1.5 tracking errs "
                   + "/".join(f"{e:.2e}" for e in errs))
    assert ok


_SWEEPS = [
    (1.0, "center", [1], (1e-4, 1e-7, 1e-10)),
    (1.5, "center", [1], (1e-6, 1e-8, 1e-10)),
    (0.5, "pair", [1, -1], (1e-6, 1e-8, 1e-10)),
]


def _sweep_points(kind, signs):
    if kind == "center":
        return np.zeros((len(signs), 2))
    return np.array([[T_STAR, 0.0], [-T_STAR, 0.0]])


def test_criterion_06_residual_trend(disk, announce):
    # the bound (norm * gamma^{4p} <= C) is one-sided: the band compares the
    # sweep maximum against the value at the largest lambda
    t0 = time.perf_counter()
    ratios = []
    ok = True
    for p, kind, signs, lams in _SWEEPS:
        pts = _sweep_points(kind, signs)
        vals = []
        for lam in lams:
            ans, params = _build(disk, pts, signs, p, lam)
            rep = ansatz.residual_norm(ans)
            vals.append(rep.norm * params.gamma ** (4.0 * p))
        ratio = max(vals) / vals[0]
        ratios.append(ratio)
        ok = ok and ratio <= 4.0
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 600.0
    announce(6, ok, "band ratios "
            + "/".join(f"{r:.2f}" for r in ratios)
            + f" (limit 4), {elapsed:.0f}s")
    assert ok


def test_criterion_07_energy_expansion(disk, announce):
    ratios = []
    ok = True
    for p, kind, signs, lams in _SWEEPS:
        pts = _sweep_points(kind, signs)
        vals = []
        for lam in lams:
            ans, params = _build(disk, pts, signs, p, lam)
            rep = energy.j_lambda(ans)
            q = (p * p * params.gamma ** (2.0 * (p - 1.0))
                 * abs(rep.discrepancy) * abs(math.log(params.eps)))
            vals.append(q)
        ratio = max(vals) / max(vals[0], 1e-12)
        ratios.append(ratio)
        ok = ok and ratio <= 4.0
    announce(7, ok, "band ratios "
            + "/".join(f"{r:.2f}" for r in ratios) + " (limit 4)")
    assert ok


def test_criterion_08_beta_one_sidedness(disk, announce):
    pts = np.zeros((1, 2))
    results = []
    ok = True
    # p = 0.5 needs very small lambda: the next-order term decays only
    # like 1/gamma^p, so the 20% window opens up deep in the sweep
    for p, lams, side in ((0.5, (1e-16, 1e-20, 1e-24), -1.0),
                          (1.5, (1e-6, 1e-8, 1e-10), +1.0)):
        target = 4.0 * (p - 1.0) / (p * p)
        for lam in lams:
            ans, params = _build(disk, pts, [1], p, lam)
            b = energy.beta_lambda(ans)
            ok = ok and side * b.deviation > 0.0
        scaled = b.deviation * b.gamma ** (2.0 * p) / (4.0 * math.pi)
        rel = abs(scaled - target) / abs(target)
        results.append((p, scaled, target, rel))
        ok = ok and rel < 0.20
    announce(8, ok, "; ".join(
        f"p={p}: scaled dev {s:.3f} vs {t:.3f} ({100 * r:.1f}%)"
        for p, s, t, r in results))
    assert ok


def test_criterion_09_pde_solver(announce):
    t0 = time.perf_counter()
    lam = 0.01   # p = 1, eps = 0.1
    c = 8.0 / lam - 2.0
    delta = (c + math.sqrt(c * c - 4.0)) / 2.0

    def exact(x):
        r2 = x @ x
        return math.log(8.0 * delta / (lam * (1.0 + delta * r2) ** 2))

    disk = greens.build_backend(greens.DomainSpec.unit_disk())
    pts = np.zeros((1, 2))
    errs = []
    iters = []
    scale = 0.0
    for n_r, n_t in ((256, 128), (512, 256)):
        grid = ps.Grid2D.disk(n_r=n_r, n_theta=n_t,
                              cluster=1.0 / math.sqrt(delta))
        ans, params = _build(disk, pts, [1], 1.0, lam)
        seed = ps.ansatz_seed(grid, ans)
        u, rep = ps.newton_solve(seed, 1.0, lam)
        assert rep.converged, rep.message
        iters.append(rep.iterations)
        ex = ps.Field2D.from_function(grid, exact)
        errs.append(float(np.max(np.abs(u.to_flat() - ex.to_flat()))))
        scale = float(np.max(np.abs(ex.to_flat())))
    elapsed = time.perf_counter() - t0
    ratio = errs[0] / errs[1]
    bound = 5.0 * (1.0 / 512.0) ** 2 * scale
    ok = (max(iters) <= 10 and errs[1] <= bound
          and 3.5 <= ratio <= 4.5 and elapsed < 120.0)
    announce(9, ok, f"iters {max(iters)}, err {errs[1]:.2e} <= {bound:.2e}, "
                   f"ratio {ratio:.3f}, {elapsed:.0f}s")
    assert ok


def test_criterion_10_nodal_structure(disk, announce):
    pts = np.array([[T_STAR, 0.0], [-T_STAR, 0.0]])
    ans, params = _build(disk, pts, [1, -1], 1.0, 1e-4)
    grid = ps.Grid2D.disk(n_r=128, n_theta=128,
                          cluster=params.eps * float(np.min(params.mu)))
    nodal = ps.nodal_analysis(ps.ansatz_seed(grid, ans))
    flux = ps.boundary_flux(disk, pts, [1, -1])
    ok = (nodal["components"] == 2
          and nodal["boundary_touching"] is True
          and abs(flux["integral"]) < 1e-6
          and flux["sign_change"] is True)
    announce(10, ok, f"components {nodal['components']}, touching "
                    f"{nodal['boundary_touching']}, flux integral "
                    f"{flux['integral']:.1e}, sign change "
                    f"{flux['sign_change']}")
    assert ok
