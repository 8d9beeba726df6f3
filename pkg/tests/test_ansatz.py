import math

import numpy as np
import pytest

from bubblekit import ansatz, greens

T_STAR = math.sqrt(math.sqrt(5.0) - 2.0)


def _scale_residual(p, lam, gamma, eps):
    # the two defining relations between lambda, gamma and eps
    r1 = p * lam * gamma ** (2.0 * (p - 1.0)) * eps * eps \
        * math.exp(gamma ** p) - 1.0
    r2 = p * gamma ** p + 4.0 * math.log(eps)
    return abs(r1), abs(r2)


def test_resolve_scales_satisfies_relations():
    for p in (0.5, 1.0, 1.3, 1.9):
        for lam in (1e-4, 1e-8, 1e-12):
            gamma, eps = ansatz.resolve_scales(p, lam)
            r1, r2 = _scale_residual(p, lam, gamma, eps)
            assert r1 < 1e-10
            assert r2 < 1e-10


def test_resolve_scales_p_one_explicit():
    lam = 1e-8
    gamma, eps = ansatz.resolve_scales(1.0, lam)
    assert abs(eps - math.sqrt(lam)) < 1e-22
    assert abs(gamma + 2.0 * math.log(lam)) < 1e-12


def test_resolve_scales_no_root_for_large_lambda():
    # at p < 1 the defining relation loses its root for lambda too large
    with pytest.raises(ansatz.NoRootError):
        ansatz.resolve_scales(0.5, 10.0)


def test_mu_center_disk_p_one(disk):
    pts = np.array([[0.0, 0.0]])
    gamma, eps = ansatz.resolve_scales(1.0, 1e-8)
    mu = ansatz.solve_mu(disk, pts, [1], 1.0, gamma, eps)
    assert abs(mu[0] - 1.0 / (2.0 * math.sqrt(2.0))) < 1e-10


def test_mu_tracks_limit_p_15(disk):
    pts = np.array([[0.0, 0.0]])
    errs = []
    for lam in (1e-6, 1e-8, 1e-10):
        gamma, eps = ansatz.resolve_scales(1.5, lam)
        mu = ansatz.solve_mu(disk, pts, [1], 1.5, gamma, eps)
        x_lim = ansatz.mu_limit_log(disk, pts, [1], 1.5)
        mu_lim = np.sqrt(np.exp(x_lim) / 8.0)
        errs.append(abs(mu[0] - mu_lim[0]) * abs(math.log(eps)))
    # error decreasing like 1/|log eps| means the scaled error stays bounded
    assert errs[0] > errs[1] > errs[2] or max(errs) < 2.0 * min(errs)


def test_bubble_shift_identity(disk):
    # omega_{eps,mu,xi}(eps y) = omega_mu(y - xi') + p gamma^p
    pts = np.array([[0.2, -0.1]])
    params = ansatz.make_params(disk, pts, [1], 1.0, 1e-6)
    ans = ansatz.build_ansatz(disk, pts, [1], params)
    mu = float(params.mu[0])
    y = pts[0] / params.eps + np.array([3.0, -2.0])
    z = y - ans.xi_prime[0]
    expect = math.log(8.0 * mu * mu / (mu * mu + z @ z) ** 2) \
        + params.p * params.gamma ** params.p
    assert abs(ans.u_i(0, params.eps * y) * params.p
               * params.gamma ** (params.p - 1.0) - expect) < 1e-9


def test_ansatz_value_near_peak(disk):
    pts = np.array([[0.0, 0.0]])
    params = ansatz.make_params(disk, pts, [1], 1.0, 1e-8)
    ans = ansatz.build_ansatz(disk, pts, [1], params)
    # at the peak u is gamma to leading order
    assert abs(ans.u(pts[0]) - params.gamma) / params.gamma < 0.25


def test_residual_p_one_centered_disk_is_two_lambda(disk):
    # at p = 1 the expansion of the nonlinearity is exact and the only
    # defect of the projected ansatz is the boundary constant, giving
    # ||E||_* = 2 eps^2 mu^2 / mu^2-weight = 2 lambda exactly at the center
    lam = 1e-6
    pts = np.array([[0.0, 0.0]])
    params = ansatz.make_params(disk, pts, [1], 1.0, lam)
    ans = ansatz.build_ansatz(disk, pts, [1], params)
    report = ansatz.residual_norm(ans)
    assert abs(report.norm - 2.0 * lam) < 1e-2 * lam
    assert report.is_grid_proxy


def test_residual_report_regions(disk):
    pts = np.array([[T_STAR, 0.0], [-T_STAR, 0.0]])
    params = ansatz.make_params(disk, pts, [1, -1], 0.5, 1e-8)
    ans = ansatz.build_ansatz(disk, pts, [1, -1], params)
    report = ansatz.residual_norm(ans)
    assert set(report.region_max) == {"inner", "annulus", "far"}
    assert report.norm == max(report.region_max.values())
    assert np.all(report.weight > 0.0)


def test_sigma_validation(disk):
    pts = np.array([[0.0, 0.0]])
    params = ansatz.make_params(disk, pts, [1], 1.5, 1e-8)
    ans = ansatz.build_ansatz(disk, pts, [1], params)
    with pytest.raises(ValueError):
        ansatz.residual_norm(ans, sigma=0.9)
    with pytest.raises(ValueError):
        ansatz.residual_norm(ans, sigma=-0.1)


def test_default_sigma():
    assert ansatz.default_sigma(1.0) == 0.25
    assert ansatz.default_sigma(1.5) == pytest.approx(0.5 * min(1.0 / 3.0, 0.5))


def test_layer_weights_vanish_at_p_one():
    params = ansatz.make_params(
        greens.build_backend(greens.DomainSpec.unit_disk()),
        np.array([[0.0, 0.0]]), [1], 1.0, 1e-8)
    assert params.p == 1.0
    # ((p-1)/p)^j = 0 at p = 1: the correction layers drop out
    assert np.allclose(ansatz._layer_weights(1.0), 0.0)


def test_exact_projection_boundary_vanishing(disk):
    pts = np.array([[0.3, 0.2]])
    params = ansatz.make_params(disk, pts, [1], 1.5, 1e-6)
    ans = ansatz.build_ansatz(disk, pts, [1], params, exact_projection=True)
    for th in (0.5, 2.5):
        xb = 0.999999 * np.array([math.cos(th), math.sin(th)])
        assert abs(ans.u(xb)) < 5e-5 * params.gamma
