import math

import numpy as np
import pytest

from bubblekit import ansatz, energy

T_STAR = math.sqrt(math.sqrt(5.0) - 2.0)


def _centered(disk, p, lam, signs=(1,), pts=None):
    if pts is None:
        pts = np.zeros((len(signs), 2))
    pts = np.asarray(pts, dtype=float)
    params = ansatz.make_params(disk, pts, list(signs), p, lam)
    return ansatz.build_ansatz(disk, pts, list(signs), params), params


def test_domain_area(disk, ellipse_nystrom):
    assert abs(energy.domain_area(disk) - math.pi) < 1e-12
    assert abs(energy.domain_area(ellipse_nystrom)
               - math.pi * 1.2 * 0.8) < 1e-3


def test_moments_match_closed_forms():
    for p, mu in ((0.5, 1.0), (1.5, 0.7), (1.5, 1.0)):
        m = energy.energy_moments(p, mu)
        for name in ("b1", "pa1_p1b1", "a1b1_b1", "a2_a1b1", "b2_half_b1sq"):
            quad, closed = getattr(m, name)
            assert abs(quad - closed) < max(1e-6, 1e-6 * abs(closed)), name


def test_moments_rejected_at_p_one():
    with pytest.raises(ValueError):
        energy.energy_moments(1.0, 1.0)


def test_j_lambda_matches_expansion_at_p_one(disk):
    # at p = 1 the closed two-term expansion is exact up to quadrature error
    ans, params = _centered(disk, 1.0, 1e-8)
    rep = energy.j_lambda(ans)
    assert rep.j_lambda != 0.0
    assert abs(rep.discrepancy) < 1e-6 * abs(rep.j_lambda)
    assert rep.gamma == params.gamma


def test_discrepancy_scaled_flat_p_one(disk):
    # the scaled discrepancy gamma^{2(p-1)} p^2 |J - F| |log eps| stays
    # bounded along the sweep (here p = 1 so the prefactor is 1)
    vals = []
    for lam in (1e-6, 1e-8):
        ans, params = _centered(disk, 1.0, lam)
        rep = energy.j_lambda(ans)
        vals.append(abs(rep.discrepancy) * abs(math.log(params.eps)))
    assert max(vals) < 4.0 * max(min(vals), 1e-4)


def test_beta_is_4pi_m_at_p_one(disk):
    ans, _ = _centered(disk, 1.0, 1e-8)
    b = energy.beta_lambda(ans)
    assert abs(b.beta_direct - 4.0 * math.pi) < 1e-8
    assert abs(b.beta_formula - 4.0 * math.pi) < 1e-12
    assert b.m == 1


def test_beta_deviation_sign_and_size(disk):
    # first correction to beta is 4 (p-1)/p^2 in units gamma^{-2p} 4 pi m:
    # positive for p > 1, negative for p < 1
    ans, _ = _centered(disk, 1.5, 1e-8)
    b = energy.beta_lambda(ans)
    scaled = b.deviation * b.gamma ** 3.0 / (4.0 * math.pi)
    target = 4.0 * 0.5 / 1.5 ** 2
    assert scaled > 0.0
    assert abs(scaled - target) < 0.1 * abs(target)


def test_beta_two_bubbles(disk):
    pts = np.array([[T_STAR, 0.0], [-T_STAR, 0.0]])
    ans, _ = _centered(disk, 1.0, 1e-8, signs=(1, -1), pts=pts)
    b = energy.beta_lambda(ans)
    assert b.m == 2
    assert abs(b.beta_direct - 8.0 * math.pi) < 1e-7
    assert abs(b.beta_formula - 8.0 * math.pi) < 1e-12


def test_f_expansion_dominant_term(disk):
    # F ~ (4 pi / (p^2 gamma^{2(p-1)})) * m * 4 |log eps| to leading order
    ans, params = _centered(disk, 1.0, 1e-10)
    rep = energy.j_lambda(ans)
    lead = 4.0 * math.pi * 4.0 * abs(math.log(params.eps))
    assert abs(rep.f_expansion - lead) < 0.25 * lead
