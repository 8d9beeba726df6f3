import math

import numpy as np
import pytest
from scipy import integrate

from bubblekit import special_integrals as si


def test_zeta_constants_match_references():
    # independent references: Apery's constant and pi^4/90
    assert abs(si.ZETA3 - 1.2020569031595943) < 1e-9
    assert abs(si.ZETA4 - math.pi ** 4 / 90.0) < 1e-9


def test_theta0_dilog_matches_quadrature():
    for t in (0.25, 1.0, 3.0, 10.0):
        assert abs(si.theta0(t) - si.theta0_quad(t)) < 1e-9


def test_theta0_at_one_pinned():
    # theta0(1) itself, and the split into theta0(0) minus the finite piece
    assert abs(si.theta0(1.0) - 1.0626935) < 1e-6
    piece, _ = integrate.quad(
        lambda s: 2.0 * math.log(1.0 + s * s) / (s * (1.0 + s * s)),
        0.0, 1.0, epsabs=1e-12)
    assert abs(piece - 0.582241) < 1e-6
    assert abs((si.theta0(0.0) - piece) - si.theta0(1.0)) < 1e-9


def test_theta0_limits():
    assert abs(si.theta0(0.0) - math.pi ** 2 / 6.0) < 1e-12
    assert abs(si.theta0(1e8)) < 1e-6


def test_bubble_moment_of_one_is_total_mass():
    # int_R2 e^{omega_mu} = 8 pi independently of mu
    assert abs(si.bubble_moment(lambda t: 1.0) - 8.0 * math.pi) < 1e-9


def test_bubble_moment_eta_powers():
    # int k0 eta0^k dt = 4 k! with k0 = 8t/(1+t^2)^2, so the 2 pi angular
    # factor gives 8 pi k!
    for k, fact in ((1, 1.0), (2, 2.0), (3, 6.0)):
        got = si.bubble_moment(lambda t, k=k: si.eta0(t) ** k)
        assert abs(got - 8.0 * math.pi * fact) < 1e-8


def test_omega_tilde_shift_identity():
    # omega_tilde differs from omega_mu(mu t) by the additive constant
    # 4 log(mu t ...); spot-check the closed rearrangement
    mu, t = 1.7, 2.3
    expect = math.log(8.0 * mu * mu) - 2.0 * math.log(mu * mu * (1 + t * t))
    assert abs(si.omega_tilde(mu, t) - expect) < 1e-12


def test_d1_closed_value():
    assert abs(si.d1_closed(1.0) - (4.0 * si.LOG8 - 8.0)) < 1e-14
    assert abs(si.d1_closed(2.0) - (4.0 * si.LOG8 - 8.0 - 8.0 * math.log(2.0))) < 1e-14


def test_scalar_catalog_passes():
    records = si.verify_catalog("table*")
    assert len(records) >= 26
    for rec in records:
        assert rec.passed, f"{rec.name}: abs_err={rec.abs_err:.3e}"


def test_grouped_catalog_passes():
    records = si.verify_catalog("A.*")
    assert records
    for rec in records:
        assert rec.passed, f"{rec.name}: abs_err={rec.abs_err:.3e}"


def test_invariant_combination_is_four():
    records = si.verify_catalog("B.6*")
    assert len(records) >= 9
    for rec in records:
        assert rec.closed_value == 4.0
        assert rec.passed, f"{rec.name}: abs_err={rec.abs_err:.3e}"


def test_filter_selects_subset():
    assert len(si.verify_catalog("B.1*")) < len(si.verify_catalog())


def test_improper_quad_known_integral():
    val, err = si.improper_quad(lambda t: 8.0 * t / (1.0 + t * t) ** 2)
    assert abs(val - 4.0) < 1e-10
    assert err < 1e-8
