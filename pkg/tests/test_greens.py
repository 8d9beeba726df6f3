import math

import numpy as np
import pytest

from bubblekit import greens


def test_disk_robin_closed_form(disk):
    # H(y, y) = (1/2 pi) log((rho^2 - |y|^2)/rho)
    y = np.array([0.3, 0.4])
    expect = math.log(1.0 - 0.25) / (2.0 * math.pi)
    assert abs(greens.robin(disk, y) - expect) < 1e-14
    assert abs(greens.robin(disk, np.zeros(2))) < 1e-14


def test_disk_green_symmetry(disk):
    x = np.array([0.2, -0.5])
    y = np.array([-0.1, 0.3])
    assert abs(greens.green(disk, x, y) - greens.green(disk, y, x)) < 1e-14


def test_disk_green_positive_inside(disk):
    rng = np.random.default_rng(11)
    for _ in range(20):
        x = 0.9 * (rng.random(2) - 0.5)
        y = 0.9 * (rng.random(2) - 0.5)
        if np.hypot(*(x - y)) < 1e-3:
            continue
        assert greens.green(disk, x, y) > 0.0


def test_green_vanishes_on_boundary(disk, circle_nystrom):
    y = np.array([0.25, -0.35])
    for th in (0.3, 2.0, 4.4):
        xb = np.array([math.cos(th), math.sin(th)])
        assert abs(greens.green(disk, xb, y)) < 1e-12
        assert abs(greens.green(circle_nystrom, xb, y)) < 1e-8


def test_outside_and_coincident_rejected(disk):
    with pytest.raises(greens.OutsideDomainError):
        greens.green(disk, np.array([2.0, 0.0]), np.zeros(2))
    with pytest.raises(greens.OutsideDomainError):
        greens.green(disk, np.zeros(2), np.array([0.0, 1.5]))
    with pytest.raises(greens.CoincidentPointsError):
        greens.green(disk, np.array([0.1, 0.1]), np.array([0.1, 0.1]))


def test_nystrom_matches_disk_robin(disk, circle_nystrom):
    rng = np.random.default_rng(5)
    for _ in range(25):
        y = 0.8 * (rng.random(2) * 2.0 - 1.0)
        if np.hypot(*y) > 0.8:
            continue
        assert abs(greens.robin(circle_nystrom, y)
                   - greens.robin(disk, y)) < 1e-6


def test_nystrom_matches_disk_green(disk, circle_nystrom):
    x = np.array([0.15, 0.4])
    y = np.array([-0.5, 0.1])
    assert abs(greens.green(circle_nystrom, x, y)
               - greens.green(disk, x, y)) < 1e-8


def test_grad_green_matches_finite_differences(disk):
    x = np.array([0.3, -0.2])
    y = np.array([-0.25, 0.15])
    g = greens.grad_green(disk, x, y)
    h = 1e-6
    for k in range(2):
        e = np.zeros(2)
        e[k] = h
        fd = (greens.green(disk, x + e, y) - greens.green(disk, x - e, y)) \
            / (2.0 * h)
        assert abs(g[k] - fd) < 1e-8


def test_grad_robin_matches_finite_differences(disk, ellipse_nystrom):
    y = np.array([0.2, 0.1])
    h = 1e-6
    for backend, tol in ((disk, 1e-8), (ellipse_nystrom, 1e-5)):
        g = greens.grad_robin(backend, y)
        for k in range(2):
            e = np.zeros(2)
            e[k] = h
            fd = (greens.robin(backend, y + e)
                  - greens.robin(backend, y - e)) / (2.0 * h)
            assert abs(g[k] - fd) < tol


def test_harmonic_extension_reproduces_trace(ellipse_nystrom):
    ext = greens.harmonic_extension(ellipse_nystrom,
                                    lambda xb: xb[0] ** 2 - xb[1] ** 2)
    # x^2 - y^2 is harmonic, so the extension is the function itself
    for pt in (np.array([0.3, 0.2]), np.array([-0.6, 0.1])):
        assert abs(ext(pt) - (pt[0] ** 2 - pt[1] ** 2)) < 1e-8


def test_domain_validation():
    with pytest.raises(ValueError):
        greens.DomainSpec.unit_disk(radius=-1.0)
    theta = 2.0 * np.pi * np.arange(128) / 128
    # figure-eight curve is not simple
    nodes = np.column_stack([np.sin(2 * theta), np.sin(theta)])
    with pytest.raises(ValueError):
        greens.DomainSpec.parametric(nodes)


def test_domain_from_json_dict():
    spec = greens.DomainSpec.from_json({"kind": "unit_disk", "radius": 2.0})
    assert spec.radius == 2.0
