"""Signed point-vortex (Kirchhoff-Routh) functional and critical points.

For m interior points xi_1..xi_m with signs a_i in {-1, +1} the functional is

    phi_m(xi) = sum_i H(xi_i, xi_i) + sum_{i != k} a_i a_k G(xi_i, xi_k),

where G is the Dirichlet Green's function and H its regular part.  Critical
points of phi_m locate the concentration points of multi-bubble solutions;
mixed-sign patterns lead to saddles, so the search minimizes |grad phi_m|^2
with multistart and a decaying interior log-barrier, followed by a
barrier-free root polish.  A symmetry-constrained search along the x-axis
with alternating signs covers reflection-symmetric domains.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import NDArray
from scipy import linalg, optimize

from . import greens
from .greens import GreenBackend, OutsideDomainError

GRAD_TOL = 1e-8
DEDUPE_TOL = 1e-4
HESS_STEP = 1e-4
DEGENERACY_EPS = 1e-6


def _check_signs(signs: Sequence[float]) -> NDArray:
    a = np.asarray(signs, dtype=float)
    if a.ndim != 1 or a.size < 1 or not np.all(np.abs(a) == 1.0):
        raise ValueError("signs must be a nonempty vector of +1/-1 entries")
    return a


def boundary_distance(backend: GreenBackend, y) -> float:
    """Distance from an interior point to the domain boundary."""
    y = np.asarray(y, dtype=float)
    if backend.analytic:
        return backend.domain.radius - float(np.hypot(*y))
    _, dist = backend._project_to_boundary(y)
    return float(dist)


@dataclass(frozen=True)
class Configuration:
    """Admissible m-point configuration with separation scale d."""

    points: NDArray
    d: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "points", pts)
        if not self.d > 0.0:
            raise ValueError("separation d must be positive")

    def admissible(self, backend: GreenBackend) -> bool:
        pts = self.points
        for i, p in enumerate(pts):
            if boundary_distance(backend, p) < 4.0 * self.d:
                return False
            for q in pts[i + 1:]:
                if np.hypot(*(p - q)) < 4.0 * self.d:
                    return False
        return True


@dataclass
class CriticalReport:
    """One critical point of phi_m with its finite-difference diagnostics."""

    points: NDArray
    signs: NDArray
    value: float
    grad_norm: float
    hessian_eigenvalues: NDArray
    classification: str
    stable: bool
    degree_nonzero: bool

    def as_dict(self) -> dict:
        return {
            "points": self.points.tolist(),
            "signs": self.signs.tolist(),
            "value": self.value,
            "grad_norm": self.grad_norm,
            "hessian_eigenvalues": self.hessian_eigenvalues.tolist(),
            "classification": self.classification,
            "stable": self.stable,
            "degree_nonzero": self.degree_nonzero,
        }


# ----------------------------------------------------------------------------
# functional and gradient
# ----------------------------------------------------------------------------


def phi_m(backend: GreenBackend, points, signs) -> float:
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    a = _check_signs(signs)
    if pts.shape[0] != a.size:
        raise ValueError("points/signs size mismatch")
    total = 0.0
    for p in pts:
        total += greens.robin(backend, p)
    for i in range(a.size):
        for k in range(i + 1, a.size):
            total += 2.0 * a[i] * a[k] * greens.green(backend, pts[i], pts[k])
    return total


def grad_phi_m(backend: GreenBackend, points, signs) -> NDArray:
    """Gradient of phi_m as a flat vector of length 2m."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    a = _check_signs(signs)
    out = np.zeros_like(pts)
    for k in range(a.size):
        gk = greens.grad_robin(backend, pts[k])
        for i in range(a.size):
            if i == k:
                continue
            gk = gk + 2.0 * a[i] * a[k] * greens.grad_green(
                backend, pts[k], pts[i])
        out[k] = gk
    return out.ravel()


# ----------------------------------------------------------------------------
# search
# ----------------------------------------------------------------------------


def _sample_starts(backend: GreenBackend, m: int, count: int,
                   rng: np.random.Generator) -> list[NDArray]:
    nodes = backend.boundary_nodes
    lo = nodes.min(axis=0)
    hi = nodes.max(axis=0)
    clearance = 0.08 * backend.diameter
    sep = 0.08 * backend.diameter
    starts = []
    attempts = 0
    while len(starts) < count and attempts < 200 * count:
        attempts += 1
        pts = rng.uniform(lo, hi, size=(m, 2))
        ok = all(backend.contains(p, tol=clearance) for p in pts)
        if ok and m > 1:
            dmin = min(np.hypot(*(pts[i] - pts[j]))
                       for i in range(m) for j in range(i + 1, m))
            ok = dmin >= sep
        if ok:
            starts.append(pts)
    return starts


def _grad_sq(backend, flat, signs, kappa):
    pts = flat.reshape(-1, 2)
    try:
        g = grad_phi_m(backend, pts, signs)
    except OutsideDomainError:
        return 1e12
    val = float(g @ g)
    if kappa > 0.0:
        for p in pts:
            dist = boundary_distance(backend, p)
            if dist <= 0.0:
                return 1e12
            val -= kappa * np.log(dist)
    return val


def _gauge_rotation(backend: GreenBackend, pts: NDArray) -> NDArray:
    """On the disk, rotate so the first point sits on the positive x-axis."""
    if not backend.analytic:
        return pts
    r = np.hypot(*pts[0])
    if r < 1e-9:
        return pts
    c, s = pts[0, 0] / r, pts[0, 1] / r
    rot = np.array([[c, s], [-s, c]])
    return pts @ rot.T


def _hessian_fd(backend, pts, signs, step=HESS_STEP) -> NDArray:
    n = pts.size
    flat = pts.ravel()
    h = np.zeros((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = step
        gp = grad_phi_m(backend, (flat + e).reshape(-1, 2), signs)
        gm = grad_phi_m(backend, (flat - e).reshape(-1, 2), signs)
        h[:, j] = (gp - gm) / (2.0 * step)
    return 0.5 * (h + h.T)


def _classify(backend, pts, signs) -> tuple[NDArray, str, bool]:
    h = _hessian_fd(backend, pts, signs)
    eigvals = np.linalg.eigvalsh(h)
    if backend.analytic:
        # quotient the rotation family: project out its generator
        gen = np.column_stack([-pts[:, 1], pts[:, 0]]).ravel()
        norm = np.linalg.norm(gen)
        if norm > 1e-8:
            basis = linalg.null_space(gen[None, :] / norm)
            eigvals = np.linalg.eigvalsh(basis.T @ h @ basis)
    theta = DEGENERACY_EPS
    if np.all(eigvals > theta):
        cls = "min"
    elif np.all(eigvals < -theta):
        cls = "max"
    elif np.all(np.abs(eigvals) > theta):
        cls = "saddle"
    else:
        cls = "degenerate"
    degree = _degree_heuristic(backend, pts, signs)
    stable = cls in ("max", "min") or degree
    return eigvals, cls, stable


def _degree_heuristic(backend, pts, signs, radius: float = 1e-3) -> bool:
    """Sign count of the gradient on a small sphere; heuristic degree test."""
    n = pts.size
    rng = np.random.default_rng(12345)
    dirs = rng.standard_normal((32 * n, n))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    sgn = []
    for u in dirs:
        try:
            g = grad_phi_m(backend, (pts.ravel() + radius * u).reshape(-1, 2),
                           signs)
        except OutsideDomainError:
            return False
        sgn.append(np.sign(float(u @ g)))
    sgn = np.asarray(sgn)
    return bool(np.all(sgn > 0) or np.all(sgn < 0))


def _make_report(backend, pts, signs, gauge: bool = True) -> CriticalReport:
    if gauge:
        pts = _gauge_rotation(backend, pts)
    g = grad_phi_m(backend, pts, signs)
    eigvals, cls, stable = _classify(backend, pts, signs)
    return CriticalReport(points=pts, signs=np.asarray(signs, float),
                          value=phi_m(backend, pts, signs),
                          grad_norm=float(np.linalg.norm(g)),
                          hessian_eigenvalues=eigvals,
                          classification=cls, stable=stable,
                          degree_nonzero=_degree_heuristic(backend, pts, signs))


def _duplicate(a: CriticalReport, b: CriticalReport) -> bool:
    if a.points.shape != b.points.shape:
        return False
    # compare up to permutations that preserve the sign pattern
    m = a.points.shape[0]
    used = set()
    for i in range(m):
        best = None
        for j in range(m):
            if j in used or a.signs[i] != b.signs[j]:
                continue
            dij = np.hypot(*(a.points[i] - b.points[j]))
            if best is None or dij < best[0]:
                best = (dij, j)
        if best is None or best[0] > DEDUPE_TOL:
            return False
        used.add(best[1])
    return True


def find_critical(backend: GreenBackend, signs, starts: int = 64,
                  seed: int = 7, max_iter: int = 200) -> list[CriticalReport]:
    """Multistart search for critical points of phi_m.

    Minimizes |grad phi_m|^2 with a decaying interior log-barrier, then
    polishes barrier-free with a gradient root solve.  Results are deduped
    and gauged (first point on the positive x-axis for the disk).
    """
    a = _check_signs(signs)
    m = a.size
    rng = np.random.default_rng(seed)
    reports: list[CriticalReport] = []
    clearance = 1.5e-3 * backend.diameter
    for start in _sample_starts(backend, m, starts, rng):
        flat = start.ravel()
        for kappa in (1e-4, 1e-6, 0.0):
            res = optimize.minimize(
                lambda v: _grad_sq(backend, v, a, kappa), flat,
                method="Nelder-Mead" if m == 1 else "BFGS",
                options={"maxiter": max_iter})
            flat = res.x
        try:
            sol = optimize.root(
                lambda v: grad_phi_m(backend, v.reshape(-1, 2), a), flat,
                method="hybr", options={"xtol": 1e-13})
        except OutsideDomainError:
            continue
        if not sol.success:
            continue
        pts = sol.x.reshape(-1, 2)
        try:
            ok = all(backend.contains(p, tol=clearance) for p in pts)
            if m > 1:
                dmin = min(np.hypot(*(pts[i] - pts[j]))
                           for i in range(m) for j in range(i + 1, m))
                ok = ok and dmin > 10.0 * clearance
            if not ok:
                continue
            g = grad_phi_m(backend, pts, a)
            if np.linalg.norm(g) > GRAD_TOL:
                continue
            rep = _make_report(backend, pts, a)
        except OutsideDomainError:
            continue
        if not any(_duplicate(rep, r) for r in reports):
            reports.append(rep)
    reports.sort(key=lambda r: r.value)
    return reports


def find_critical_on_axis(backend: GreenBackend, m: int) -> CriticalReport:
    """Critical point with ordered points on the x-axis, alternating signs.

    Requires the domain to be symmetric under (x, y) -> (x, -y); the
    criticality of the restricted configuration is verified afterwards in
    the full 2m-dimensional gradient.
    """
    nodes = backend.boundary_nodes
    mirrored = nodes * np.array([1.0, -1.0])
    d2 = ((mirrored[:, None, 0] - nodes[None, :, 0]) ** 2
          + (mirrored[:, None, 1] - nodes[None, :, 1]) ** 2)
    if np.sqrt(d2.min(axis=1)).max() > 1e-8 * backend.diameter:
        raise ValueError("domain is not symmetric about the x-axis")

    a = np.array([(-1.0) ** i for i in range(m)])  # a_i = (-1)^{i+1}, i from 1
    xs = nodes[:, 0]
    lo, hi = xs.min(), xs.max()
    span = hi - lo

    def axis_grad(t):
        pts = np.column_stack([t, np.zeros(m)])
        return grad_phi_m(backend, pts, a).reshape(-1, 2)[:, 0]

    # coarse scan over ordered tuples, then a gradient root solve
    best = None
    rng = np.random.default_rng(11)
    for _ in range(200):
        t = np.sort(rng.uniform(lo + 0.1 * span, hi - 0.1 * span, m))
        if m > 1 and np.min(np.diff(t)) < 0.05 * span:
            continue
        try:
            g = axis_grad(t)
        except OutsideDomainError:
            continue
        score = float(g @ g)
        if best is None or score < best[0]:
            best = (score, t)
    if best is None:
        raise RuntimeError("axis search found no admissible configuration")
    sol = optimize.root(lambda t: axis_grad(t), best[1], method="hybr",
                        options={"xtol": 1e-13})
    t = np.sort(sol.x)
    if m > 1 and np.min(np.diff(t)) < 1e-6 * span:
        raise RuntimeError("axis points collapsed during the search")
    pts = np.column_stack([t, np.zeros(m)])
    g_full = grad_phi_m(backend, pts, a)
    if np.linalg.norm(g_full) > GRAD_TOL:
        raise RuntimeError("restricted critical point fails the full "
                           f"gradient check: |g| = {np.linalg.norm(g_full):.3e}")
    return _make_report(backend, pts, a, gauge=False)
