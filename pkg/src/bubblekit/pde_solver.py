"""Damped Newton solver for -Delta u = lambda u|u|^{p-2} e^{|u|^p} on the disk.

The discretization is a polar grid graded in radius through a sinh map, so
that nodes cluster at the concentration scale of the seed. The radial part
of the Laplacian is differenced conservatively in the mapped coordinate,
which keeps second-order accuracy on the graded mesh; the pole is a single
extra unknown closed by the mean-value form of the Laplacian at the origin.
Newton iterations use a sparse LU of the Jacobian and a halving line search
on the residual max norm. Nodal structure (sign components and whether the
discrete zero set reaches the boundary layer) is read off the grid graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.typing import NDArray
from scipy import ndimage, optimize, sparse
from scipy.sparse.linalg import splu


class OverflowGuardError(RuntimeError):
    """Nonlinear term would exceed exp(700); carries the offending value."""


class StagnationError(RuntimeError):
    """Line search hit the damping floor without residual decrease."""


@dataclass(frozen=True)
class Grid2D:
    """Polar grid on a disk, sinh-graded in radius.

    Radial nodes r[0]=0 (pole) .. r[n_r]=radius (boundary). Interior
    unknowns live at r[1..n_r-1] x n_theta angles, plus one pole unknown.
    """

    radius: float
    n_r: int
    n_theta: int
    grading: float

    def __post_init__(self):
        if self.n_r < 8 or self.n_theta < 8:
            raise ValueError("grid too coarse")
        if self.grading <= 0.0:
            raise ValueError("grading parameter must be positive")

    @classmethod
    def disk(cls, radius: float = 1.0, n_r: int = 512, n_theta: int = 256,
             cluster: float | None = None) -> "Grid2D":
        """Grid with about a quarter of the radial nodes inside `cluster`."""
        if cluster is None:
            cluster = 0.05 * radius
        cluster = min(max(cluster, 1e-8 * radius), 0.5 * radius)

        def frac_inside(a):
            return math.asinh(cluster / radius * math.sinh(a)) / a - 0.25

        if frac_inside(1e-3) * frac_inside(40.0) < 0:
            a = optimize.brentq(frac_inside, 1e-3, 40.0)
        else:
            a = 1.0
        return cls(radius=radius, n_r=n_r, n_theta=n_theta, grading=a)

    @cached_property
    def s_nodes(self) -> NDArray:
        return np.linspace(0.0, 1.0, self.n_r + 1)

    @cached_property
    def r_nodes(self) -> NDArray:
        a = self.grading
        return self.radius * np.sinh(a * self.s_nodes) / math.sinh(a)

    @cached_property
    def theta_nodes(self) -> NDArray:
        return 2.0 * math.pi * np.arange(self.n_theta) / self.n_theta

    @property
    def n_unknowns(self) -> int:
        return (self.n_r - 1) * self.n_theta + 1

    def interior_xy(self) -> NDArray:
        """Physical coordinates of the ring unknowns, shape (n_r-1, n_theta, 2)."""
        r = self.r_nodes[1:-1]
        th = self.theta_nodes
        return np.stack([r[:, None] * np.cos(th)[None, :],
                         r[:, None] * np.sin(th)[None, :]], axis=-1)

    @cached_property
    def laplacian(self) -> sparse.csr_matrix:
        """Discrete Laplacian on the unknown vector (rings then pole)."""
        a, big_r = self.grading, self.radius
        n_r, n_t = self.n_r, self.n_theta
        hs = 1.0 / n_r
        ht = 2.0 * math.pi / n_t
        s = self.s_nodes
        r = self.r_nodes
        r_s = big_r * a * np.cosh(a * s) / math.sinh(a)
        s_half = s[:-1] + 0.5 * hs
        g_half = (big_r * np.sinh(a * s_half) / math.sinh(a)) \
            / (big_r * a * np.cosh(a * s_half) / math.sinh(a))

        rows, cols, vals = [], [], []
        pole = self.n_unknowns - 1

        def idx(i, j):
            return (i - 1) * n_t + (j % n_t)

        for i in range(1, n_r):
            denom = hs * hs * r[i] * r_s[i]
            c_minus = g_half[i - 1] / denom
            c_plus = g_half[i] / denom
            c_ang = 1.0 / (ht * ht * r[i] * r[i])
            for j in range(n_t):
                k = idx(i, j)
                rows += [k, k, k]
                cols += [k, idx(i, j - 1), idx(i, j + 1)]
                vals += [-(c_minus + c_plus) - 2.0 * c_ang, c_ang, c_ang]
                if i > 1:
                    rows.append(k)
                    cols.append(idx(i - 1, j))
                    vals.append(c_minus)
                else:
                    rows.append(k)
                    cols.append(pole)
                    vals.append(c_minus)
                if i < n_r - 1:
                    rows.append(k)
                    cols.append(idx(i + 1, j))
                    vals.append(c_plus)
        c_pole = 4.0 / (r[1] * r[1])
        for j in range(n_t):
            rows.append(pole)
            cols.append(idx(1, j))
            vals.append(c_pole / n_t)
        rows.append(pole)
        cols.append(pole)
        vals.append(-c_pole)
        n = self.n_unknowns
        return sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))


@dataclass
class Field2D:
    """Values at the interior unknowns of a Grid2D; boundary is exactly 0."""

    grid: Grid2D
    values: NDArray
    pole: float

    def __post_init__(self):
        expect = (self.grid.n_r - 1, self.grid.n_theta)
        if self.values.shape != expect:
            raise ValueError(f"values must have shape {expect}")
        if not (np.all(np.isfinite(self.values)) and np.isfinite(self.pole)):
            raise ValueError("field contains non-finite values")

    @classmethod
    def zeros(cls, grid: Grid2D) -> "Field2D":
        return cls(grid, np.zeros((grid.n_r - 1, grid.n_theta)), 0.0)

    @classmethod
    def from_function(cls, grid: Grid2D, fn) -> "Field2D":
        xy = grid.interior_xy()
        vals = np.empty((grid.n_r - 1, grid.n_theta))
        for i in range(grid.n_r - 1):
            for j in range(grid.n_theta):
                vals[i, j] = fn(xy[i, j])
        return cls(grid, vals, float(fn(np.zeros(2))))

    def to_flat(self) -> NDArray:
        return np.concatenate([self.values.ravel(), [self.pole]])

    @classmethod
    def from_flat(cls, grid: Grid2D, flat: NDArray) -> "Field2D":
        vals = flat[:-1].reshape(grid.n_r - 1, grid.n_theta)
        return cls(grid, vals.copy(), float(flat[-1]))

    def max_abs(self) -> float:
        return max(float(np.max(np.abs(self.values))), abs(self.pole))


@dataclass
class NewtonConfig:
    # Residuals are measured in the row-scaled max norm (see row_scales);
    # its roundoff floor is ~1e-13, so 1e-9 leaves quadratic Newton two
    # clean digits of slack. The scaled norm damps smooth error modes, so
    # convergence additionally requires the Newton step itself to be small.
    max_iter: int = 25
    tol: float = 1e-9
    step_tol: float = 1e-9
    damping_floor: float = 1e-4
    floor_fraction: float = 1e-8


@dataclass
class SolveReport:
    converged: bool
    iterations: int
    residual_max: float
    residual_l2: float
    damping_history: list[float] = field(default_factory=list)
    lambda_path: list[float] = field(default_factory=list)
    nodal_components: int | None = None
    nodal_boundary_touching: bool | None = None
    message: str = ""

    def as_dict(self) -> dict:
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "residual_max": self.residual_max,
            "residual_l2": self.residual_l2,
            "damping_history": list(self.damping_history),
            "lambda_path": list(self.lambda_path),
            "nodal_components": self.nodal_components,
            "nodal_boundary_touching": self.nodal_boundary_touching,
            "message": self.message,
        }


# ----------------------------------------------------------------------------
# nonlinearity, residual, Jacobian
# ----------------------------------------------------------------------------


def _w_of_u(u: NDArray, p: float) -> NDArray:
    """u |u|^{p-2} e^{|u|^p}, assembled in log space with an overflow guard."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    nz = u != 0.0
    if np.any(nz):
        log_abs = np.log(np.abs(u[nz]))
        expo = (p - 1.0) * log_abs + np.exp(p * log_abs)
        if np.max(expo) > 700.0:
            k = int(np.argmax(expo))
            raise OverflowGuardError(
                f"nonlinear term overflows: |u|={abs(u[nz][k]):.6g}, "
                f"exponent={float(np.max(expo)):.6g} > 700")
        out[nz] = np.sign(u[nz]) * np.exp(expo)
    return out


def _w_prime(u: NDArray, p: float, floor_fraction: float) -> NDArray:
    """d/du of u|u|^{p-2}e^{|u|^p} with the |u| floor near sign changes."""
    u = np.asarray(u, dtype=float)
    u_min = floor_fraction * max(float(np.max(np.abs(u))), 1e-300)
    au = np.maximum(np.abs(u), u_min)
    expo = (p - 1.0) * np.log(au) + au ** p
    if np.max(expo) > 700.0:
        raise OverflowGuardError("Jacobian weight overflows exp(700)")
    return np.exp(expo) / au * ((p - 1.0) + p * au ** p)


def nonlinear_residual(u: Field2D, p: float, lam: float) -> Field2D:
    """Delta_h u + lambda u|u|^{p-2}e^{|u|^p} at the interior unknowns."""
    flat = u.to_flat()
    res = u.grid.laplacian @ flat + lam * _w_of_u(flat, p)
    return Field2D.from_flat(u.grid, res)


def row_scales(grid: Grid2D) -> NDArray:
    """Absolute row sums of the Laplacian, used to normalize residuals.

    Graded grids carry stencil coefficients spanning many orders of
    magnitude between the pole and the boundary; the max norm is only
    meaningful after dividing each row by its own scale.
    """
    s = np.asarray(np.abs(grid.laplacian).sum(axis=1)).ravel()
    return np.maximum(s, 1.0)


def scaled_residual_norm(u: Field2D, p: float, lam: float) -> float:
    """Row-normalized max norm of the nonlinear residual."""
    r = nonlinear_residual(u, p, lam).to_flat()
    return float(np.max(np.abs(r) / row_scales(u.grid)))


def newton_solve(seed: Field2D, p: float, lam: float,
                 config: NewtonConfig | None = None
                 ) -> tuple[Field2D, SolveReport]:
    """Damped Newton for Delta_h u + lambda w(u) = 0 from the given seed."""
    cfg = config or NewtonConfig()
    grid = seed.grid
    lap = grid.laplacian
    rs = row_scales(grid)
    x = seed.to_flat()
    damping: list[float] = []

    def res_vec(v):
        return lap @ v + lam * _w_of_u(v, p)

    def res_norm(r):
        return float(np.max(np.abs(r) / rs))

    r = res_vec(x)
    scale = max(1.0, lam * float(np.max(np.abs(_w_of_u(x, p)) / rs)))
    for it in range(1, cfg.max_iter + 1):
        rmax = res_norm(r)
        jac = lap + lam * sparse.diags(_w_prime(x, p, cfg.floor_fraction))
        try:
            lu = splu(jac.tocsc())
        except RuntimeError as exc:
            return Field2D.from_flat(grid, x), SolveReport(
                converged=False, iterations=it - 1, residual_max=rmax,
                residual_l2=float(np.linalg.norm(r / rs)),
                damping_history=damping, lambda_path=[lam],
                message=f"Jacobian factorization failed: {exc}")
        step = lu.solve(-r)
        if not np.all(np.isfinite(step)):
            return Field2D.from_flat(grid, x), SolveReport(
                converged=False, iterations=it - 1, residual_max=rmax,
                residual_l2=float(np.linalg.norm(r / rs)),
                damping_history=damping, lambda_path=[lam],
                message="singular Jacobian (non-finite Newton step)")
        if (rmax <= cfg.tol * scale
                and float(np.max(np.abs(step)))
                <= cfg.step_tol * max(1.0, float(np.max(np.abs(x))))):
            x = x + step
            r = res_vec(x)
            return Field2D.from_flat(grid, x), SolveReport(
                converged=True, iterations=it, residual_max=res_norm(r),
                residual_l2=float(np.linalg.norm(r / rs)),
                damping_history=damping, lambda_path=[lam])
        t = 1.0
        while t >= cfg.damping_floor:
            try:
                r_new = res_vec(x + t * step)
                if res_norm(r_new) < rmax:
                    break
            except OverflowGuardError:
                pass
            t *= 0.5
        else:
            return Field2D.from_flat(grid, x), SolveReport(
                converged=False, iterations=it, residual_max=rmax,
                residual_l2=float(np.linalg.norm(r / rs)),
                damping_history=damping, lambda_path=[lam],
                message="stagnation: damping floor reached")
        x = x + t * step
        r = r_new
        damping.append(t)
        scale = max(1.0, lam * float(np.max(np.abs(_w_of_u(x, p)) / rs)))
    rmax = res_norm(r)
    return Field2D.from_flat(grid, x), SolveReport(
        converged=False, iterations=cfg.max_iter, residual_max=rmax,
        residual_l2=float(np.linalg.norm(r / rs)), damping_history=damping,
        lambda_path=[lam], message="max iterations reached")


def continuation_solve(grid: Grid2D, backend, points: NDArray, signs,
                       lam: float, p_start: float, p_target: float,
                       n_steps: int = 5,
                       config: NewtonConfig | None = None
                       ) -> tuple[Field2D, SolveReport]:
    """Walk p at fixed lambda, re-seeding each step with the fresh ansatz.

    The concentration scale eps(p, lambda) moves by orders of magnitude
    along the walk, so the previous iterate alone is a useless seed; what
    transfers is its correction relative to the ansatz at the previous p,
    added on top of the re-built ansatz. The grid must resolve the finest
    eps on the path. Reports are trend-only evidence: the deep asymptotic
    regime is out of numerical reach and is never claimed.
    """
    from .ansatz import build_ansatz, make_params

    corr = np.zeros(grid.n_unknowns)
    path = []
    u = rep = None
    for p in np.linspace(p_start, p_target, n_steps + 1):
        params = make_params(backend, points, signs, float(p), lam)
        base = ansatz_seed(grid, build_ansatz(
            backend, points, signs, params, exact_projection=True)).to_flat()
        seed = Field2D.from_flat(grid, base + corr)
        u, rep = newton_solve(seed, float(p), lam, config)
        path.append(lam)
        if not rep.converged:
            rep.message = f"continuation stalled at p={p:.4f}: {rep.message}"
            rep.lambda_path = path
            return u, rep
        corr = u.to_flat() - base
    rep.lambda_path = path
    return u, rep


# ----------------------------------------------------------------------------
# nodal structure and boundary flux
# ----------------------------------------------------------------------------


def _count_components(mask: NDArray, pole_in: bool) -> int:
    """Connected components on the polar grid graph, periodic in theta."""
    labels, n = ndimage.label(mask)
    if n == 0:
        return 0
    parent = list(range(n + 1))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i, j):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj

    for i in range(mask.shape[0]):
        a, b = labels[i, 0], labels[i, -1]
        if a > 0 and b > 0:
            union(int(a), int(b))
    if pole_in:
        ring = [int(v) for v in labels[0] if v > 0]
        for a in ring[1:]:
            union(ring[0], a)
    roots = {find(int(v)) for v in np.unique(labels) if v > 0}
    if pole_in and not np.any(labels[0] > 0):
        return len(roots) + 1
    return len(roots)


def nodal_analysis(u: Field2D) -> dict:
    """Sign components of {u != 0} and boundary contact of the zero set."""
    vals = u.values
    if not np.any(vals) and u.pole == 0.0:
        raise ValueError("all-zero field has no nodal structure")
    n_pos = _count_components(vals > 0, u.pole > 0)
    n_neg = _count_components(vals < 0, u.pole < 0)
    outer = vals[-1]
    signs = np.sign(outer)
    touching = bool(np.any(signs * np.roll(signs, -1) <= 0))
    return {"components": n_pos + n_neg, "boundary_touching": touching,
            "positive_components": n_pos, "negative_components": n_neg}


def boundary_flux(backend, points: NDArray, signs, n_samples: int = 512
                  ) -> dict:
    """Sum_i a_i dG/dnu(x_b, xi_i) on the boundary and its line integral."""
    points = np.asarray(points, dtype=float)
    signs = np.asarray(signs, dtype=float)
    if backend.analytic:
        rho = backend.domain.radius
        th = 2.0 * math.pi * np.arange(n_samples) / n_samples
        xb = rho * np.stack([np.cos(th), np.sin(th)], axis=-1)
        vals = np.zeros(n_samples)
        for a_i, y in zip(signs, points):
            d2 = np.sum((xb - y[None, :]) ** 2, axis=1)
            vals += a_i * (-(rho * rho - float(y @ y))
                           / (2.0 * math.pi * rho * d2))
        ds = 2.0 * math.pi * rho / n_samples
        return {"values": vals, "arclength_weights": np.full(n_samples, ds),
                "integral": float(np.sum(vals) * ds),
                "sign_change": bool(np.min(vals) < 0.0 < np.max(vals))}
    nodes = backend.boundary_nodes
    normals = backend._normal
    weights = backend._weights
    delta = 1e-5 * backend.diameter
    from . import greens as _greens
    vals = np.zeros(len(nodes))
    for a_i, y in zip(signs, points):
        for k, (xb, nu) in enumerate(zip(nodes, normals)):
            g1 = _greens.green(backend, xb - delta * nu, y)
            g2 = _greens.green(backend, xb - 2.0 * delta * nu, y)
            vals[k] += a_i * (-4.0 * g1 + g2) / (2.0 * delta)
    return {"values": vals, "arclength_weights": weights,
            "integral": float(np.sum(vals * weights)),
            "sign_change": bool(np.min(vals) < 0.0 < np.max(vals))}


def ansatz_seed(grid: Grid2D, ans) -> Field2D:
    """Sample an assembled approximation onto the grid unknowns."""
    return Field2D.from_function(grid, ans.u)
