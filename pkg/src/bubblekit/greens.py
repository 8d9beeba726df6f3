"""Dirichlet Green's function machinery on planar domains.

Two backends are provided.  The unit disk (any radius) uses the
method-of-images closed forms for the Green's function G, its regular part H,
the Robin function H(y, y) and their gradients.  General smooth domains are
handled by a double-layer potential discretized with the Nystrom/trapezoid
rule on a closed C^2 boundary curve, which converges spectrally for smooth
data.  Harmonic extensions of boundary traces (the correction terms that
adapt free-space bubbles to the domain) are evaluated through the same two
routes: a Poisson-kernel Fourier series on the disk and the solved layer
density elsewhere.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.typing import NDArray
from scipy import linalg


class OutsideDomainError(ValueError):
    """Evaluation point is outside the domain (or too close to its boundary)."""


class CoincidentPointsError(ValueError):
    """Source and target of the Green's function coincide at machine scale."""


class SingularSystemError(RuntimeError):
    """The Nystrom system is ill-conditioned beyond the accepted threshold."""


# ----------------------------------------------------------------------------
# domain specification
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class DomainSpec:
    """Description of a planar domain with a C^2 boundary.

    kind is "unit_disk" (with a radius) or "parametric" (a closed curve
    sampled at N_b equispaced parameter values, N_b even and >= 64).
    """

    kind: str
    radius: float = 1.0
    nodes: NDArray | None = None
    name: str = "domain"

    def __post_init__(self):
        if self.kind == "unit_disk":
            if not self.radius > 0.0:
                raise ValueError("disk radius must be positive")
        elif self.kind == "parametric":
            nodes = np.asarray(self.nodes, dtype=float)
            if nodes.ndim != 2 or nodes.shape[1] != 2:
                raise ValueError("parametric nodes must be an (N, 2) array")
            n = nodes.shape[0]
            if n < 64 or n % 2:
                raise ValueError("need an even number of nodes, at least 64")
            object.__setattr__(self, "nodes", nodes)
            _check_simple_closed(nodes)
        else:
            raise ValueError(f"unknown domain kind {self.kind!r}")

    @classmethod
    def unit_disk(cls, radius: float = 1.0, name: str = "disk") -> "DomainSpec":
        return cls(kind="unit_disk", radius=radius, name=name)

    @classmethod
    def parametric(cls, nodes, name: str = "curve") -> "DomainSpec":
        return cls(kind="parametric", nodes=np.asarray(nodes, float), name=name)

    @classmethod
    def from_json(cls, source) -> "DomainSpec":
        """Load from a JSON file path, file object, or already-parsed dict."""
        if isinstance(source, dict):
            data = source
        elif hasattr(source, "read"):
            data = json.load(source)
        else:
            with open(source) as fh:
                data = json.load(fh)
        kind = data["kind"]
        name = data.get("name", "domain")
        if kind == "unit_disk":
            return cls.unit_disk(radius=float(data.get("radius", 1.0)), name=name)
        return cls.parametric(np.asarray(data["nodes"], float), name=name)


def _check_simple_closed(nodes: NDArray) -> None:
    """Discrete winding check: total turning of the polygonal tangent is 2 pi."""
    d = np.diff(np.vstack([nodes, nodes[:1]]), axis=0)
    if np.any(np.hypot(d[:, 0], d[:, 1]) == 0.0):
        raise ValueError("boundary curve has repeated consecutive nodes")
    ang = np.arctan2(d[:, 1], d[:, 0])
    turn = np.diff(np.concatenate([ang, ang[:1]]))
    turn = (turn + np.pi) % (2.0 * np.pi) - np.pi
    winding = turn.sum() / (2.0 * np.pi)
    if abs(abs(winding) - 1.0) > 1e-6:
        raise ValueError("boundary curve fails the simple closed-curve check")


# ----------------------------------------------------------------------------
# backend
# ----------------------------------------------------------------------------

_NEWMAN = 1.0 / (2.0 * np.pi)


def _spectral_derivatives(nodes: NDArray):
    """First and second parameter derivatives of the closed curve via FFT."""
    z = nodes[:, 0] + 1j * nodes[:, 1]
    n = z.size
    k = np.fft.fftfreq(n, d=1.0 / n) * 1j
    zh = np.fft.fft(z)
    dz = np.fft.ifft(k * zh)
    ddz = np.fft.ifft(k * k * zh)
    return dz, ddz


@dataclass
class GreenBackend:
    """Evaluator state for one domain.

    For the disk the analytic flag is set and no Nystrom data is built.  For
    parametric domains the Nystrom matrix is factorized once and layer
    densities are cached per source point.
    """

    domain: DomainSpec
    n_boundary: int = 256
    analytic: bool = field(init=False, default=False)
    _cache: dict = field(init=False, default_factory=dict, repr=False)

    def __post_init__(self):
        if self.domain.kind == "unit_disk":
            self.analytic = True
            rho = self.domain.radius
            theta = 2.0 * np.pi * np.arange(self.n_boundary) / self.n_boundary
            self._bnodes = rho * np.column_stack([np.cos(theta), np.sin(theta)])
            self._diameter = 2.0 * rho
            return
        nodes = self.domain.nodes
        self.n_boundary = nodes.shape[0]
        self._bnodes = nodes
        dz, ddz = _spectral_derivatives(nodes)
        speed = np.abs(dz)
        # signed area fixes the orientation so the normal points outward
        area = 0.5 * np.sum(nodes[:, 0] * np.roll(nodes[:, 1], -1)
                            - np.roll(nodes[:, 0], -1) * nodes[:, 1])
        orient = 1.0 if area > 0 else -1.0
        normal = orient * np.column_stack([dz.imag, -dz.real]) / speed[:, None]
        kappa = orient * (dz.real * ddz.imag - dz.imag * ddz.real) / speed ** 3
        w = speed * (2.0 * np.pi / self.n_boundary)

        self._normal = normal
        self._weights = w
        z = nodes[:, 0] + 1j * nodes[:, 1]
        self._z_coef = np.fft.fft(z) / self.n_boundary
        diff = nodes[:, None, :] - nodes[None, :, :]
        r2 = np.einsum("ijk,ijk->ij", diff, diff)
        num = np.einsum("jk,ijk->ij", normal, diff)
        with np.errstate(divide="ignore", invalid="ignore"):
            kmat = num / (2.0 * np.pi * r2)
        np.fill_diagonal(kmat, -kappa / (4.0 * np.pi))
        a = kmat * w[None, :]
        a[np.diag_indices_from(a)] -= 0.5
        cond = np.linalg.cond(a)
        if cond > 1e12:
            raise SingularSystemError(f"Nystrom matrix condition {cond:.3e}")
        self._lu = linalg.lu_factor(a)
        d2 = (nodes[:, 0][:, None] - nodes[:, 0][None, :]) ** 2 \
            + (nodes[:, 1][:, None] - nodes[:, 1][None, :]) ** 2
        self._diameter = float(np.sqrt(d2.max()))

    # -- geometry ------------------------------------------------------------

    @property
    def boundary_nodes(self) -> NDArray:
        return self._bnodes

    @property
    def diameter(self) -> float:
        return self._diameter

    def contains(self, y, tol: float = 0.0) -> bool:
        """True when y lies inside the domain with clearance tol from it."""
        y = np.asarray(y, dtype=float)
        if self.analytic:
            return np.hypot(*y) < self.domain.radius - tol
        w1 = self._double_layer_eval(np.ones(self.n_boundary), y)
        if w1 > -0.5:
            return False
        if tol > 0.0:
            dist = np.min(np.hypot(self._bnodes[:, 0] - y[0],
                                   self._bnodes[:, 1] - y[1]))
            return dist >= tol
        return True

    def _require_inside(self, y, clearance: float = 0.0) -> NDArray:
        y = np.asarray(y, dtype=float)
        if not self.contains(y, tol=clearance):
            raise OutsideDomainError(
                f"point ({y[0]:.6g}, {y[1]:.6g}) is not admissible")
        return y

    # -- Nystrom machinery ----------------------------------------------------

    def _double_layer_eval(self, density: NDArray, x: NDArray) -> float:
        diff = np.asarray(x, float)[None, :] - self._bnodes
        r2 = np.einsum("jk,jk->j", diff, diff)
        kern = np.einsum("jk,jk->j", self._normal, diff) / (2.0 * np.pi * r2)
        return float(np.dot(kern * self._weights, density))

    def _series_eval(self, coef: NDArray, s: float) -> complex:
        n = coef.size
        k = np.fft.fftfreq(n, d=1.0 / n)
        return complex(np.sum(coef * np.exp(1j * k * s)))

    def _project_to_boundary(self, x: NDArray) -> tuple[float, float]:
        """Parameter of the closest curve point and the distance to it."""
        xc = complex(x[0], x[1])
        d2 = np.einsum("jk,jk->j", self._bnodes - x[None, :],
                       self._bnodes - x[None, :])
        s = 2.0 * np.pi * int(np.argmin(d2)) / self.n_boundary
        n = self._z_coef.size
        k = np.fft.fftfreq(n, d=1.0 / n)
        for _ in range(4):
            e = np.exp(1j * k * s)
            g = np.sum(self._z_coef * e)
            dg = np.sum(self._z_coef * 1j * k * e)
            ddg = np.sum(self._z_coef * (1j * k) ** 2 * e)
            f = ((xc - g).conjugate() * dg).real
            df = ((xc - g).conjugate() * ddg).real - abs(dg) ** 2
            if df == 0.0:
                break
            s -= f / df
        return s, abs(xc - self._series_eval(self._z_coef, s))

    def _eval_field(self, density: NDArray, trace_coef: NDArray,
                    x: NDArray) -> float:
        """Double-layer evaluation with a boundary-limit fallback.

        The trapezoid rule loses accuracy within a node spacing of the
        curve, so points essentially on the boundary take the interpolated
        trace at the closest boundary point instead.
        """
        x = np.asarray(x, dtype=float)
        node_gap = np.min(np.hypot(self._bnodes[:, 0] - x[0],
                                   self._bnodes[:, 1] - x[1]))
        if node_gap < 4.0 * np.pi * self._diameter / self.n_boundary:
            s, dist = self._project_to_boundary(x)
            if dist < 1e-6 * self._diameter:
                return float(self._series_eval(trace_coef, s).real)
        return self._double_layer_eval(density, x)

    def _solve_density(self, trace: NDArray) -> NDArray:
        return linalg.lu_solve(self._lu, np.asarray(trace, float))

    def _density_for_source(self, y: NDArray) -> tuple[NDArray, NDArray]:
        key = (round(float(y[0]), 14), round(float(y[1]), 14))
        entry = self._cache.get(key)
        if entry is None:
            diff = self._bnodes - y[None, :]
            trace = _NEWMAN * 0.5 * np.log(np.einsum("jk,jk->j", diff, diff))
            dens = self._solve_density(trace)
            entry = (dens, np.fft.fft(trace) / trace.size)
            self._cache[key] = entry
        return entry


def build_backend(domain: DomainSpec, n_boundary: int = 256) -> GreenBackend:
    return GreenBackend(domain=domain, n_boundary=n_boundary)


# ----------------------------------------------------------------------------
# closed disk forms
# ----------------------------------------------------------------------------


def _disk_regular_part(rho: float, x: NDArray, y: NDArray) -> float:
    ay = np.hypot(*y)
    if ay == 0.0:
        return _NEWMAN * math.log(rho)
    ystar = y * (rho * rho / (ay * ay))
    return _NEWMAN * math.log(ay * np.hypot(*(x - ystar)) / rho)


# ----------------------------------------------------------------------------
# operations
# ----------------------------------------------------------------------------


def _require_closure(backend: GreenBackend, x: NDArray) -> NDArray:
    """Accept x inside the domain or on the boundary (within roundoff)."""
    x = np.asarray(x, dtype=float)
    if backend.contains(x):
        return x
    slack = 1e-9 * backend.diameter
    if backend.analytic:
        if np.hypot(*x) <= backend.domain.radius + slack:
            return x
    else:
        _, dist = backend._project_to_boundary(x)
        if dist <= slack:
            return x
    raise OutsideDomainError(
        f"point ({x[0]:.6g}, {x[1]:.6g}) lies outside the domain")


def green(backend: GreenBackend, x, y) -> float:
    """Dirichlet Green's function G(x, y); vanishes for x on the boundary."""
    x = _require_closure(backend, np.asarray(x, dtype=float))
    y = backend._require_inside(y)
    r = np.hypot(*(x - y))
    if r < 1e-13 * backend.diameter:
        raise CoincidentPointsError("G(x, y) requested at coincident points")
    return _NEWMAN * math.log(1.0 / r) + regular_part(backend, x, y)


def regular_part(backend: GreenBackend, x, y) -> float:
    """Regular part H(x, y) = G(x, y) - (1/2 pi) log(1/|x - y|)."""
    x = _require_closure(backend, np.asarray(x, dtype=float))
    y = backend._require_inside(y)
    if backend.analytic:
        return _disk_regular_part(backend.domain.radius, x, y)
    dens, trace_coef = backend._density_for_source(y)
    return backend._eval_field(dens, trace_coef, x)


def robin(backend: GreenBackend, y) -> float:
    """Robin function H(y, y).  Tends to -infinity toward the boundary."""
    y = backend._require_inside(y, clearance=1e-3 * backend.diameter)
    if backend.analytic:
        rho = backend.domain.radius
        return _NEWMAN * math.log((rho * rho - y[0] ** 2 - y[1] ** 2) / rho)
    dens, _ = backend._density_for_source(y)
    return backend._double_layer_eval(dens, y)


def grad_green(backend: GreenBackend, x, y) -> NDArray:
    """Gradient of G(x, y) in the first argument."""
    x = np.asarray(x, dtype=float)
    y = backend._require_inside(y)
    d = x - y
    r2 = float(d @ d)
    if r2 < (1e-13 * backend.diameter) ** 2:
        raise CoincidentPointsError("grad G requested at coincident points")
    if backend.analytic:
        rho = backend.domain.radius
        ay2 = float(y @ y)
        out = -_NEWMAN * d / r2
        if ay2 > 0.0:
            dstar = x - y * (rho * rho / ay2)
            out = out + _NEWMAN * dstar / float(dstar @ dstar)
        return out
    h = 1e-5 * backend.diameter
    dens, _ = backend._density_for_source(y)
    gx = (backend._double_layer_eval(dens, x + [h, 0.0])
          - backend._double_layer_eval(dens, x - [h, 0.0])) / (2.0 * h)
    gy = (backend._double_layer_eval(dens, x + [0.0, h])
          - backend._double_layer_eval(dens, x - [0.0, h])) / (2.0 * h)
    sing = -_NEWMAN * d / r2
    return sing + np.array([gx, gy])


def grad_robin(backend: GreenBackend, y) -> NDArray:
    """Gradient of the Robin function at y."""
    y = backend._require_inside(y, clearance=1e-3 * backend.diameter)
    if backend.analytic:
        rho = backend.domain.radius
        return -y / (np.pi * (rho * rho - float(y @ y)))
    h = 1e-5 * backend.diameter
    vals = []
    for dv in ([h, 0.0], [0.0, h]):
        dv = np.asarray(dv)
        vals.append((robin(backend, y + dv) - robin(backend, y - dv))
                    / (2.0 * h))
    return np.array(vals)


def harmonic_extension(backend: GreenBackend,
                       boundary_trace: Callable) -> Callable:
    """Harmonic function in the domain matching the trace on the boundary.

    The trace is a callable on boundary points (two arguments packed as one
    (2,) array).  Returns an evaluator of interior points.
    """
    nodes = backend.boundary_nodes
    g = np.array([float(boundary_trace(pt)) for pt in nodes])
    if backend.analytic:
        rho = backend.domain.radius
        n = g.size
        coef = np.fft.fft(g) / n
        kmax = n // 2

        def evaluate(x) -> float:
            x = np.asarray(x, dtype=float)
            z = (x[0] + 1j * x[1]) / rho
            powers = z ** np.arange(1, kmax)
            val = coef[0].real + 2.0 * np.sum((coef[1:kmax] * powers).real)
            val += (coef[kmax] * z ** kmax).real
            return float(val)

        return evaluate

    dens = backend._solve_density(g)
    trace_coef = np.fft.fft(g) / g.size

    def evaluate(x) -> float:
        return backend._eval_field(dens, trace_coef, np.asarray(x, float))

    return evaluate
