"""Multi-bubble approximation: scales, concentration parameters, assembly.

The approximate solution is U = sum_i a_i (U_i + H_i), where each U_i stacks
a Liouville bubble with up to three radial correction layers weighted by
((p-1)/p)^j gamma^{-jp}, and H_i is the harmonic correction enforcing the
Dirichlet condition.  The scale parameters obey

    p lambda gamma^{2(p-1)} eps^2 e^{gamma^p} = 1,   p gamma^p = -4 log eps,

which collapse to lambda = eps^2, lambda^2 e^gamma = 1 at p = 1.  The
concentration parameters mu_i couple to the domain through a nonlinear
system in log(8 mu_i^2) driven by the Green's function data and the
far-field constants D^j of the correction layers.

Residuals are always evaluated in the rescaled variable y = x/eps, where
the assembly is numerically stable: the identity
omega_{eps,mu,xi}(eps y) = omega_mu(y - xi') + p gamma^p turns the large
additive constants into exact cancellations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy import optimize

from . import greens, radial_profiles
from .greens import GreenBackend
from .radial_profiles import CorrectionProfile, omega_mu


class NoRootError(ValueError):
    """The scale equation has no solution for the requested lambda."""


# ----------------------------------------------------------------------------
# scale relations
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class BubbleParams:
    """Resolved scale and concentration parameters for one configuration."""

    p: float
    lam: float
    gamma: float
    eps: float
    mu: NDArray
    d: float

    def __post_init__(self):
        object.__setattr__(self, "mu", np.atleast_1d(np.asarray(self.mu, float)))
        if not (0.0 < self.p < 2.0):
            raise ValueError("p must lie in (0, 2)")
        if not (0.0 < self.eps < 1.0):
            raise ValueError("eps must lie in (0, 1)")

    @property
    def m(self) -> int:
        return self.mu.size

    def scale_residuals(self) -> tuple[float, float]:
        """Relative defects of the two defining scale relations."""
        p, lam, g, e = self.p, self.lam, self.gamma, self.eps
        r1 = p * lam * g ** (2.0 * (p - 1.0)) * e * e * math.exp(g ** p) - 1.0
        r2 = p * g ** p / (-4.0 * math.log(e)) - 1.0
        return r1, r2


def resolve_scales(p: float, lam: float) -> tuple[float, float]:
    """Solve the coupled scale relations for (gamma, eps).

    Substituting eps = exp(-p gamma^p / 4) reduces the system to the scalar
    equation g(s) = log(p lam) + (2(p-1)/p) log s + (1 - p/2) s = 0 in
    s = gamma^p.  For p < 1 the equation has two roots and the larger one
    (the concentrating branch) is returned.
    """
    if not (0.0 < p < 2.0):
        raise ValueError("p must lie in (0, 2)")
    if lam <= 0.0:
        raise ValueError("lambda must be positive")
    if p == 1.0:
        gamma = -2.0 * math.log(lam)
        if gamma <= 0.0:
            raise NoRootError("lambda must be below 1 at p = 1")
        return gamma, math.sqrt(lam)

    alpha = 2.0 * (p - 1.0) / p
    beta = 1.0 - 0.5 * p

    def g(s):
        return math.log(p * lam) + alpha * math.log(s) + beta * s

    if p > 1.0:
        # strictly increasing in s: bracket from tiny s upward
        lo, hi = 1e-12, 10.0
        while g(hi) < 0.0:
            hi *= 2.0
            if hi > 1e12:
                raise NoRootError("no root found below s = 1e12")
        s = optimize.brentq(g, lo, hi, xtol=1e-14, rtol=8.9e-16)
    else:
        s_star = -alpha / beta
        if g(s_star) > 0.0:
            raise NoRootError(
                f"lambda too large at p = {p}: min of g on [{s_star:.4g}, inf) "
                f"is {g(s_star):.4g} > 0")
        hi = max(4.0 * s_star, 8.0)
        while g(hi) < 0.0:
            hi *= 2.0
            if hi > 1e12:
                raise NoRootError("no root found below s = 1e12")
        s = optimize.brentq(g, s_star, hi, xtol=1e-14, rtol=8.9e-16)

    gamma = s ** (1.0 / p)
    eps = math.exp(-0.25 * p * s)
    if not (0.0 < eps < 1.0):
        raise NoRootError(f"resolved eps = {eps} outside (0, 1)")
    return gamma, eps


# ----------------------------------------------------------------------------
# concentration-parameter system
# ----------------------------------------------------------------------------


def _layer_weights(p: float, n_layers: int = 3) -> NDArray:
    return np.array([((p - 1.0) / p) ** j for j in range(1, n_layers + 1)])


def _d_of_log_mu(j: int, p: float, x_log8mu2: float) -> float:
    """Far-field constant D^j as a function of log(8 mu^2)."""
    from . import special_integrals as si
    log_mu = 0.5 * (x_log8mu2 - si.LOG8)
    mu = math.exp(log_mu)
    if j == 1:
        return si.d1_closed(mu)
    if j == 2:
        return si.d2_closed(mu, p)
    poly = radial_profiles.d3_in_log_mu(p)
    return float(poly(log_mu))


def _s_factor(p: float, gamma: float, x: float) -> float:
    """S_i = sum_j ((p-1)/p)^j D^j(mu_i) / gamma^{jp} for the layers in use."""
    if p == 1.0:
        return 0.0
    w = _layer_weights(p)
    gp = gamma ** p
    return float(sum(w[j - 1] * _d_of_log_mu(j, p, x) / gp ** j
                     for j in (1, 2, 3)))


def mu_limit_log(backend: GreenBackend, points, signs, p: float) -> NDArray:
    """Leading-order limit of log(8 mu_i^2) as eps -> 0."""
    pts = np.asarray(points, float).reshape(-1, 2)
    a = np.asarray(signs, float)
    m = pts.shape[0]
    out = np.zeros(m)
    for i in range(m):
        coupling = greens.robin(backend, pts[i])
        for k in range(m):
            if k != i:
                coupling += a[i] * a[k] * greens.green(backend, pts[i], pts[k])
        out[i] = (2.0 * (p - 1.0) / (2.0 - p) * (1.0 - math.log(8.0))
                  + 8.0 * np.pi / (2.0 - p) * coupling)
    return out


def solve_mu(backend: GreenBackend, points, signs, p: float, gamma: float,
             eps: float, tol: float = 1e-12, max_iter: int = 100) -> NDArray:
    """Solve the coupled system for the concentration parameters mu_i.

    Works in x_i = log(8 mu_i^2).  Fixed-point form:
    x_i = (1 - S_i/4) 8 pi H(xi_i, xi_i) + S_i log(eps mu_i)
          + sum_{k != i} (1 - S_k/4) 8 pi a_i a_k G(xi_i, xi_k).
    """
    from . import special_integrals as si
    pts = np.asarray(points, float).reshape(-1, 2)
    a = np.asarray(signs, float)
    m = pts.shape[0]
    h_diag = np.array([greens.robin(backend, pt) for pt in pts])
    g_off = np.zeros((m, m))
    for i in range(m):
        for k in range(m):
            if k != i:
                g_off[i, k] = greens.green(backend, pts[i], pts[k])
    log_eps = math.log(eps)

    def rhs(x):
        s = np.array([_s_factor(p, gamma, xi) for xi in x])
        log_mu = 0.5 * (x - si.LOG8)
        out = np.empty(m)
        for i in range(m):
            val = (1.0 - 0.25 * s[i]) * 8.0 * np.pi * h_diag[i]
            val += s[i] * (log_eps + log_mu[i])
            for k in range(m):
                if k != i:
                    val += (1.0 - 0.25 * s[k]) * 8.0 * np.pi \
                        * a[i] * a[k] * g_off[i, k]
            out[i] = val
        return out

    if p == 1.0:
        # S_i vanishes identically, the system is explicit
        return np.sqrt(np.exp(rhs(np.zeros(m))) / 8.0)
    x = mu_limit_log(backend, pts, a, p)

    sol = optimize.root(lambda v: v - rhs(v), x, method="hybr",
                        options={"xtol": 1e-13, "maxfev": 400 * (m + 1)})
    x = sol.x
    res = np.max(np.abs(x - rhs(x)))
    if res > 1e-10:
        raise RuntimeError(f"mu system residual {res:.3e} exceeds 1e-10")
    return np.sqrt(np.exp(x) / 8.0)


def make_params(backend: GreenBackend, points, signs, p: float,
                lam: float) -> BubbleParams:
    """Resolve scales and the mu system for a configuration in one call."""
    pts = np.asarray(points, float).reshape(-1, 2)
    gamma, eps = resolve_scales(p, lam)
    mu = solve_mu(backend, pts, signs, p, gamma, eps)
    bdists = [backend.domain.radius - np.hypot(*pt) if backend.analytic
              else backend._project_to_boundary(pt)[1] for pt in pts]
    cands = [0.25 * min(bdists)]
    for i in range(pts.shape[0]):
        for k in range(i + 1, pts.shape[0]):
            cands.append(0.25 * np.hypot(*(pts[i] - pts[k])))
    d = float(min(cands))
    return BubbleParams(p=p, lam=lam, gamma=gamma, eps=eps, mu=mu, d=d)


# ----------------------------------------------------------------------------
# assembled approximation
# ----------------------------------------------------------------------------


@dataclass
class Ansatz:
    """Assembled multi-bubble approximation over one domain/configuration."""

    backend: GreenBackend
    points: NDArray
    signs: NDArray
    params: BubbleParams
    profiles: list[dict[int, CorrectionProfile]]
    s_factors: NDArray
    exact_projection: bool = False
    _h_exact: list[Callable] | None = field(default=None, repr=False)

    @property
    def m(self) -> int:
        return self.signs.size

    @property
    def xi_prime(self) -> NDArray:
        return self.points / self.params.eps

    # -- pieces ---------------------------------------------------------------

    def _layer_sum(self, i: int, t) -> NDArray:
        """sum_j ((p-1)/p)^j gamma^{-jp} omega~^j at rescaled radius t."""
        p, gamma = self.params.p, self.params.gamma
        if p == 1.0 or not self.profiles[i]:
            return np.zeros_like(np.asarray(t, dtype=float))
        w = _layer_weights(p)
        gp = gamma ** p
        out = np.zeros_like(np.asarray(t, dtype=float))
        for j, prof in self.profiles[i].items():
            out = out + w[j - 1] / gp ** j * prof.rescaled(t)
        return out

    def u_i(self, i: int, x) -> float:
        """Bubble stack U_i at the physical point x (without H_i)."""
        p, gamma, eps = self.params.p, self.params.gamma, self.params.eps
        mu = self.params.mu[i]
        x = np.asarray(x, dtype=float)
        r = np.hypot(*(x - self.points[i]))
        core = math.log(8.0 * mu * mu
                        / (eps * eps * mu * mu + r * r) ** 2)
        t = r / (eps * mu)
        return (core + float(self._layer_sum(i, t))) / (p * gamma ** (p - 1.0))

    def h_i(self, i: int, x) -> float:
        """Dirichlet correction H_i at x (fast closed-form or exact path)."""
        p, gamma, eps = self.params.p, self.params.gamma, self.params.eps
        mu = self.params.mu[i]
        if self.exact_projection:
            return float(self._h_exact[i](np.asarray(x, float)))
        s_i = self.s_factors[i]
        hx = greens.regular_part(self.backend, np.asarray(x, float),
                                 self.points[i])
        val = ((1.0 - 0.25 * s_i) * 8.0 * np.pi * hx
               - math.log(8.0 * mu * mu) + s_i * math.log(eps * mu))
        return val / (p * gamma ** (p - 1.0))

    def u(self, x) -> float:
        """Approximate solution at the physical point x."""
        return float(sum(self.signs[i] * (self.u_i(i, x) + self.h_i(i, x))
                         for i in range(self.m)))

    # -- rescaled-variable assembly --------------------------------------------

    def v(self, y) -> float:
        """Rescaled deviation V(y) = p gamma^{p-1} u(eps y) - p gamma^p.

        Assembled without forming the large constants, using
        omega_{eps,mu,xi}(eps y) = omega_mu(y - xi') + p gamma^p.
        """
        p, gamma, eps = self.params.p, self.params.gamma, self.params.eps
        y = np.asarray(y, dtype=float)
        pg = p * gamma ** p
        total = (float(self.signs.sum()) - 1.0) * pg
        for i in range(self.m):
            mu = self.params.mu[i]
            z = y - self.xi_prime[i]
            r = np.hypot(*z)
            val = omega_mu(mu, r) + float(self._layer_sum(i, r / mu))
            val += p * gamma ** (p - 1.0) * self.h_i(i, eps * y)
            total += self.signs[i] * val
        return total

    def minus_lap_v(self, y) -> float:
        """Analytic -Delta V at the rescaled point y (no differencing)."""
        p, gamma = self.params.p, self.params.gamma
        y = np.asarray(y, dtype=float)
        total = 0.0
        gp = gamma ** p
        w = _layer_weights(p) if p != 1.0 else None
        for i in range(self.m):
            mu = self.params.mu[i]
            z = y - self.xi_prime[i]
            r = np.hypot(*z)
            t = r / mu
            bracket = 1.0
            for j, prof in self.profiles[i].items():
                f_j = radial_profiles.f_source_rescaled(j, p, mu)
                bracket += w[j - 1] / gp ** j * (float(prof.rescaled(t))
                                                 - float(f_j(t)))
            total += self.signs[i] * math.exp(omega_mu(mu, r)) * bracket
        return total

    def f_of_v(self, v_val: float) -> float:
        """Nonlinearity f(V) of the rescaled equation, overflow-guarded."""
        p, gamma = self.params.p, self.params.gamma
        pg = p * gamma ** p
        u1 = 1.0 + v_val / pg
        if u1 == 0.0:
            return 0.0
        if u1 > 0.0:
            log_u1 = math.log1p(v_val / pg)
        else:
            log_u1 = math.log(-u1)
        exponent = (p - 1.0) * log_u1 + gamma ** p * math.expm1(p * log_u1)
        if exponent > 700.0:
            raise OverflowError(f"nonlinearity overflow: exponent {exponent}")
        return math.copysign(math.exp(exponent), u1)


def build_ansatz(backend: GreenBackend, points, signs, params: BubbleParams,
                 exact_projection: bool = False) -> Ansatz:
    """Assemble the multi-bubble approximation.

    The default Dirichlet correction uses the closed-form expansion of H_i;
    exact_projection=True replaces it with the harmonic extension of -U_i
    restricted to the boundary (one boundary solve per bubble).
    """
    pts = np.asarray(points, float).reshape(-1, 2)
    a = np.asarray(signs, float)
    p, gamma = params.p, params.gamma
    profiles: list[dict[int, CorrectionProfile]] = []
    for i in range(a.size):
        mu = float(params.mu[i])
        if p == 1.0:
            profiles.append({})
        else:
            layer = {j: radial_profiles.correction_profile(j, p, mu)
                     for j in (1, 2, 3)}
            profiles.append(layer)
    s_factors = np.array([
        _s_factor(p, gamma, math.log(8.0 * params.mu[i] ** 2))
        for i in range(a.size)])

    ans = Ansatz(backend=backend, points=pts, signs=a, params=params,
                 profiles=profiles, s_factors=s_factors,
                 exact_projection=False)
    if exact_projection:
        h_exact = []
        for i in range(a.size):
            h_exact.append(greens.harmonic_extension(
                backend, lambda xb, i=i: -ans.u_i(i, xb)))
        ans.exact_projection = True
        ans._h_exact = h_exact
    return ans


# ----------------------------------------------------------------------------
# weighted residual
# ----------------------------------------------------------------------------


@dataclass
class ResidualReport:
    """Weighted residual of the pure ansatz on a finite evaluation grid.

    The norm is a max over the grid and therefore a lower bound of the true
    sup norm; this is flagged in is_grid_proxy.
    """

    grid: NDArray
    residual: NDArray
    weight: NDArray
    norm: float
    sigma: float
    region: NDArray
    region_max: dict
    is_grid_proxy: bool = True


def default_sigma(p: float) -> float:
    return 0.5 * min((2.0 - p) / p, 0.5)


def _residual_grid(ans: Ansatz, n_radial: int = 28, n_angular: int = 16,
                   n_background: int = 24) -> NDArray:
    """Polar patches around each rescaled center plus a coarse background."""
    params = ans.params
    pts = []
    r_outer = params.d / params.eps
    for i in range(ans.m):
        mu = params.mu[i]
        radii = np.geomspace(1e-3 * mu, r_outer, n_radial)
        ang = 2.0 * np.pi * (np.arange(n_angular) + 0.31) / n_angular
        for r in radii:
            for th in ang:
                pts.append(ans.xi_prime[i] + r * np.array([math.cos(th),
                                                           math.sin(th)]))
        pts.append(ans.xi_prime[i])
    nodes = ans.backend.boundary_nodes / params.eps
    lo, hi = nodes.min(axis=0), nodes.max(axis=0)
    xs = np.linspace(lo[0], hi[0], n_background)
    ys = np.linspace(lo[1], hi[1], n_background)
    clearance = 1e-6 * ans.backend.diameter
    for x in xs:
        for yv in ys:
            if ans.backend.contains(np.array([x, yv]) * params.eps,
                                    tol=clearance):
                pts.append(np.array([x, yv]))
    out = np.asarray(pts)
    inside = np.array([ans.backend.contains(pt * params.eps) for pt in out])
    return out[inside]


def residual_norm(ans: Ansatz, sigma: float | None = None,
                  grid: NDArray | None = None) -> ResidualReport:
    """Weighted residual norm ||E||_* of the pure ansatz.

    E = -Delta V - f(V) in rescaled coordinates, weighted by the inverse
    bubble weight with exponent sigma.  Uses the exact harmonic projection
    internally so that the Dirichlet-correction error does not mask the
    gamma^{-4p} residual scale.
    """
    p = ans.params.p
    if sigma is None:
        sigma = default_sigma(p)
    if not (0.0 < sigma < min((2.0 - p) / p, 0.5)):
        raise ValueError("sigma outside the admissible interval")
    if not ans.exact_projection:
        ans = build_ansatz(ans.backend, ans.points, ans.signs, ans.params,
                           exact_projection=True)
    if grid is None:
        grid = _residual_grid(ans)
    params = ans.params
    mu = params.mu
    xi_p = ans.xi_prime

    res = np.empty(grid.shape[0])
    wt = np.empty(grid.shape[0])
    for k, y in enumerate(grid):
        e_val = ans.minus_lap_v(y) - ans.f_of_v(ans.v(y))
        if not np.isfinite(e_val):
            raise FloatingPointError(f"residual not finite at y = {tuple(y)}")
        res[k] = e_val
        wsum = 0.0
        for i in range(ans.m):
            r2 = float((y - xi_p[i]) @ (y - xi_p[i]))
            wsum += mu[i] ** sigma / (mu[i] ** 2 + r2) ** (0.5 * (2.0 + sigma))
        wt[k] = 1.0 / wsum

    dist = np.array([min(np.hypot(*(y - xi_p[i])) / mu[i]
                         for i in range(ans.m)) for y in grid])
    log_eps = abs(math.log(params.eps))
    region = np.where(dist <= log_eps, "inner",
                      np.where(dist <= params.d / (2.0 * params.eps *
                                                   mu.min()),
                               "annulus", "far"))
    weighted = np.abs(wt * res)
    region_max = {tag: (float(weighted[region == tag].max())
                        if np.any(region == tag) else 0.0)
                  for tag in ("inner", "annulus", "far")}
    return ResidualReport(grid=grid, residual=res, weight=wt,
                          norm=float(weighted.max()), sigma=sigma,
                          region=region, region_max=region_max)


# ----------------------------------------------------------------------------
# kernel diagnostics
# ----------------------------------------------------------------------------


def kernel_functions(i: int, j: int, mu, xi_prime) -> Callable:
    """Evaluator of the linearized-kernel element Z_{ij}(y) = Z_j((y-xi'_i)/mu_i).

    Z_0(z) = (|z|^2 - 1)/(|z|^2 + 1) and Z_j(z) = 4 z_j / (|z|^2 + 1) for
    j = 1, 2.
    """
    if j not in (0, 1, 2):
        raise ValueError("kernel index j must be 0, 1 or 2")
    mu = np.atleast_1d(np.asarray(mu, float))
    xi_prime = np.asarray(xi_prime, float).reshape(-1, 2)
    mui = mu[i]
    center = xi_prime[i]

    def evaluate(y) -> float:
        z = (np.asarray(y, dtype=float) - center) / mui
        q = float(z @ z)
        if j == 0:
            return (q - 1.0) / (q + 1.0)
        return 4.0 * z[j - 1] / (q + 1.0)

    return evaluate
