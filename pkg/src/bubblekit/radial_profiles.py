"""Standard bubble, correction-layer sources, and radial correction profiles.

The bubble omega_mu(z) = log(8 mu^2 / (mu^2 + |z|^2)^2) solves the Liouville
equation -Delta w = e^w.  Matching the exponential nonlinearity beyond leading
order requires radial correction layers omega^j_mu, j = 1, 2, 3, solving

    Delta omega^j + e^{omega_mu} omega^j = e^{omega_mu} f^j   in R^2,

where the sources f^j are explicit polynomials in omega_mu and the
lower-order layers.  After rescaling to unit concentration (t = |z|/mu) the
operator has the explicit variation-of-parameters solution

    w(t) = (1-t^2)/(1+t^2) * ( int_0^t [phi(s) - phi(1)]/(s-1)^2 ds
                               + phi(1) t/(1-t) ),
    phi(s) = 8 (s^2+1)^2 / (s (s+1)^2) * int_0^s u(1-u^2)/(1+u^2)^3 f(u) du,

normalized by w(0) = 0.  The singular-looking point s = 1 is removable:
phi'(1) = 0 because both the prefactor derivative and the inner integrand
vanish there.  Far fields are logarithmic, w(t) = (D/2) log(1+t^2) + C +
o(1), with the slope D also available as the moment
8 int_0^inf t(t^2-1)/(t^2+1)^3 f(t) dt; the two routes are computed
independently and cross-checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate, interpolate

from .special_integrals import (
    LOG8,
    improper_quad,
    omega1_tilde,
    omega_tilde,
    z0,
)

N_NODES_DEFAULT = 4000
T_MAX_DEFAULT = 1e4


def omega_mu(mu: float, r) -> np.ndarray:
    """Standard bubble profile log(8 mu^2 / (mu^2 + r^2)^2)."""
    r = np.asarray(r, dtype=float)
    return np.log(8.0 * mu * mu) - 2.0 * np.log(mu * mu + r * r)


@dataclass(frozen=True)
class StandardBubble:
    """The concentrating profile at scale mu, with its mass normalization."""
    mu: float

    def __call__(self, r):
        return omega_mu(self.mu, r)

    def mass(self) -> float:
        """Quadrature of e^{omega_mu} over the plane; equals 8 pi exactly."""
        val, _ = integrate.quad(
            lambda r: 2.0 * np.pi * r * 8.0 * self.mu ** 2
            / (self.mu ** 2 + r * r) ** 2, 0.0, np.inf)
        return val


# ----------------------------------------------------------------------------
# correction-layer sources
# ----------------------------------------------------------------------------

def f_source_rescaled(j: int, p: float, mu: float) -> Callable:
    """Source f^j evaluated in the rescaled variable t = r/mu.

    j = 1 needs no lower-order data; j = 2 uses the closed first layer;
    j = 3 additionally uses the numerically solved second layer.  The j >= 2
    sources carry 1/(p-1) factors and are undefined at p = 1 (where all
    correction layers drop out of the ansatz anyway).
    """
    if j not in (1, 2, 3):
        raise ValueError("layer order j must be 1, 2 or 3")
    if j >= 2 and p == 1.0:
        raise ValueError(f"source f^{j} is undefined at p = 1")

    if j == 1:
        def f1(t):
            w = omega_tilde(mu, t)
            return -(w + 0.5 * w * w)
        return f1

    if j == 2:
        c2 = (p - 2.0) / (2.0 * (p - 1.0))
        c3 = (p - 2.0) / (6.0 * (p - 1.0))

        def f2(t):
            w = omega_tilde(mu, t)
            w1 = omega1_tilde(mu, t)
            b1 = w1 + 0.5 * w * w
            return -((w1 + c2 * w * w) + w * b1 + w * w1 + c3 * w ** 3
                     + 0.5 * b1 * b1)
        return f2

    prof2 = correction_profile(2, p, mu)
    q = (p - 2.0) / (p - 1.0)
    c2 = (p - 2.0) / (2.0 * (p - 1.0))
    c3 = (p - 2.0) / (6.0 * (p - 1.0))
    c4 = (p - 2.0) * (p - 3.0) / (6.0 * (p - 1.0) ** 2)
    c5 = (p - 2.0) * (p - 3.0) / (24.0 * (p - 1.0) ** 2)

    def f3(t):
        w = omega_tilde(mu, t)
        w1 = omega1_tilde(mu, t)
        w2 = prof2.rescaled(t)
        b1 = w1 + 0.5 * w * w
        return -((w2 + q * w * w1 + c4 * w ** 3)
                 + (w1 + c2 * w * w) * b1
                 + w * (w * w1 + w2 + c3 * w ** 3 + 0.5 * b1 * b1)
                 + w * w2 + c2 * w * w * w1 + c5 * w ** 4
                 + 0.5 * w1 * w1
                 + b1 * (w2 + w * w1 + c3 * w ** 3)
                 + b1 ** 3 / 6.0)

    return f3


def f_source(j: int, p: float, mu: float) -> Callable:
    """Source f^j as a function of the physical radius r."""
    g = f_source_rescaled(j, p, mu)
    return lambda r: g(np.asarray(r, dtype=float) / mu)


# ----------------------------------------------------------------------------
# the explicit radial solver
# ----------------------------------------------------------------------------

def _sinh_grid(n_nodes: int, t_max: float) -> np.ndarray:
    """Graded grid t_k = a sinh(k h): dense near 0, log-uniform far out."""
    a = 1e-3
    h = math.asinh(t_max / a) / n_nodes
    return a * np.sinh(h * np.arange(n_nodes + 1))


def _phi_one_richardson(phi: Callable, tol: float = 1e-10) -> float:
    """Limit of phi at s = 1 by symmetric-average Richardson extrapolation."""
    ks = range(3, 14)
    vals = [0.5 * (phi(1.0 + 2.0 ** -k) + phi(1.0 - 2.0 ** -k)) for k in ks]
    # Neville in delta^2
    table = list(vals)
    best = table[-1]
    stable = 0
    prev = None
    for order in range(1, len(table)):
        new = []
        for i in range(len(table) - 1):
            f = 4.0 ** order
            new.append((f * table[i + 1] - table[i]) / (f - 1.0))
        table = new
        best = table[-1]
        if prev is not None and abs(best - prev) < tol:
            stable += 1
            if stable >= 3:
                return best
        else:
            stable = 0
        prev = best
    if prev is None or abs(best - prev) > 100 * tol:
        raise RuntimeError("limit of phi at s = 1 did not stabilize")
    return best


def _solve_rescaled(f_tilde: Callable, n_nodes: int, t_max: float):
    """Solve the rescaled layer equation; returns (grid, samples, phi(1))."""
    t = _sinh_grid(n_nodes, t_max)

    def psi_neg(s):
        return s * (1.0 - s * s) / (1.0 + s * s) ** 3

    inner = interpolate.CubicSpline(t, psi_neg(t) * f_tilde(t)).antiderivative()

    def phi(s):
        s = np.asarray(s, dtype=float)
        pref = np.empty_like(s)
        nz = s > 0
        pref[nz] = 8.0 * (s[nz] ** 2 + 1.0) ** 2 / (s[nz] * (s[nz] + 1.0) ** 2)
        pref[~nz] = 0.0
        vals = pref * inner(np.clip(s, 0.0, t_max))
        return vals if vals.ndim else float(vals)

    phi1 = _phi_one_richardson(lambda s: float(phi(np.array([s]))[0]))

    def h_raw(s):
        x = s - 1.0
        return (phi(s) - phi1) / (x * x)

    # near s = 1 the direct quotient loses precision; bridge with a local
    # polynomial fitted just outside the cancellation zone
    xs = np.concatenate([-np.geomspace(0.2, 2e-3, 24), np.geomspace(2e-3, 0.2, 24)])
    coeffs = np.polynomial.polynomial.polyfit(xs, h_raw(1.0 + xs), 6)

    def h(s):
        s = np.asarray(s, dtype=float)
        x = s - 1.0
        out = np.where(np.abs(x) > 2e-3,
                       h_raw(np.where(np.abs(x) > 2e-3, s, 2.0)),
                       np.polynomial.polynomial.polyval(x, coeffs))
        return out

    outer = interpolate.CubicSpline(t, h(t)).antiderivative()
    w = ((1.0 - t * t) / (1.0 + t * t) * outer(t)
         + phi1 * t * (1.0 + t) / (1.0 + t * t))
    return t, w, phi1


def _fit_far_field(t: np.ndarray, w: np.ndarray, d_fixed: float | None = None,
                   extended: bool = False):
    """Fit w ~ (D/2) log(1+t^2) + C + decaying corrections on the far grid.

    Returns (d_slope, c_offset, b_over_t).  When d_fixed is given the slope
    is pinned and only the offset and decay coefficients are fitted.
    """
    cols = [np.ones_like(t), 1.0 / t, np.log(t) / t,
            1.0 / t ** 2, np.log(t) / t ** 2, np.log(t) ** 2 / t ** 2]
    if d_fixed is None:
        cols.insert(0, 0.5 * np.log1p(t * t))
        if extended:
            # Higher log powers appear in the decay of the deeper layers
            # and bias a free slope fit if omitted.
            cols += [np.log(t) ** 2 / t, np.log(t) ** 3 / t,
                     np.log(t) ** 3 / t ** 2]
        a = np.column_stack(cols)
        scale = np.max(np.abs(a), axis=0)
        sol, *_ = np.linalg.lstsq(a / scale, w, rcond=None)
        sol = sol / scale
        return sol[0], sol[1], sol[3]
    a = np.column_stack(cols)
    scale = np.max(np.abs(a), axis=0)
    rhs = w - 0.5 * d_fixed * np.log1p(t * t)
    sol, *_ = np.linalg.lstsq(a / scale, rhs, rcond=None)
    sol = sol / scale
    return d_fixed, sol[0], sol[2]


@dataclass
class CorrectionProfile:
    """A radial correction layer with far-field data and two normalizations.

    ``raw`` samples follow the solver normalization w(0) = 0; the ansatz uses
    the zero-far-field-offset normalization ``rescaled`` = raw - C_f Z0,
    where Z0 = (t^2-1)/(t^2+1) spans the dilation direction of the kernel.
    """
    j: int
    mu: float
    p: float
    t: np.ndarray
    raw: np.ndarray
    c_f: float
    d_moment: float
    d_slope: float
    _b_decay: float = 0.0
    _closed: Callable | None = field(default=None, repr=False)
    _spline: interpolate.CubicSpline | None = field(default=None, repr=False)
    t_switch: float = 0.0

    @property
    def d(self) -> float:
        return self.d_moment

    @property
    def r(self) -> np.ndarray:
        return self.mu * self.t

    def rescaled(self, t):
        """Zero-offset layer in the rescaled variable (enters the ansatz)."""
        t_in = np.asarray(t, dtype=float)
        t = np.atleast_1d(t_in)
        if self._closed is not None:
            return self._closed(t_in)
        near = t <= self.t_switch
        out = np.empty_like(t)
        tn = np.where(near, t, 0.0)
        out[near] = (self._spline(tn) - self.c_f * z0(tn))[near]
        tf = np.where(near, self.t_switch, t)
        far = (0.5 * self.d_moment * np.log1p(tf * tf)
               + self._b_decay / np.maximum(tf, 1.0)
               + self.c_f * (1.0 - z0(tf)))
        out[~near] = far[~near]
        return out if t_in.ndim else float(out[0])

    def rescaled_raw(self, t):
        """Solver-normalized layer (vanishing at the origin)."""
        return self.rescaled(t) + self.c_f * z0(np.asarray(t, dtype=float))

    def __call__(self, r):
        """Layer value at physical radius r (zero-offset normalization)."""
        return self.rescaled(np.asarray(r, dtype=float) / self.mu)


def solve_radial(f: Callable, mu: float, *, n_nodes: int = N_NODES_DEFAULT,
                 r_max_factor: float = T_MAX_DEFAULT, j: int = 0,
                 p: float = float("nan")) -> CorrectionProfile:
    """Solve the layer equation for a source f given at physical radius."""
    f_tilde = lambda t: f(mu * np.asarray(t, dtype=float))  # noqa: E731
    return _profile_from_rescaled_source(f_tilde, mu, j=j, p=p,
                                         n_nodes=n_nodes, t_max=r_max_factor)


def _profile_from_rescaled_source(f_tilde: Callable, mu: float, *, j: int,
                                  p: float, n_nodes: int = N_NODES_DEFAULT,
                                  t_max: float = T_MAX_DEFAULT) -> CorrectionProfile:
    t, w, _ = _solve_rescaled(f_tilde, n_nodes, t_max)

    def moment_integrand(s):
        return s * (s * s - 1.0) / (s * s + 1.0) ** 3 * f_tilde(s)

    d_moment = 8.0 * improper_quad(moment_integrand)[0]

    sel = t >= t_max / 10.0
    d_slope, _, _ = _fit_far_field(t[sel], w[sel], extended=True)
    # The offset fit is truncation-limited by the omitted O(log^2 t / t^4)
    # tail, so restrict it to the outermost decade of the grid.
    sel_c = t >= t_max / 10.0
    _, c_f, b_decay = _fit_far_field(t[sel_c], w[sel_c], d_fixed=d_moment)

    spline = interpolate.CubicSpline(t, w)
    return CorrectionProfile(j=j, mu=mu, p=p, t=t, raw=w, c_f=c_f,
                             d_moment=d_moment, d_slope=d_slope,
                             _b_decay=b_decay, _spline=spline,
                             t_switch=0.5 * t_max)


@lru_cache(maxsize=256)
def _correction_profile_cached(j: int, p_key: float, mu_key: float) -> CorrectionProfile:
    p, mu = float(p_key), float(mu_key)
    if j == 1:
        closed = lambda t: omega1_tilde(mu, t)  # noqa: E731
        t = _sinh_grid(N_NODES_DEFAULT, T_MAX_DEFAULT)
        raw_c_f = float(omega1_tilde(mu, 0.0))
        raw = omega1_tilde(mu, t) + raw_c_f * z0(t)
        f1 = f_source_rescaled(1, p, mu)
        d_moment = 8.0 * improper_quad(
            lambda s: s * (s * s - 1.0) / (s * s + 1.0) ** 3 * f1(s))[0]
        tt = np.geomspace(1e4, 1e6, 60)
        d_slope, _, _ = _fit_far_field(tt, omega1_tilde(mu, tt))
        return CorrectionProfile(j=1, mu=mu, p=p, t=t, raw=raw, c_f=raw_c_f,
                                 d_moment=d_moment, d_slope=d_slope,
                                 _closed=closed)
    f_tilde = f_source_rescaled(j, p, mu)
    return _profile_from_rescaled_source(f_tilde, mu, j=j, p=p)


def correction_profile(j: int, p: float, mu: float) -> CorrectionProfile:
    """Correction layer omega^j at concentration mu and exponent p.

    j = 1 uses the closed kernel-basis combination (exact); j = 2, 3 solve the
    layer equation from the assembled sources.  Results are cached.
    """
    if j not in (1, 2, 3):
        raise ValueError("layer order j must be 1, 2 or 3")
    if j >= 2 and p == 1.0:
        raise ValueError(f"layer omega^{j} is not constructed at p = 1")
    return _correction_profile_cached(j, round(float(p), 12), round(float(mu), 12))


# ----------------------------------------------------------------------------
# far-field constants
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class DConstants:
    """Far-field slopes of the three correction layers at fixed (p, mu)."""
    d1: float
    d2: float | None
    d3: float | None
    p: float
    mu: float


def d1_closed(mu: float) -> float:
    return 4.0 * LOG8 - 8.0 - 8.0 * math.log(mu)


def d3_moment(p: float, mu: float) -> float:
    """Third-layer slope by the moment integral (no closed form exists)."""
    f3 = f_source_rescaled(3, p, mu)
    return 8.0 * improper_quad(
        lambda s: s * (s * s - 1.0) / (s * s + 1.0) ** 3 * f3(s))[0]


@lru_cache(maxsize=64)
def d3_in_log_mu(p: float) -> np.polynomial.Polynomial:
    """D^3 as a polynomial in log mu, fitted once per p.

    Every ingredient of f^3 is polynomial in log mu with fixed radial
    coefficient functions (the layer equation is linear in its source), so
    D^3(mu) is a polynomial in log mu of degree at most 6; nine sample
    points determine it to quadrature accuracy.
    """
    ls = np.linspace(-1.2, 1.2, 9)
    vals = [d3_moment(p, math.exp(l)) for l in ls]
    coeffs = np.polynomial.polynomial.polyfit(ls, vals, 6)
    return np.polynomial.Polynomial(coeffs)


def d_constants(p: float, mu: float) -> DConstants:
    """The far-field constants D^1, D^2, D^3 (the latter two None at p = 1)."""
    from .special_integrals import d2_closed
    if p == 1.0:
        return DConstants(d1=d1_closed(mu), d2=None, d3=None, p=p, mu=mu)
    return DConstants(d1=d1_closed(mu), d2=d2_closed(mu, p),
                      d3=float(d3_in_log_mu(p)(math.log(mu))), p=p, mu=mu)
