"""Boundary forcing h(t) and the linear boundary-driven solution z.

``z`` solves ``i z_t + z_xx/2 = 0`` on x > 0 with ``z(0,x) = 0`` and
``z(t,0) + alpha z_x(t,0) = h(t)``.  With ``y = B z`` (a Dirichlet problem)

    y(t,x) = (2/sqrt(2 i pi)) int_{x/sqrt(t)}^inf exp(i s^2/2) h(t - x^2/s^2) ds

and in sine space ``y^(p,t) = sqrt(2/pi) (h(t) - R(p,t)) / p`` with
``R(p,t) = int_0^t exp(-i p^2 (t-s)/2) h'(s) ds``.  Everything here assumes
``alpha < 0`` (no boundary bound state) and ``h(0) = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, special

from .spectral_transforms import (ComplexField, ConfigurationError, Grid, apply_B_inverse,
                                  check_alpha, sine_to_robin)

FAMILIES = ("theorem4-class", "theorem7-class", "theorem8-profile", "custom")


class QuadratureError(RuntimeError):
    """An oscillatory quadrature failed to reach its tolerance."""


@dataclass(frozen=True)
class BoundaryData:
    """h(t) with its first two derivatives and decay metadata."""

    h: Callable
    dh: Callable
    d2h: Callable
    family: str = "custom"
    amplitude: float = 0.0
    beta: float | None = None
    gamma: float | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigurationError(f"unknown boundary family {self.family!r}")
        if abs(complex(self.h(0.0))) > 1e-14:
            raise ConfigurationError("boundary data must satisfy h(0) = 0")

    @property
    def is_zero(self) -> bool:
        return self.params.get("zero", False)


def _zero(t):
    return np.zeros_like(np.asarray(t, dtype=float)) * (0 + 0j)


def zero_boundary() -> BoundaryData:
    return BoundaryData(_zero, _zero, _zero, "custom", 0.0, params={"zero": True})


def theorem4_class(eps: float, gamma: float | None = None) -> BoundaryData:
    """h = eps t^2 <t>^{-11/4-gamma}; h(0) = h'(0) = 0 and |h| ~ eps t^{-3/4-gamma}."""
    gamma = eps ** (1 / 3) if gamma is None else gamma
    a = 11 / 4 + gamma

    def h(t):
        t = np.asarray(t, dtype=float)
        return eps * t ** 2 * (1 + t * t) ** (-a / 2) + 0j

    def dh(t):
        t = np.asarray(t, dtype=float)
        s = 1 + t * t
        return eps * (2 * t * s ** (-a / 2) - a * t ** 3 * s ** (-a / 2 - 1)) + 0j

    def d2h(t):
        t = np.asarray(t, dtype=float)
        s = 1 + t * t
        return eps * (2 * s ** (-a / 2) - 5 * a * t ** 2 * s ** (-a / 2 - 1)
                      + a * (a + 2) * t ** 4 * s ** (-a / 2 - 2)) + 0j

    return BoundaryData(h, dh, d2h, "theorem4-class", eps, None, gamma,
                        {"eps": eps, "gamma": gamma})


def theorem7_class(eps: float, beta: float) -> BoundaryData:
    """h = eps t^2 (1+t)^{-2-beta}: |h| <= eps <t>^{-beta}, |h'| <= C eps <t>^{-1-beta}."""
    c = 2 + beta

    def h(t):
        t = np.asarray(t, dtype=float)
        return eps * t ** 2 * (1 + t) ** (-c) + 0j

    def dh(t):
        t = np.asarray(t, dtype=float)
        return eps * (2 * t * (1 + t) ** (-c) - c * t ** 2 * (1 + t) ** (-c - 1)) + 0j

    def d2h(t):
        t = np.asarray(t, dtype=float)
        return eps * (2 * (1 + t) ** (-c) - 4 * c * t * (1 + t) ** (-c - 1)
                      + c * (c + 1) * t ** 2 * (1 + t) ** (-c - 2)) + 0j

    return BoundaryData(h, dh, d2h, "theorem7-class", eps, beta, None,
                        {"eps": eps, "beta": beta})


def theorem8_profile(A: float, beta: float) -> BoundaryData:
    """h = A t (1+t)^{-1-beta}."""
    b = 1 + beta

    def h(t):
        t = np.asarray(t, dtype=float)
        return A * t * (1 + t) ** (-b) + 0j

    def dh(t):
        t = np.asarray(t, dtype=float)
        return A * ((1 + t) ** (-b) - b * t * (1 + t) ** (-b - 1)) + 0j

    def d2h(t):
        t = np.asarray(t, dtype=float)
        return A * (-2 * b * (1 + t) ** (-b - 1) + b * (b + 1) * t * (1 + t) ** (-b - 2)) + 0j

    return BoundaryData(h, dh, d2h, "theorem8-profile", A, beta, None, {"A": A, "beta": beta})


def single_frequency(omega: float, amplitude: float = 1.0) -> BoundaryData:
    """Probe h = amplitude (1 - e^{-t}) e^{i omega t}."""

    def h(t):
        t = np.asarray(t, dtype=float)
        return amplitude * -np.expm1(-t) * np.exp(1j * omega * t)

    def dh(t):
        t = np.asarray(t, dtype=float)
        return amplitude * np.exp(1j * omega * t) * (np.exp(-t) + 1j * omega * -np.expm1(-t))

    def d2h(t):
        t = np.asarray(t, dtype=float)
        e = np.exp(1j * omega * t)
        return amplitude * e * (-np.exp(-t) + 2j * omega * np.exp(-t)
                                - omega ** 2 * -np.expm1(-t))

    return BoundaryData(h, dh, d2h, "custom", amplitude, params={"omega": omega})


def combine(*parts: BoundaryData, weights=None) -> BoundaryData:
    """Linear combination of boundary data (family 'custom')."""
    weights = [1.0] * len(parts) if weights is None else list(weights)

    def lin(attr):
        return lambda t: sum(w * getattr(b, attr)(t) for w, b in zip(weights, parts))

    return BoundaryData(lin("h"), lin("dh"), lin("d2h"), "custom",
                        sum(abs(w) * b.amplitude for w, b in zip(weights, parts)))


# ---------------------------------------------------------------------------
# oscillatory quadrature of int_a^inf exp(i y^2/2) F(y) dy

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)
_U_EXTRA = 300.0


def _panel_edges(a: float, ymax: float, x: float, t: float) -> np.ndarray:
    """Panels from a to ymax: geometric near a, phase step <= pi/2, and
    at most 0.25 change in the time argument t - x^2/y^2."""
    edges = [a]
    e = a
    while e < ymax:
        step = min(max(e, 1e-3), 0.5 * np.pi / e)
        if x > 0:
            step = min(step, 0.125 * e ** 3 / (x * x))
        e = min(e + step, ymax)
        edges.append(e)
    return np.asarray(edges)


def _fresnel_tail(a):
    """int_a^inf exp(i y^2/2) dy."""
    S, C = special.fresnel(np.asarray(a) / np.sqrt(np.pi))
    return np.sqrt(np.pi) * ((0.5 - C) + 1j * (0.5 - S))


def oscillatory_integral(F: Callable, lower: np.ndarray, xs: np.ndarray, t: float,
                         chunk_points: int = 400_000) -> np.ndarray:
    """For each node i, ``int_{lower_i}^inf exp(i y^2/2) F(y, i) dy``.

    ``F`` must be vectorised in ``y`` with an index array of the same shape and
    must decay at least like 1/y.  The range is cut where ``y^2/2`` exceeds its
    start by a fixed margin and the remainder is closed by two integrations by parts
    in ``u = y^2/2``.
    """
    lower = np.asarray(lower, dtype=float)
    xs = np.asarray(xs, dtype=float)
    n = lower.size
    out = np.zeros(n, dtype=complex)
    ymax = np.sqrt(lower ** 2 + 2 * _U_EXTRA)
    pending_y, pending_w, pending_i = [], [], []
    count = 0

    def flush():
        nonlocal count
        if not pending_y:
            return
        y = np.concatenate(pending_y)
        w = np.concatenate(pending_w)
        idx = np.concatenate(pending_i)
        vals = np.exp(0.5j * y * y) * F(y, idx) * w
        out.real += np.bincount(idx, vals.real, minlength=n)
        out.imag += np.bincount(idx, vals.imag, minlength=n)
        pending_y.clear(), pending_w.clear(), pending_i.clear()
        count = 0

    for i in range(n):
        e = _panel_edges(lower[i], ymax[i], xs[i], t)
        lo, hi = e[:-1], e[1:]
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        y = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
        w = (half[:, None] * _GL_W[None, :]).ravel()
        pending_y.append(y)
        pending_w.append(w)
        pending_i.append(np.full(y.size, i))
        count += y.size
        if count > chunk_points:
            flush()
    flush()
    # tail: int_U^inf e^{iu} G(u) du ~ e^{iU} (iG - G' - iG''), G(u) = F(sqrt(2u))/sqrt(2u)
    U = 0.5 * ymax ** 2
    du = 1e-2 * U
    idx = np.arange(n)

    def G(u):
        yy = np.sqrt(2 * u)
        return F(yy, idx) / yy

    g0, gp, gm = G(U), G(U + du), G(U - du)
    d1 = (gp - gm) / (2 * du)
    d2 = (gp - 2 * g0 + gm) / du ** 2
    out += np.exp(1j * U) * (1j * g0 - d1 - 1j * d2)
    return out


def _dirichlet_image(h: BoundaryData, t: float, x: np.ndarray) -> np.ndarray:
    """y = B z at the points x (closed-form boundary integral)."""
    x = np.asarray(x, dtype=float)
    a = x / np.sqrt(t)
    ht = complex(h.h(t))

    def g(yy, i):
        return h.h(t - (x[i] / yy) ** 2) - ht

    total = ht * _fresnel_tail(a) + oscillatory_integral(g, a, x, t)
    return 2.0 / np.sqrt(2j * np.pi) * total


def z_exact(h: BoundaryData, t: float, grid: Grid, alpha: float = -1.0) -> ComplexField:
    """Boundary-driven solution from the closed-form boundary integral, then B^{-1}."""
    if t <= 0:
        raise ConfigurationError("z_exact needs t > 0")
    alpha = check_alpha(alpha)
    if h.is_zero:
        return ComplexField(grid, np.zeros(grid.n_points), t)
    y = _dirichlet_image(h, t, grid.x)
    return apply_B_inverse(ComplexField(grid, y, t), alpha, edge=complex(h.h(t)))


def dirichlet_image(h: BoundaryData, t: float, grid: Grid) -> ComplexField:
    """y = B z (the Dirichlet problem with boundary value h)."""
    if t <= 0:
        raise ConfigurationError("needs t > 0")
    return ComplexField(grid, _dirichlet_image(h, t, grid.x), t)


# ---------------------------------------------------------------------------
# sine-space representation, advanced in time

def filon_moments(theta: np.ndarray) -> np.ndarray:
    """E_m(theta) = int_0^1 exp(i theta s) s^m ds for m = 0..3."""
    theta = np.asarray(theta, dtype=float)
    E = np.empty((4,) + theta.shape, dtype=complex)
    small = np.abs(theta) < 2.0
    if small.any():
        th = theta[small]
        term = np.ones_like(th, dtype=complex)
        acc = [np.zeros_like(th, dtype=complex) for _ in range(4)]
        for n in range(40):
            for m in range(4):
                acc[m] += term / (n + m + 1)
            term = term * (1j * th) / (n + 1)
        for m in range(4):
            E[m][small] = acc[m]
    big = ~small
    if big.any():
        th = theta[big]
        ei = np.exp(1j * th)
        e = (ei - 1) / (1j * th)
        E[0][big] = e
        for m in range(1, 4):
            e = (ei - m * e) / (1j * th)
            E[m][big] = e
    return E


class BoundaryResponse:
    """Sine-space state R(p,t) of the boundary-driven solution, advanced exactly in p.

    Each step integrates ``exp(-i p^2 (t-s)/2)`` against the cubic Hermite
    interpolant of ``h'`` (built from h' and h''), a Filon-type rule with no
    restriction on ``p^2 dt``.
    """

    def __init__(self, h: BoundaryData, grid: Grid, alpha: float = -1.0):
        self.h = h
        self.grid = grid
        self.alpha = check_alpha(alpha)
        self.t = 0.0
        self.R = np.zeros(grid.n_points, dtype=complex)
        self._omega = 0.5 * grid.p ** 2
        self._cache_dt = None

    def _step_weights(self, dt: float):
        if self._cache_dt != dt:
            E = filon_moments(self._omega * dt)
            ph = np.exp(-1j * self._omega * dt)
            self._w = ph, [ph * dt ** (m + 1) * E[m] for m in range(4)]
            self._cache_dt = dt
        return self._w

    def step(self, dt: float):
        if self.h.is_zero:
            self.t += dt
            return
        ph, W = self._step_weights(dt)
        t0, t1 = self.t, self.t + dt
        f0, f1 = complex(self.h.dh(t0)), complex(self.h.dh(t1))
        d0, d1 = complex(self.h.d2h(t0)), complex(self.h.d2h(t1))
        c2 = (3 * (f1 - f0) / dt - 2 * d0 - d1) / dt
        c3 = (2 * (f0 - f1) / dt + d0 + d1) / dt ** 2
        self.R = ph * self.R + f0 * W[0] + d0 * W[1] + c2 * W[2] + c3 * W[3]
        self.t = t1

    def advance_to(self, t: float, max_step: float = 0.005):
        if t < self.t - 1e-14:
            raise ConfigurationError("boundary response cannot run backwards")
        span = t - self.t
        if span <= 0:
            return
        n = max(1, int(np.ceil(span / max_step - 1e-9)))
        dt = span / n
        for _ in range(n):
            self.step(dt)
        self.t = t

    def dirichlet_coefficients(self) -> np.ndarray:
        """Sine coefficients of y minus the sawtooth h(t)(1 - x/L)."""
        return -np.sqrt(2 / np.pi) * self.R / self.grid.p

    def field(self):
        """(z values at the nodes, z(t,0), z_x(t,0))."""
        ht = complex(self.h.h(self.t))
        return sine_to_robin(self.dirichlet_coefficients(), self.alpha, self.grid, edge=ht)


def z_spectral(h: BoundaryData, t: float, grid: Grid, alpha: float = -1.0,
               max_step: float = 0.005) -> ComplexField:
    """Boundary-driven solution from its sine-space representation."""
    if t <= 0:
        raise ConfigurationError("z_spectral needs t > 0")
    resp = BoundaryResponse(h, grid, alpha)
    resp.advance_to(t, max_step)
    vals, _, _ = resp.field()
    return ComplexField(grid, vals, t)


# ---------------------------------------------------------------------------
# boundary traces

def _S(tau, alpha):
    """int_0^inf exp(-y) exp(i alpha^2 y^2 / (2 tau)) dy."""
    a = -0.5j * alpha ** 2 / tau
    sa = np.sqrt(a)
    return 0.5 * np.sqrt(np.pi) / sa * special.wofz(0.5j / sa)


def _sigma_quad(func, t):
    """int_0^t tau^{-1/2} func(tau) dtau = 2 int_0^sqrt(t) func(s^2) ds."""
    top = np.sqrt(t)

    def re(s):
        return func(max(s * s, 1e-300)).real

    def im(s):
        return func(max(s * s, 1e-300)).imag

    opts = dict(epsabs=1e-15, epsrel=1e-12, limit=400)
    r, er = integrate.quad(re, 0.0, top, **opts)
    i, ei = integrate.quad(im, 0.0, top, **opts)
    return 2 * (r + 1j * i), 2 * (er + ei)


def z_traces(h: BoundaryData, t: float, alpha: float = -1.0):
    """(z(t,0), z_x(t,0), z_t(t,0)) from one-dimensional time integrals."""
    if t <= 0:
        raise ConfigurationError("z_traces needs t > 0")
    alpha = check_alpha(alpha)
    if h.is_zero:
        return 0j, 0j, 0j
    pref = -(1.0 / alpha) * 1j / np.sqrt(2j * np.pi)
    z0, _ = _sigma_quad(lambda s: (1 - _S(s, alpha)) * complex(h.h(t - s)), t)
    zx, _ = _sigma_quad(lambda s: _S(s, alpha) * complex(h.dh(t - s)), t)
    zt, _ = _sigma_quad(lambda s: (1 - _S(s, alpha)) * complex(h.dh(t - s)), t)
    return pref * z0, -np.sqrt(2 / (1j * np.pi)) * zx, pref * zt


# ---------------------------------------------------------------------------
# whole-line kernel I(s,x) = int_R e^{ipx} e^{-i p^2 s/2} p/(1 + i alpha p) dp

@dataclass(frozen=True)
class KernelSplit:
    s: float
    x: float
    full: complex
    leading: complex
    remainder: complex


def _K0(tau, x, alpha):
    """int_R e^{ipx - i p^2 tau/2} / (1 + i alpha p) dp for alpha < 0, x >= 0."""
    q = -1.0 / alpha
    zeta = np.exp(0.25j * np.pi) * (x + 1j * q * tau) / np.sqrt(2 * tau)
    return q * np.pi * np.exp(0.5j * x * x / tau) * special.wofz(zeta)


def _K1(tau, x, alpha):
    """int_R e^{ipx - i p^2 tau/2} / (1 + i alpha p)^2 dp for alpha < 0, x >= 0."""
    q = -1.0 / alpha
    zeta = np.exp(0.25j * np.pi) * (x + 1j * q * tau) / np.sqrt(2 * tau)
    dw = -2 * zeta * special.wofz(zeta) + 2j / np.sqrt(np.pi)
    dzeta = np.exp(0.75j * np.pi) * np.sqrt(tau / 2)
    return -q * q * np.pi * np.exp(0.5j * x * x / tau) * dw * dzeta


def kernel_I_closed_form(s: float, x: float, alpha: float = -1.0) -> complex:
    """Faddeeva closed form (alpha < 0, x >= 0)."""
    if alpha >= 0:
        raise ConfigurationError("closed form needs alpha < 0")
    G = np.sqrt(2 * np.pi / (1j * s)) * np.exp(0.5j * x * x / s)
    return (G - _K0(s, x, alpha)) / (1j * alpha)


def kernel_I_quadrature(s: float, x: float, alpha: float = -1.0,
                        tol: float = 1e-13) -> complex:
    """Adaptive quadrature along the steepest-descent line through p* = x/s."""
    if s <= 0:
        raise ConfigurationError("kernel needs s > 0")
    ps = x / s
    rot = np.exp(-0.25j * np.pi)

    def integrand(r):
        p = ps + rot * r
        return np.exp(1j * p * x - 0.5j * p * p * s) * p / (1 + 1j * alpha * p) * rot

    width = 12.0 / np.sqrt(s)
    opts = dict(epsabs=tol, epsrel=tol, limit=500, points=[0.0])
    re = integrate.quad(lambda r: integrand(r).real, -width - abs(ps) * 1.5, width + abs(ps) * 1.5,
                        **opts)[0]
    im = integrate.quad(lambda r: integrand(r).imag, -width - abs(ps) * 1.5, width + abs(ps) * 1.5,
                        **opts)[0]
    total = re + 1j * im
    # pole p0 = i/alpha swept by the rotation when it lies between 0 and Im(line) = ps
    p0 = 1j / alpha
    im0 = p0.imag
    if 0 < im0 < ps or ps < im0 < 0:
        res = np.exp(1j * p0 * x - 0.5j * p0 * p0 * s) * p0 / (1j * alpha)
        total += (2j * np.pi * res) if ps > 0 else (-2j * np.pi * res)
    return complex(total)


def kernel_leading(s: float, x: float, alpha: float = -1.0) -> complex:
    """Stationary-phase term at p* = x/s."""
    ps = x / s
    return np.sqrt(2 * np.pi / (1j * s)) * np.exp(0.5j * x * x / s) * ps / (1 + 1j * alpha * ps)


def kernel_I(s: float, x: float, alpha: float = -1.0) -> KernelSplit:
    if s <= 0:
        raise ConfigurationError("kernel needs s > 0")
    full = kernel_I_quadrature(s, x, alpha)
    lead = kernel_leading(s, x, alpha)
    return KernelSplit(s, x, full, lead, full - lead)


# ---------------------------------------------------------------------------
# x z(t,x) by the integrated-by-parts two-kernel representation

def weighted_moment_xz(h: BoundaryData, t: float, grid: Grid,
                       alpha: float = -1.0) -> ComplexField:
    """x z(t,x) = (i/2pi) [int h(t-tau) K1 dtau - 2 int (h - tau h')(t-tau) K0 dtau]."""
    if t <= 0:
        raise ConfigurationError("needs t > 0")
    alpha = check_alpha(alpha)
    if alpha >= 0:
        raise ConfigurationError("weighted moment representation needs alpha < 0")
    if h.is_zero:
        return ComplexField(grid, np.zeros(grid.n_points), t)
    x = grid.x
    q = -1.0 / alpha
    r2 = 1 / np.sqrt(2)

    def F(yy, i):
        xi = x[i]
        tau = (xi / yy) ** 2
        zeta = np.exp(0.25j * np.pi) * (yy * r2 + 1j * q * xi * r2 / yy)
        w = special.wofz(zeta)
        k0 = q * np.pi * w
        k1 = -q * q * np.pi * (-2 * zeta * w + 2j / np.sqrt(np.pi)) \
            * np.exp(0.75j * np.pi) * xi * r2 / yy
        hh = h.h(t - tau)
        src = hh * k1 - 2 * (hh - tau * h.dh(t - tau)) * k0
        return (2 * xi * xi / yy ** 3) * src

    vals = 1j / (2 * np.pi) * oscillatory_integral(F, x / np.sqrt(t), x, t)
    return ComplexField(grid, vals, t)
