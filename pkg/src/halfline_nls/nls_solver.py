"""Nonlinear Robin problem ``i u_t + u_xx/2 = lam |u|^{p-1} u``, ``u + alpha u_x = h`` at 0.

The solution is split as ``u = w + z``: ``z`` is the boundary-driven linear
solution and ``w`` carries the initial datum and the source, with ``B w = 0``
at x = 0.  ``V = B w`` solves a Dirichlet problem and is advanced in sine space:

    V(t) = U_D(t) V(0) - i int_0^t U_D(t - s) B f(s) ds.

Each step integrates the propagator exactly against the linear interpolant
of the source between the step ends (an exponential integrator), with a few
fixed-point passes for the implicit end-point source.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .boundary_kernels import BoundaryData, BoundaryResponse, filon_moments, zero_boundary
from .spectral_transforms import (ComplexField, Grid, apply_B, check_alpha, cosine_synthesis,
                                  derivative, edge_taylor, half_line_integral, sine_coefficients,
                                  sine_synthesis, sine_to_robin)
from .trajectory import (InitialDatum, Snapshot, SolverConfigurationError, Trajectory,
                         truncation_fraction, zero_datum)

BLOWUP_FACTOR = 1e6
TRUNCATION_LIMIT = 1e-6


@dataclass(frozen=True)
class ModelParams:
    """Coupling ``lam``, power ``power`` (>= 2), Robin coefficient ``alpha`` and u0."""

    lam: complex = 1.0
    power: float = 3.0
    alpha: float = -1.0
    initial: InitialDatum = field(default_factory=zero_datum)

    def __post_init__(self):
        if not self.power >= 2:
            raise SolverConfigurationError("the power must satisfy p >= 2")
        check_alpha(self.alpha)
        if abs(self.initial(np.array([0.0]))[0]) > 1e-10:
            raise SolverConfigurationError("the initial datum must vanish at x = 0")

    def initial_field(self, grid: Grid) -> ComplexField:
        return ComplexField(grid, self.initial(grid.x), 0.0)

    def cubic_real(self) -> bool:
        """Small-data cubic regime: lam real and p = 3."""
        return np.imag(self.lam) == 0 and self.power == 3

    def compatible(self, boundary: BoundaryData, first_order: bool = False) -> bool:
        """u0(0) = h(0) = 0, and with ``derivative`` also u0'(0) = 0."""
        ok = abs(self.initial(np.array([0.0]))[0]) < 1e-10 and abs(boundary.h(0.0)) < 1e-14
        if first_order:
            d = 1e-5
            slope = (self.initial(np.array([d]))[0] - self.initial(np.array([-d]))[0]) / (2 * d)
            ok = ok and abs(slope) < 1e-8
        return ok


def nonlinearity(u: ComplexField, params: ModelParams) -> ComplexField:
    """Pointwise lam |u|^{p-1} u."""
    v = u.values
    return u.with_values(params.lam * np.abs(v) ** (params.power - 1) * v)


def _B_of_source(u, Y, lam, power):
    """B f for f = lam |u|^{p-1} u, using alpha u_x = B u - u (no division by alpha)."""
    m = np.abs(u)
    mp = m ** (power - 1)
    ph2 = np.zeros_like(u)
    nz = m > 0
    ph2[nz] = (u[nz] / m[nz]) ** 2
    d = Y - u
    f = lam * mp * u
    return f + lam * mp * (0.5 * (power + 1) * d + 0.5 * (power - 1) * ph2 * np.conj(d))


def step_weights(grid: Grid, dt: float):
    """(E, W0, W1) with E = exp(-i p^2 dt/2) and
    int_0^dt exp(-i p^2 (dt-s)/2) b(s) ds = W0 b(0) + W1 b(dt) for b linear in s.

    Exact weights keep modes with p^2 dt >> 1 (excited by a source that does
    not vanish at x = 0) from being integrated with a stiff-unstable rule.
    """
    theta = 0.5 * grid.p ** 2 * dt
    E = np.exp(-1j * theta)
    m = filon_moments(theta)
    return E, E * dt * (m[0] - m[1]), E * dt * m[1]


class _State:
    """Spectral stepper for V = B w together with the boundary response for z."""

    def __init__(self, params: ModelParams, boundary: BoundaryData, grid: Grid, dt: float):
        self.p = params
        self.h = boundary
        self.g = grid
        self.dt = dt
        self.alpha = params.alpha
        self.E, self.W0, self.W1 = step_weights(grid, dt)
        self.resp = BoundaryResponse(boundary, grid, params.alpha)
        self.saw = 1.0 - grid.x / grid.length
        u0 = params.initial_field(grid)
        Bu0 = apply_B(u0, params.alpha, edge=0.0).values
        self.V = sine_coefficients(Bu0, grid, edge=edge_taylor(Bu0, grid)[0])
        self.t = 0.0
        self._boundary_part()
        self.b = self._source(self.V)
        self.b_prev = None

    def _boundary_part(self):
        self.z, self.z0, _ = self.resp.field()
        ht = complex(self.h.h(self.resp.t))
        self.ht = ht
        self.y = ht * self.saw + sine_synthesis(self.resp.dirichlet_coefficients(), self.g)

    def fields(self, V):
        w, w0, _ = sine_to_robin(V, self.alpha, self.g)
        return w, w0

    def _source(self, V):
        if self.p.lam == 0:
            return np.zeros_like(V)
        w, w0 = self.fields(V)
        u = w + self.z
        Y = sine_synthesis(V, self.g) + self.y
        u0 = w0 + self.z0
        Bf = _B_of_source(u, Y, self.p.lam, self.p.power)
        Bf0 = _B_of_source(np.array([u0]), np.array([self.ht]), self.p.lam, self.p.power)[0]
        return sine_coefficients(Bf, self.g, edge=Bf0)

    def step(self, max_iter: int = 5, tol: float = 1e-13):
        dt = self.dt
        self.resp.advance_to(self.t + dt, max_step=dt)
        self._boundary_part()
        base = self.E * self.V - 1j * self.W0 * self.b
        if self.p.lam == 0:
            self.V = base
            self.b_prev, self.t = self.b, self.t + dt
            return 0
        guess = self.b if self.b_prev is None else 2 * self.b - self.b_prev
        it = 0
        for it in range(1, max_iter + 1):
            V = base - 1j * self.W1 * guess
            new = self._source(V)
            err = np.max(np.abs(new - guess))
            guess = new
            if err <= tol * (np.max(np.abs(new)) + 1e-300):
                break
        self.V = base - 1j * self.W1 * guess
        self.b_prev, self.b = self.b, guess
        self.t += dt
        return it

    def snapshot(self) -> Snapshot:
        w, w0 = self.fields(self.V)
        return Snapshot(self.t, w + self.z, w0 + self.z0, w, self.z.copy())


def _steps(T: float, dt: float) -> int:
    if T <= 0 or dt <= 0:
        raise SolverConfigurationError("T and dt must be positive")
    n = int(round(T / dt))
    if n < 1 or abs(n * dt - T) > 1e-9 * T:
        raise SolverConfigurationError("T must be a multiple of dt")
    return n


def _new_trajectory(grid, params, boundary, dt, solver):
    return Trajectory(grid.x.copy(), grid.length, dt, params.alpha, boundary.h,
                      meta={"solver": solver, "lam": params.lam, "power": params.power,
                            "alpha": params.alpha, "initial": params.initial.name,
                            "boundary": boundary.family, "L": grid.length, "N": grid.n_points})


def solve(params: ModelParams, h: BoundaryData | None, T: float, dt: float, grid: Grid,
          method: str = "stepped-duhamel", snapshot_every: float | None = None,
          max_iter: int = 5, tol: float = 1e-13) -> Trajectory:
    """Trajectory u = w + z on [0, T].

    ``stepped-duhamel`` restarts the Duhamel formula on every step from the
    previous end point; ``picard`` runs the global linearised iteration (short T).
    """
    h = zero_boundary() if h is None else h
    if method == "picard":
        traj, _ = picard_iterate(params, h, T, dt, grid)
        return traj
    if method != "stepped-duhamel":
        raise SolverConfigurationError(f"unknown method {method!r}")
    n = _steps(T, dt)
    if n > 10 ** 7:
        raise SolverConfigurationError("more than 1e7 steps requested")
    every = max(1, int(round((snapshot_every or dt) / dt)))
    st = _State(params, h, grid, dt)
    traj = _new_trajectory(grid, params, h, dt, "spectral")
    first = st.snapshot()
    traj.append(first)
    scale = max(float(np.max(np.abs(first.u))), 1e-12,
                float(np.max(np.abs(h.h(np.linspace(0, T, 64))))))
    iters = []
    for k in range(1, n + 1):
        iters.append(st.step(max_iter, tol))
        if k % every == 0 or k == n:
            snap = st.snapshot()
            peak = float(np.max(np.abs(snap.u)))
            if not np.isfinite(peak) or peak > BLOWUP_FACTOR * scale:
                traj.status = "aborted"
                traj.message = f"norm blow-up at t={snap.t:g}"
                break
            traj.append(snap)
    last = traj.snapshots[-1]
    frac = truncation_fraction(last.u, grid.x, grid.length)
    traj.diagnostics.update(
        fixed_point_iterations_max=int(max(iters) if iters else 0),
        truncation_fraction=frac, truncation_contaminated=frac > TRUNCATION_LIMIT)
    if frac > TRUNCATION_LIMIT:
        warnings.warn(f"{frac:.2e} of the mass is in the last 10% of the box", RuntimeWarning)
    return traj


def mass(u: np.ndarray, grid: Grid) -> float:
    """||u||_2^2 over the half-line, with end corrections at x = 0."""
    return float(half_line_integral(np.abs(u) ** 2, grid).real)


def duhamel_solve_w(params: ModelParams, f_source: Callable, T: float, dt: float,
                    grid: Grid) -> Trajectory:
    """w(t) = U(t) u0 - i int_0^t U(t - s) f(s) ds for a prescribed source.

    ``f_source(t)`` returns node values (or a physical field) of f; the time
    integral uses the trapezoid rule on the source samples, exact in the
    propagator.
    """
    n = _steps(T, dt)
    alpha = params.alpha
    E, W0, W1 = step_weights(grid, dt)

    def bcoef(t):
        f = f_source(t)
        f = f if isinstance(f, ComplexField) else ComplexField(grid, f, t)
        Bf = apply_B(f, alpha).values
        return sine_coefficients(Bf, grid, edge=edge_taylor(Bf, grid)[0])

    u0 = params.initial_field(grid)
    Bu0 = apply_B(u0, alpha, edge=0.0).values
    V = sine_coefficients(Bu0, grid, edge=edge_taylor(Bu0, grid)[0])
    b = bcoef(0.0)
    traj = _new_trajectory(grid, params, zero_boundary(), dt, "duhamel-w")

    def snap(t, V):
        w, w0, _ = sine_to_robin(V, alpha, grid)
        return Snapshot(t, w, w0, w, np.zeros_like(w))

    traj.append(snap(0.0, V))
    for k in range(1, n + 1):
        t = k * dt
        b1 = bcoef(t)
        V = E * V - 1j * (W0 * b + W1 * b1)
        b = b1
        traj.append(snap(t, V))
    return traj


@dataclass
class PicardDiagnostics:
    """X-norm sizes of successive differences u^(n+1) - u^(n), n = 1, 2, ..."""

    differences: list
    converged: bool
    iterations: int
    norm_solution: float
    time_scale: float
    message: str = ""

    @property
    def ratios(self) -> np.ndarray:
        d = np.asarray(self.differences)
        return d[1:] / d[:-1] if len(d) > 1 else np.array([])


class IterationFailure(RuntimeError):
    def __init__(self, message, diagnostics: PicardDiagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


def _xt_norm(Vs: np.ndarray, us: np.ndarray, ts: np.ndarray, grid: Grid, alpha: float,
             gamma: float, edge_values=None) -> float:
    """X_T norm of a trajectory whose V = B u parts are sine series (B u(0) = 0).

    ||u||_X^2 = ||u||^2 + ||u_x||^2 + ||u_xx||^2 + ||u_t||^2, then
    sup <t>^{-2 gamma} ||u||_X^2 + sup <t>^{-1/2 + 2 gamma} ||J u||^2 + sup <t> ||u||_inf^2.
    """
    x, p = grid.x, grid.p
    ut = np.gradient(us, ts, axis=0, edge_order=2) if len(ts) > 2 else np.zeros_like(us)
    best = [0.0, 0.0, 0.0]
    for k, t in enumerate(ts):
        u = us[k]
        Vn = sine_synthesis(Vs[k], grid)
        ux = (Vn - u) / alpha
        Vx = cosine_synthesis(p * Vs[k], grid)
        uxx = (Vx - ux) / alpha

        def sq(v):
            return float(half_line_integral(np.abs(v) ** 2, grid).real)

        X2 = sq(u) + sq(ux) + sq(uxx) + sq(ut[k])
        J2 = sq(x * u + 1j * t * ux)
        br = 1 + t * t
        best[0] = max(best[0], br ** (-gamma) * X2)
        best[1] = max(best[1], br ** (-0.25 + gamma) * J2)
        best[2] = max(best[2], br ** 0.5 * float(np.max(np.abs(u))) ** 2)
    return float(np.sqrt(sum(best)))


def picard_iterate(params: ModelParams, h: BoundaryData, T: float, dt: float, grid: Grid,
                   n_max: int = 20, tol: float = 1e-10, gamma: float | None = None,
                   time_constant: float = 1.0, raise_on_failure: bool = False):
    """Linearised iteration: u^(n+1) solves the linear Robin problem with source
    lam |u^(n)|^{p-1} u^(n); u^(1) has zero source.  z is computed once.

    Stops when the X_T norm of u^(n+1) - u^(n) is at most ``tol`` times that of
    u^(n+1).  Returns ``(trajectory, diagnostics)``.
    """
    n = _steps(T, dt)
    alpha = params.alpha
    ts = np.arange(n + 1) * dt
    resp = BoundaryResponse(h, grid, alpha)
    saw = 1.0 - grid.x / grid.length
    zs, z0s, ys, hs = [], [], [], []
    for t in ts:
        resp.advance_to(t, max_step=dt)
        z, z0, _ = resp.field()
        ht = complex(h.h(t))
        zs.append(z)
        z0s.append(z0)
        hs.append(ht)
        ys.append(ht * saw + sine_synthesis(resp.dirichlet_coefficients(), grid))
    zs, ys = np.array(zs), np.array(ys)
    E, W0, W1 = step_weights(grid, dt)
    u0 = params.initial_field(grid)
    Bu0 = apply_B(u0, alpha, edge=0.0).values
    V0 = sine_coefficients(Bu0, grid, edge=edge_taylor(Bu0, grid)[0])

    def sweep(bs):
        Vs = np.empty((n + 1, grid.n_points), dtype=complex)
        Vs[0] = V0
        for k in range(n):
            Vs[k + 1] = E * Vs[k] - 1j * (W0 * bs[k] + W1 * bs[k + 1])
        ws, w0s = [], []
        for V in Vs:
            w, w0, _ = sine_to_robin(V, alpha, grid)
            ws.append(w)
            w0s.append(w0)
        return Vs, np.array(ws), np.array(w0s)

    def sources(Vs, ws, w0s):
        if params.lam == 0:
            return np.zeros_like(Vs)
        out = np.empty_like(Vs)
        for k in range(n + 1):
            u = ws[k] + zs[k]
            Y = sine_synthesis(Vs[k], grid) + ys[k]
            Bf = _B_of_source(u, Y, params.lam, params.power)
            Bf0 = _B_of_source(np.array([w0s[k] + z0s[k]]), np.array([hs[k]]),
                               params.lam, params.power)[0]
            out[k] = sine_coefficients(Bf, grid, edge=Bf0)
        return out

    if gamma is None:
        eps = max(float(np.max(np.abs(u0.values))), float(np.max(np.abs(hs))))
        gamma = eps ** (1 / 3)
    Vs, ws, w0s = sweep(np.zeros((n + 1, grid.n_points), dtype=complex))
    us = ws + zs
    rho = _xt_norm(Vs + 0, us, ts, grid, alpha, gamma)
    scale = (time_constant * rho + 1) ** (-4 / 3)
    msg = ""
    if T > scale:
        msg = f"T={T:g} exceeds the local existence scale {scale:.3g}"
        warnings.warn(msg, RuntimeWarning)
    diffs = []
    converged = False
    it = 1
    for it in range(2, n_max + 1):
        Vn, wn, w0n = sweep(sources(Vs, ws, w0s))
        un = wn + zs
        d = _xt_norm(Vn - Vs, un - us, ts, grid, alpha, gamma)
        size = _xt_norm(Vn + 0, un, ts, grid, alpha, gamma) if d > 0 else 1.0
        diffs.append(d)
        Vs, ws, w0s, us = Vn, wn, w0n, un
        if d <= tol * size:
            converged = True
            break
    if params.lam == 0 or (np.all(us == 0)):
        converged = True
    diag = PicardDiagnostics(diffs, converged, it, _xt_norm(Vs, us, ts, grid, alpha, gamma),
                             scale, msg)
    traj = _new_trajectory(grid, params, h, dt, "picard")
    for k, t in enumerate(ts):
        traj.append(Snapshot(float(t), us[k], w0s[k] + z0s[k], ws[k], zs[k]))
    traj.diagnostics["picard"] = diag
    if not converged:
        traj.status = "failed"
        traj.message = f"no convergence after {n_max} iterates"
        if raise_on_failure:
            raise IterationFailure(traj.message, diag)
    return traj, diag


def pde_residual(traj: Trajectory, params: ModelParams, grid: Grid) -> np.ndarray:
    """||i u_t + u_xx/2 - f||_2 at interior snapshot times (u_t by centred differences,
    u_xx spectrally from the stored w and z parts)."""
    ts = traj.times
    us = traj.values("u")
    out = []
    for k in range(1, len(ts) - 1):
        ut = (us[k + 1] - us[k - 1]) / (ts[k + 1] - ts[k - 1])
        u = ComplexField(grid, us[k], ts[k])
        edge = traj.snapshots[k].u_edge
        ux = derivative(u, edge=edge)
        # the Robin condition fixes the slope at x = 0
        uxx = derivative(ux, edge=(traj.h(ts[k]) - edge) / params.alpha).values
        f = params.lam * np.abs(us[k]) ** (params.power - 1) * us[k]
        r = 1j * ut + 0.5 * uxx - f
        out.append(np.sqrt(max(float(half_line_integral(np.abs(r) ** 2, grid).real), 0.0)))
    return np.array(out)
