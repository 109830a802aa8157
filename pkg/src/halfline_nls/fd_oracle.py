"""Crank-Nicolson reference solver with a ghost-point Robin condition.

Deliberately independent of the spectral code: it only uses numpy, scipy's
banded solver and the plain containers in ``trajectory``.  Unknowns are
u_0..u_N at x_j = j dx with dx = L/(N+1) and u_{N+1} = 0.  The ghost value
u_{-1} is eliminated from ``u_0 + alpha (u_1 - u_{-1})/(2 dx) = h(t)``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.linalg import solve_banded

from .trajectory import (InitialDatum, Snapshot, SolverConfigurationError, Trajectory,
                         truncation_fraction, weighted_mass)


@dataclass(frozen=True)
class FDConfig:
    """Grid, step and model for the oracle.

    ``params`` needs ``lam``, ``power``, ``alpha`` and ``initial`` (an
    :class:`InitialDatum`); ``boundary`` needs ``h(t)`` or may be None.
    """

    L: float
    N: int
    dt: float
    params: Any
    boundary: Any = None
    theta: float = 0.5

    def __post_init__(self):
        if not (self.L > 0 and self.dt > 0 and self.N >= 4):
            raise SolverConfigurationError("need L > 0, dt > 0, N >= 4")
        if not 0.5 <= self.theta <= 1.0:
            raise SolverConfigurationError("theta must lie in [1/2, 1]")
        if self.params.alpha == 0:
            raise SolverConfigurationError("alpha = 0 is the Dirichlet problem")

    @property
    def dx(self) -> float:
        return self.L / (self.N + 1)


def _nonlinear(u, lam, power):
    return lam * np.abs(u) ** (power - 1) * u


def _operator(cfg: FDConfig):
    """Tridiagonal second difference A (ghost eliminated) and boundary weight g0."""
    n, dx, a = cfg.N + 1, cfg.dx, cfg.params.alpha
    main = np.full(n, -2.0 / dx ** 2)
    upper = np.full(n - 1, 1.0 / dx ** 2)
    lower = np.full(n - 1, 1.0 / dx ** 2)
    main[0] = (-2.0 + 2.0 * dx / a) / dx ** 2
    upper[0] = 2.0 / dx ** 2
    g0 = -2.0 / (a * dx)  # multiplies h(t) in row 0
    return main, upper, lower, g0


def crank_nicolson_robin(cfg: FDConfig, T: float, snapshot_every: float | None = None,
                         start: float = 0.0) -> Trajectory:
    """Integrate to time T; one predictor and one corrector per step for the nonlinearity."""
    if T <= 0:
        raise SolverConfigurationError("T must be positive")
    prm = cfg.params
    h = (lambda t: 0j) if cfg.boundary is None else (lambda t: complex(cfg.boundary.h(t)))
    lam, power, alpha = complex(prm.lam), float(prm.power), float(prm.alpha)
    main, upper, lower, g0 = _operator(cfg)
    th = cfg.theta
    c = 0.5j * cfg.dt  # u_t = (i/2)(A u + g) - i f
    ab = np.zeros((3, cfg.N + 1), dtype=complex)
    ab[0, 1:] = -c * th * upper
    ab[1] = 1.0 - c * th * main
    ab[2, :-1] = -c * th * lower
    x = np.arange(cfg.N + 1) * cfg.dx
    init: InitialDatum = prm.initial
    u = init(x)
    nsteps = int(round(T / cfg.dt))
    if abs(nsteps * cfg.dt - T) > 1e-9 * T:
        raise SolverConfigurationError("T must be a multiple of dt")
    every = max(1, int(round((snapshot_every or cfg.dt) / cfg.dt)))
    traj = Trajectory(x[1:], cfg.L, cfg.dt, alpha, h, meta={"solver": "crank-nicolson"})
    traj.append(Snapshot(start, u[1:].copy(), u[0]))
    mass0 = weighted_mass(u[0], u[1:], cfg.dx)
    drift = 0.0
    nonlinear = lam != 0

    def apply_A(v):
        out = main * v
        out[:-1] += upper * v[1:]
        out[1:] += lower * v[:-1]
        return out

    for n in range(nsteps):
        t0 = start + n * cfg.dt
        t1 = t0 + cfg.dt
        rhs = u + c * (1 - th) * apply_A(u)
        rhs[0] += c * g0 * ((1 - th) * h(t0) + th * h(t1))
        if nonlinear:
            f0 = _nonlinear(u, lam, power)
            pred = solve_banded((1, 1), ab, rhs - 1j * cfg.dt * f0)
            f_half = _nonlinear(0.5 * (u + pred), lam, power)
            u = solve_banded((1, 1), ab, rhs - 1j * cfg.dt * f_half)
        else:
            u = solve_banded((1, 1), ab, rhs)
        if not np.all(np.isfinite(u)):
            traj.status, traj.message = "aborted", f"non-finite values at t={t1:g}"
            break
        if (n + 1) % every == 0 or n == nsteps - 1:
            traj.append(Snapshot(t1, u[1:].copy(), u[0]))
    mass = weighted_mass(u[0], u[1:], cfg.dx)
    drift = abs(mass - mass0)
    frac = truncation_fraction(u[1:], x[1:], cfg.L)
    traj.diagnostics.update(mass_initial=mass0, mass_final=mass, mass_drift=drift,
                            truncation_fraction=frac, truncation_contaminated=frac > 1e-6)
    if frac > 1e-6:
        warnings.warn(f"{frac:.2e} of the mass is in the last 10% of the box", RuntimeWarning)
    return traj


def robin_residual(traj: Trajectory) -> np.ndarray:
    """|u(t,0) + alpha u_x(t,0) - h(t)| per snapshot, u_x from a one-sided
    second-order stencil through u(t,0), u_1 and u_2."""
    if len(traj.x) < 2:
        raise SolverConfigurationError("need at least two nodes next to the boundary")
    dx = traj.dx
    out = []
    for s in traj.snapshots:
        ux = (-3 * s.u_edge + 4 * s.u[0] - s.u[1]) / (2 * dx)
        out.append(abs(s.u_edge + traj.alpha * ux - traj.h(s.t)))
    return np.array(out)
