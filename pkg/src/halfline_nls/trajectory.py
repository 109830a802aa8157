"""Plain containers shared by the spectral solver and the finite-difference oracle.

Only numpy is used here, so the oracle can depend on this module without
touching any of the spectral machinery.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class SolverConfigurationError(ValueError):
    """Invalid solver configuration."""


@dataclass(frozen=True)
class InitialDatum:
    """Named initial datum u0(x), evaluable at any points (including x = 0)."""

    name: str
    func: Callable
    params: dict = field(default_factory=dict)
    free_solution: Callable | None = None

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.func(np.asarray(x, dtype=float)), dtype=complex)


def zero_datum() -> InitialDatum:
    return InitialDatum("zero", lambda x: np.zeros_like(x) + 0j, {},
                        lambda x, t: np.zeros_like(x) + 0j)


def gaussian_odd(eps: float, x0: float = 10.0, width: float = 1.0,
                 k0: float = 0.0) -> InitialDatum:
    """Odd pair of Gaussians at +-x0; ``free_solution`` is the whole-line evolution
    of the odd extension, exact for the Dirichlet problem and, while the packet
    stays away from x = 0, for the Robin problem as well."""

    def packet(x, t, sign):
        c = width ** 2 + 1j * t
        y = x - sign * x0 - sign * k0 * t
        return (width / np.sqrt(c)) * np.exp(-y * y / (2 * c) + 1j * sign * k0 * (x - sign * x0)
                                             - 0.5j * k0 ** 2 * t)

    def free(x, t):
        x = np.asarray(x, dtype=float)
        return eps * (packet(x, t, 1) - packet(x, t, -1))

    return InitialDatum("gaussian-odd", lambda x: free(x, 0.0),
                        {"eps": eps, "x0": x0, "width": width, "k0": k0}, free)


def robin_compatible(eps: float, width: float = 1.0, alpha: float = -1.0) -> InitialDatum:
    """eps (s^3 - 3 (alpha/width) s^2) exp(-s^2/2), s = x/width.

    Satisfies u0(0) = u0'(0) = 0 and (u0 + alpha u0')''(0) = 0.
    """

    def f(x):
        s = x / width
        return eps * (s ** 3 - 3 * (alpha / width) * s ** 2) * np.exp(-0.5 * s * s) + 0j

    return InitialDatum("robin-compatible", f, {"eps": eps, "width": width, "alpha": alpha})


@dataclass
class Snapshot:
    """Solution at one time: u at the interior nodes, its boundary value, and
    (for the spectral path) the parts w and z with u = w + z."""

    t: float
    u: np.ndarray
    u_edge: complex
    w: np.ndarray | None = None
    z: np.ndarray | None = None


@dataclass
class Trajectory:
    """Ordered snapshots on the nodes x_j = j L/(N+1), j = 1..N."""

    x: np.ndarray
    length: float
    dt: float
    alpha: float
    boundary_h: Callable | None = None
    snapshots: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    status: str = "complete"
    message: str = ""
    diagnostics: dict = field(default_factory=dict)

    def append(self, snap: Snapshot):
        if self.snapshots and snap.t <= self.snapshots[-1].t:
            raise SolverConfigurationError("snapshot times must increase strictly")
        self.snapshots.append(snap)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    @property
    def dx(self) -> float:
        return self.length / (len(self.x) + 1)

    def values(self, part: str = "u") -> np.ndarray:
        return np.array([getattr(s, part) for s in self.snapshots])

    def at(self, t: float) -> Snapshot:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.snapshots[i].t - t) > 1e-9 * max(1.0, abs(t)):
            raise KeyError(f"no snapshot at t={t}")
        return self.snapshots[i]

    def h(self, t: float) -> complex:
        return 0j if self.boundary_h is None else complex(self.boundary_h(t))

    @property
    def ok(self) -> bool:
        return self.status == "complete"


def weighted_mass(u_edge: complex, u: np.ndarray, dx: float) -> float:
    """dx (|u_0|^2/2 + sum |u_j|^2): the trapezoid mass on the closed nodes."""
    return float(dx * (0.5 * abs(u_edge) ** 2 + np.sum(np.abs(u) ** 2)))


def truncation_fraction(u: np.ndarray, x: np.ndarray, length: float) -> float:
    """Share of the mass sitting in the last 10% of the box."""
    m = np.abs(u) ** 2
    tot = m.sum()
    return float(m[x > 0.9 * length].sum() / tot) if tot > 0 else 0.0
