"""Norms, decay fits, scattering profiles and the self-similar boundary profile."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special, stats

from .boundary_kernels import BoundaryData
from .spectral_transforms import (ComplexField, ConfigurationError, Grid, derivative,
                                  derivative_values, half_line_integral, make_grid,
                                  sine_coefficients)
from .trajectory import Trajectory

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


# ---------------------------------------------------------------------------
# norms

@dataclass(frozen=True)
class NormReport:
    t: float
    L2: float
    Linf: float
    H10: float
    H01: float
    Jnorm: float
    H20: float
    dt_norm: float | None
    Xnorm: float
    weights: dict = field(default_factory=dict)

    def as_row(self) -> dict:
        return {"t": self.t, "L2": self.L2, "Linf": self.Linf, "H10": self.H10,
                "H01": self.H01, "Jnorm": self.Jnorm, "Xnorm": self.Xnorm}

    def lemma_bounds(self) -> tuple[float, float]:
        """(Linf^2 - (2/t) Jnorm L2, Linf^2 - 2 ||u_x|| L2); both must be <= 0."""
        dx_norm = self.H10 - self.L2
        j = self.Linf ** 2 - 2.0 / self.t * self.Jnorm * self.L2 if self.t > 0 else -np.inf
        return j, self.Linf ** 2 - 2.0 * dx_norm * self.L2


def theorem7_weights(t: float, beta: float, p: float, eps: float) -> dict:
    """phi(t), psi(t) and gamma_1, the time weights used with theorem7-class forcing."""
    br = np.sqrt(1 + t * t)
    if beta < 0.75:
        phi = psi = br ** (0.75 - beta)
    elif beta == 0.75:
        phi, psi = np.log(br) ** 2, np.log(br)
    else:
        phi = psi = 1.0
    gamma1 = eps ** (2 * (p - 1) / 3) if np.isclose(beta, 0.5 + 1 / (p - 1)) else 0.0
    return {"phi": float(phi), "psi": float(psi), "gamma1": float(gamma1)}


def _sq(v, grid):
    return max(float(half_line_integral(np.abs(v) ** 2, grid).real), 0.0)


def compute_norms(u: ComplexField, t: float | None = None, u_edge: complex | None = None,
                  ut: np.ndarray | None = None, gamma: float = 0.0,
                  theorem7: dict | None = None) -> NormReport:
    """Norms of a physical field; derivatives are spectral, integrals end-corrected.

    ``ut`` (node values of u_t) enters the X norm when given.  ``theorem7`` holds
    ``beta``, ``p`` and ``eps`` to attach the theorem7-class weights.
    """
    if u.rep != "physical":
        raise ConfigurationError("compute_norms needs a physical field")
    g = u.grid
    t = u.t if t is None else t
    v = u.values
    ux = derivative_values(v, g, u_edge)
    uxx = derivative(u.with_values(ux)).values
    l2 = np.sqrt(_sq(v, g))
    edge_abs = abs(u_edge) if u_edge is not None else 0.0
    linf = float(max(np.max(np.abs(v)), edge_abs))
    dxn = np.sqrt(_sq(ux, g))
    xn = np.sqrt(_sq(g.x * v, g))
    jn = np.sqrt(_sq(g.x * v + 1j * t * ux, g))
    d2 = np.sqrt(_sq(uxx, g))
    dtn = None if ut is None else np.sqrt(_sq(ut, g))
    br2 = 1 + t * t
    X2 = l2 ** 2 + dxn ** 2 + d2 ** 2 + (dtn or 0.0) ** 2
    xnorm = np.sqrt(br2 ** (-gamma) * X2 + br2 ** (-0.25 + gamma) * jn ** 2 + np.sqrt(br2) * linf ** 2)
    weights = {"gamma": gamma}
    if theorem7:
        weights.update(theorem7_weights(t, theorem7["beta"], theorem7["p"], theorem7["eps"]))
    return NormReport(float(t), float(l2), linf, float(l2 + dxn), float(l2 + xn), float(jn),
                      float(l2 + d2), None if dtn is None else float(dtn), float(xnorm), weights)


def trajectory_norms(traj: Trajectory, gamma: float = 0.0, theorem7: dict | None = None):
    """NormReport per snapshot; u_t from centred differences (one-sided
    second-order at the ends)."""
    g = make_grid(traj.length, len(traj.x))
    ts = traj.times
    us = traj.values("u")
    ut = np.gradient(us, ts, axis=0, edge_order=2) if len(ts) > 2 else [None] * len(ts)
    out = []
    for k, s in enumerate(traj.snapshots):
        out.append(compute_norms(ComplexField(g, s.u, s.t), s.t, s.u_edge, ut[k], gamma, theorem7))
    return out


# ---------------------------------------------------------------------------
# decay fits

@dataclass(frozen=True)
class DecayFit:
    exponent: float
    intercept: float
    window: tuple
    rms: float
    halfwidth: float
    samples: int


def fit_decay_exponent(times, values, window: tuple | None = None) -> DecayFit:
    """Least-squares slope of log(value) against log(t) over the window."""
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    lo, hi = (t.min(), t.max()) if window is None else window
    if not lo < hi:
        raise ConfigurationError("fit window needs t_min < t_max")
    m = (t >= lo) & (t <= hi)
    if m.sum() < 10:
        raise ConfigurationError(f"fit window holds {m.sum()} samples; at least 10 needed")
    if np.any(v[m] <= 0):
        raise ConfigurationError("values in the fit window must be positive")
    lx, ly = np.log(t[m]), np.log(v[m])
    r = stats.linregress(lx, ly)
    resid = ly - (r.intercept + r.slope * lx)
    half = float(stats.t.ppf(0.975, m.sum() - 2) * r.stderr)
    return DecayFit(float(r.slope), float(r.intercept), (float(lo), float(hi)),
                    float(np.sqrt(np.mean(resid ** 2))), half, int(m.sum()))


# ---------------------------------------------------------------------------
# scattering profile

@dataclass
class ScatterState:
    xi: np.ndarray
    times: np.ndarray
    profile: np.ndarray
    interaction: np.ndarray
    A: np.ndarray
    B: np.ndarray
    phase: np.ndarray
    psi_plus: np.ndarray
    phi_plus: np.ndarray
    cauchy: dict
    alpha: float
    lam: complex


def _h_moment(h: BoundaryData, omega: np.ndarray, a: float, b: float | None):
    """int_a^b e^{i omega tau} h(tau) dtau (b = None means infinity)."""
    out = np.zeros(omega.shape, dtype=complex)
    for k, om in enumerate(omega):
        total = 0j
        for part, sign in ((lambda s: complex(h.h(s)).real, 1.0), (lambda s: complex(h.h(s)).imag, 1j)):
            if b is None:
                c = integrate.quad(part, a, np.inf, weight="cos", wvar=om, limlst=200)[0]
                s = integrate.quad(part, a, np.inf, weight="sin", wvar=om, limlst=200)[0]
            else:
                c = integrate.quad(part, a, b, weight="cos", wvar=om, limit=400)[0]
                s = integrate.quad(part, a, b, weight="sin", wvar=om, limit=400)[0]
            total += sign * (c + 1j * s)
        out[k] = total
    return out


def _cumulative_moment(h: BoundaryData, omega: np.ndarray, times: np.ndarray):
    """int_0^{t_k} e^{i omega tau} h(tau) dtau for all snapshot times (panel Gauss rule)."""
    out = np.zeros((len(times), len(omega)), dtype=complex)
    acc = np.zeros(len(omega), dtype=complex)
    prev = 0.0
    step = 0.25 if omega.size == 0 else min(0.25, np.pi / (4 * max(omega.max(), 1e-12)))
    for k, t in enumerate(times):
        if t > prev:
            n = max(1, int(np.ceil((t - prev) / step)))
            edges = np.linspace(prev, t, n + 1)
            mid, half = 0.5 * (edges[1:] + edges[:-1]), 0.5 * (edges[1:] - edges[:-1])
            tau = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
            w = (half[:, None] * _GL_W[None, :]).ravel()
            hv = np.asarray(h.h(tau), dtype=complex) * w
            acc = acc + np.exp(1j * np.outer(omega, tau)) @ hv
            prev = t
        out[k] = acc
    return out


def interaction_profile(traj: Trajectory, grid: Grid | None = None) -> np.ndarray:
    """F_s B U(-t) u(t) on the wavenumber grid, one row per snapshot."""
    g = make_grid(traj.length, len(traj.x)) if grid is None else grid
    rows = []
    for s in traj.snapshots:
        Bu = s.u + traj.alpha * derivative_values(s.u, g, s.u_edge)
        coef = sine_coefficients(Bu, g, edge=traj.h(s.t))
        rows.append(np.exp(0.5j * g.p ** 2 * s.t) * coef)
    return np.array(rows)


def extract_scattering_profile(traj: Trajectory, lam: complex, h: BoundaryData,
                               xi_band: tuple = (0.5, 2.0), t_start: float = 1.0,
                               cauchy_s=(25.0, 50.0, 100.0), min_horizon: float = 20.0,
                               ) -> ScatterState:
    """Modified-scattering profile on a fixed band of wavenumbers.

    phi + A + B = F_s B U(-t) u, with A(xi) = (i xi/sqrt(2 pi)) int_0^inf e^{i xi^2 tau/2} h
    and B(t, xi) the part of that integral beyond t.  The phase uses
    |phi + A|^2 / (1 + alpha^2 xi^2), the local intensity of u along x = xi t.
    """
    ts = traj.times
    if ts.max() < min_horizon:
        raise ConfigurationError(f"scattering extraction needs t_max >= {min_horizon}")
    g = make_grid(traj.length, len(traj.x))
    sel = (g.p >= xi_band[0]) & (g.p <= xi_band[1])
    xi = g.p[sel]
    keep = ts >= t_start
    times = ts[keep]
    full = interaction_profile(traj, g)[keep][:, sel]
    omega = 0.5 * xi ** 2
    pref = 1j * xi / np.sqrt(2 * np.pi)
    if getattr(h, "is_zero", False):
        A = np.zeros_like(xi, dtype=complex)
        Bt = np.zeros_like(full)
    else:
        total = _h_moment(h, omega, 0.0, None)
        A = pref * total
        Bt = -pref * (total[None, :] - _cumulative_moment(h, omega, times))
    phiA = full - Bt
    dens = np.abs(phiA) ** 2 / (1 + (traj.alpha * xi) ** 2)
    integrand = dens / times[:, None]
    phase = np.real(lam) * np.concatenate(
        [np.zeros((1, len(xi))), integrate.cumulative_trapezoid(integrand, times, axis=0)])
    if np.imag(lam) != 0:
        phase = phase + 1j * np.imag(lam) * np.concatenate(
            [np.zeros((1, len(xi))), integrate.cumulative_trapezoid(integrand, times, axis=0)])
    profile = phiA * np.exp(1j * phase)
    cauchy = {}
    for s in cauchy_s:
        if 2 * s <= times.max() + 1e-9 and s >= times.min() - 1e-9:
            i1 = int(np.argmin(np.abs(times - s)))
            i2 = int(np.argmin(np.abs(times - 2 * s)))
            cauchy[float(s)] = float(np.max(np.abs(profile[i2] - profile[i1])))
    return ScatterState(xi, times, profile, full, A, Bt, phase, profile[-1].copy(),
                        (phiA[-1] - A).copy(), cauchy, traj.alpha, lam)


def asymptotic_residual(traj: Trajectory, scatter: ScatterState, t_min: float = 1.0):
    """sup over x with x/t in the band of |u - ansatz|, per snapshot t >= t_min, where

    ansatz = e^{i x^2/2t} / (i sqrt(i t)) * Psi_+(x/t) e^{-i lam |Psi_+|^2 log t / (1 + alpha^2 xi^2)}
             / (1 + i alpha x/t).
    Also returns the amplitude-only residual | |u| - |Psi_+(x/t)| / sqrt(t (1 + alpha^2 xi^2)) |.
    """
    xi = scatter.xi
    a = scatter.alpha
    psi = scatter.psi_plus
    rate = scatter.lam * np.abs(psi) ** 2 / (1 + (a * xi) ** 2)
    times, res, amp = [], [], []
    for s in traj.snapshots:
        t = s.t
        if t < t_min:
            continue
        x = traj.x
        z = x / t
        m = (z >= xi[0]) & (z <= xi[-1])
        if m.sum() < 2:
            continue
        zz = z[m]
        P = np.interp(zz, xi, psi.real) + 1j * np.interp(zz, xi, psi.imag)
        r = np.interp(zz, xi, rate.real) + 1j * np.interp(zz, xi, rate.imag)
        ans = (np.exp(0.5j * x[m] ** 2 / t) / (1j * np.sqrt(1j * t)) * P
               * np.exp(-1j * r * np.log(t)) / (1 + 1j * a * zz))
        times.append(t)
        res.append(float(np.max(np.abs(s.u[m] - ans))))
        amp.append(float(np.max(np.abs(np.abs(s.u[m]) - np.abs(ans)))))
    return np.array(times), np.array(res), np.array(amp)


# ---------------------------------------------------------------------------
# self-similar boundary profile

LAMBDA_VARIANTS = ("statement", "closing")


@dataclass(frozen=True)
class ProfileValue:
    value: complex
    error: float
    variant: str


def _cquad(f, a, b, **kw):
    r = integrate.quad(lambda s: f(s).real, a, b, **kw)
    i = integrate.quad(lambda s: f(s).imag, a, b, **kw)
    return r[0] + 1j * i[0], r[1] + i[1]


def lambda_profile(xi: float, beta: float, alpha: float = -1.0, variant: str = "statement",
                   tol: float = 1e-11) -> ProfileValue:
    """Lambda(xi) = (1/(i sqrt(2 i pi))) int_0^1 e^{i xi^2/(2(1-y))} y^{-beta} (1-y)^{-1/2} m(y) dy

    with m = 1 ("statement") or m = xi / (2(1-y) - i alpha xi) ("closing").
    Near y = 0 the substitution y = s^{1/(1-beta)} removes the singularity; near
    y = 1 the phase variable v = xi^2/(2(1-y)) turns the tail into a Fourier
    integral on [xi^2, inf).
    """
    if not 0 < beta < 1:
        raise ConfigurationError("beta must lie in (0, 1)")
    if variant not in LAMBDA_VARIANTS:
        raise ConfigurationError(f"unknown variant {variant!r}")
    if xi < 0:
        raise ConfigurationError("xi must be non-negative")
    if variant == "closing" and xi == 0:
        return ProfileValue(0j, 0.0, variant)
    pref = 1.0 / (1j * np.sqrt(2j * np.pi))

    def mult(one_minus_y):
        if variant == "statement":
            return 1.0
        return xi / (2 * one_minus_y - 1j * alpha * xi)

    e = 1.0 / (1.0 - beta)
    opts = dict(epsabs=tol, epsrel=tol, limit=500)

    def head(s):  # y in [0, 1/2], y = s^e, y^{-beta} dy = e ds
        y = s ** e
        return np.exp(0.5j * xi * xi / (1 - y)) * (1 - y) ** -0.5 * mult(1 - y) * e

    top = 0.5 ** (1 - beta)
    v1, err = _cquad(head, 0.0, top, **opts)
    if xi == 0:
        def tail0(r):  # 1 - y = r^2
            y = 1 - r * r
            return y ** -beta * 2.0
        v2, e2 = _cquad(tail0, 0.0, np.sqrt(0.5), **opts)
    else:
        v0 = xi * xi  # y = 1/2

        def amp(v):
            omy = xi * xi / (2 * v)
            return (1 - omy) ** -beta * (xi / (np.sqrt(2) * v ** 1.5)) * mult(omy)

        # int e^{iv} (ar + i ai) dv from the cosine and sine transforms of ar and ai
        v2, e2 = 0j, 0.0
        for part, unit in ((lambda v: amp(v).real, 1.0), (lambda v: amp(v).imag, 1j)):
            c, ec = integrate.quad(part, v0, np.inf, weight="cos", wvar=1.0, limlst=400)
            s, es = integrate.quad(part, v0, np.inf, weight="sin", wvar=1.0, limlst=400)
            v2 += unit * (c + 1j * s)
            e2 += ec + es
    return ProfileValue(complex(pref * (v1 + v2)), float(abs(pref) * (err + e2)), variant)


def lambda_at_zero_oracle(beta: float) -> complex:
    """Statement variant at xi = 0: Beta(1 - beta, 1/2) / (i sqrt(2 i pi))."""
    return special.beta(1 - beta, 0.5) / (1j * np.sqrt(2j * np.pi))


@dataclass
class ProfileReport:
    times: np.ndarray
    xi: np.ndarray
    sup_difference: dict
    selected: str
    fit: DecayFit | None
    amplitude_fit: DecayFit | None
    in_band: bool
    scaled: np.ndarray


def sample_self_similar(traj: Trajectory, xi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """u(t, xi sqrt t) for every snapshot with t > 0 (linear interpolation, u(t,0) included)."""
    times, rows = [], []
    xs = np.concatenate([[0.0], traj.x])
    for s in traj.snapshots:
        if s.t <= 0:
            continue
        vals = np.concatenate([[s.u_edge], s.u])
        pts = xi * np.sqrt(s.t)
        rows.append(np.interp(pts, xs, vals.real) + 1j * np.interp(pts, xs, vals.imag))
        times.append(s.t)
    return np.array(times), np.array(rows)


def theorem8_profile_check(traj: Trajectory, A: float, beta: float, p: float,
                           alpha: float = -1.0, xi=None, variants=LAMBDA_VARIANTS,
                           control: Trajectory | None = None, fit_window=None) -> ProfileReport:
    """Compare t^{beta - 1/2} u(t, xi sqrt t) with A Lambda(xi) for each Lambda variant.

    The variant whose difference is smallest at the last time of ``control`` (a
    linear run; ``traj`` itself if omitted) is reported as selected.
    """
    if not (0.5 + 1 / (p - 1) < beta < 1):
        warnings.warn(f"beta={beta} lies outside the band (1/2 + 1/(p-1), 1)", RuntimeWarning)
        in_band = False
    else:
        in_band = True
    xi = np.linspace(0.0, 4.0, 81) if xi is None else np.asarray(xi, dtype=float)
    profiles = {v: np.array([lambda_profile(float(s), beta, alpha, v).value for s in xi])
                for v in variants}
    times, samples = sample_self_similar(traj, xi)
    scaled = samples * times[:, None] ** (beta - 0.5)
    diffs = {v: np.max(np.abs(scaled - A * prof[None, :]), axis=1) for v, prof in profiles.items()}
    if A != 0:
        diffs = {v: d / abs(A) for v, d in diffs.items()}
    if control is not None:
        ct, cs = sample_self_similar(control, xi)
        last = cs[-1] * ct[-1] ** (beta - 0.5)
        score = {v: np.max(np.abs(last - A * prof)) for v, prof in profiles.items()}
    else:
        score = {v: d[-1] for v, d in diffs.items()}
    selected = min(score, key=score.get)
    fit = amp_fit = None
    window = fit_window or (times.min(), times.max())
    m = (times >= window[0]) & (times <= window[1])
    if m.sum() >= 10 and np.all(diffs[selected][m] > 0):
        fit = fit_decay_exponent(times, diffs[selected], window)
    peak = np.max(np.abs(samples), axis=1)
    if m.sum() >= 10 and np.all(peak[m] > 0):
        amp_fit = fit_decay_exponent(times, peak, window)
    return ProfileReport(times, xi, diffs, selected, fit, amp_fit, in_band, scaled)
