"""Grids, sine/cosine transforms and the free Robin evolution on a truncated half-line.

Conventions used throughout the package
---------------------------------------
* Nodes ``x_j = j*dx`` (j = 1..N) with ``dx = L/(N+1)``; wavenumbers ``p_k = k*pi/L``.
* Sine transform ``F_s f(p) = sqrt(2/pi) * int_0^inf sin(p x) f(x) dx`` discretised
  by the trapezoid rule on the nodes.  The same formula with ``dp = pi/L`` inverts
  it, so ``F_s`` is an involution.
* Cosine transform on the closed node set ``{0, x_1, ..., x_N, L}`` with trapezoid
  weights (a DCT-I), returning ``N + 2`` coefficients for ``p_0 = 0 .. p_{N+1}``.
* ``B = 1 + alpha d/dx``.  Fields are split into an even corrector (cosine series)
  and a remainder whose odd extension is smooth (sine series); on that pair ``B``,
  ``B^{-1}`` and ``d/dx`` are exact multipliers.
* Free flow of ``i u_t + u_xx/2 = 0`` is the multiplier ``exp(-i p^2 t/2)``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

PHYSICAL = "physical"
SINE = "sine-spectral"
COSINE = "cosine-spectral"
_REPS = (PHYSICAL, SINE, COSINE)

# one-sided fit used to read Taylor data of a field at x = 0
_FIT_POINTS = 16
_FIT_DEGREE = 13
_EVEN_ORDER = 6


class ConfigurationError(ValueError):
    """Invalid grid, parameter or run configuration."""


class RepresentationError(TypeError):
    """Operation applied to a field in the wrong representation."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Grid:
    """Uniform grid on (0, L) with N interior nodes (DST-I layout)."""

    length: float
    n_points: int
    x: np.ndarray = field(init=False, repr=False, compare=False)
    p: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        L, N = self.length, self.n_points
        if not np.isfinite(L) or L <= 0:
            raise ConfigurationError(f"grid length must be positive, got {L!r}")
        if int(N) != N or N < 4:
            raise ConfigurationError(f"grid needs at least 4 interior nodes, got {N!r}")
        object.__setattr__(self, "n_points", int(N))
        object.__setattr__(self, "length", float(L))
        j = np.arange(1, int(N) + 1)
        object.__setattr__(self, "x", _readonly(j * (L / (N + 1))))
        object.__setattr__(self, "p", _readonly(j * (np.pi / L)))

    @property
    def dx(self) -> float:
        return self.length / (self.n_points + 1)

    @property
    def dp(self) -> float:
        return np.pi / self.length

    @property
    def x_closed(self) -> np.ndarray:
        """Nodes including both ends, ``0, x_1, ..., x_N, L``."""
        return np.arange(self.n_points + 2) * self.dx

    @property
    def p_closed(self) -> np.ndarray:
        return np.arange(self.n_points + 2) * self.dp

    def __hash__(self):
        return hash((self.length, self.n_points))


def make_grid(L: float, N: int) -> Grid:
    return Grid(float(L), N)


@dataclass(frozen=True)
class ComplexField:
    """Complex samples of a function on a grid, at time ``t``.

    ``rep`` is one of ``"physical"`` (values at the interior nodes),
    ``"sine-spectral"`` (coefficients at p_1..p_N) or ``"cosine-spectral"``
    (coefficients at p_0..p_{N+1}, so N + 2 entries).
    """

    grid: Grid
    values: np.ndarray
    t: float = 0.0
    rep: str = PHYSICAL

    def __post_init__(self):
        if self.rep not in _REPS:
            raise RepresentationError(f"unknown representation {self.rep!r}")
        v = np.array(self.values, dtype=complex)
        expected = self.grid.n_points + (2 if self.rep == COSINE else 0)
        if v.shape != (expected,):
            raise ConfigurationError(
                f"{self.rep} field needs {expected} values, got shape {v.shape}")
        if self.t < 0:
            raise ConfigurationError("field time stamp must be non-negative")
        object.__setattr__(self, "values", _readonly(v))

    def with_values(self, values, t: float | None = None, rep: str | None = None):
        return ComplexField(self.grid, values, self.t if t is None else t,
                            self.rep if rep is None else rep)

    def _check_same(self, other):
        if not isinstance(other, ComplexField):
            return False
        if other.grid != self.grid or other.rep != self.rep:
            raise RepresentationError("fields live on different grids or representations")
        return True

    def __add__(self, other):
        if self._check_same(other):
            return self.with_values(self.values + other.values)
        return self.with_values(self.values + other)

    def __sub__(self, other):
        if self._check_same(other):
            return self.with_values(self.values - other.values)
        return self.with_values(self.values - other)

    def __mul__(self, c):
        if isinstance(c, ComplexField):
            self._check_same(c)
            return self.with_values(self.values * c.values)
        return self.with_values(self.values * c)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)


def field_from_function(grid: Grid, func, t: float = 0.0) -> ComplexField:
    return ComplexField(grid, func(grid.x), t)


@dataclass(frozen=True)
class OperatorParams:
    """Robin coefficient of ``B = 1 + alpha d/dx``."""

    alpha: float = -1.0

    def __post_init__(self):
        check_alpha(self.alpha)


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if alpha == 0 or not np.isfinite(alpha):
        raise ConfigurationError("Robin coefficient alpha must be finite and nonzero")
    if alpha > 0:
        warnings.warn(
            "alpha > 0 admits the boundary bound state exp(-x/alpha); the sine-space "
            "pipeline B^-1 U_D B does not propagate it", RuntimeWarning, stacklevel=3)
    return alpha


def _alpha_of(alpha) -> float:
    if isinstance(alpha, OperatorParams):
        return alpha.alpha
    return check_alpha(alpha)


# ---------------------------------------------------------------------------
# array-level kernels (shared with the solver)

def _sine_scale(grid: Grid) -> float:
    # sqrt(2/pi)*dx*sum sin(.) f  ==  scale * orthonormal DST-I
    return grid.length / np.sqrt(np.pi * (grid.n_points + 1))


def sine_coefficients(values: np.ndarray, grid: Grid, edge: complex = 0.0) -> np.ndarray:
    """Sine coefficients at p_1..p_N of samples whose limit at x=0 is ``edge``.

    A nonzero edge value is carried by the sawtooth ``edge*(1 - x/L)``, whose
    coefficients ``sqrt(2/pi)/p`` are exact.
    """
    v = np.asarray(values, dtype=complex)
    if edge != 0:
        v = v - edge * (1.0 - grid.x / grid.length)
    a = _sine_scale(grid) * sfft.dst(v, type=1, norm="ortho")
    if edge != 0:
        a = a + edge * np.sqrt(2 / np.pi) / grid.p
    return a


def sine_synthesis(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    return sfft.dst(np.asarray(coeffs, dtype=complex), type=1, norm="ortho") / _sine_scale(grid)


def cosine_synthesis(coeffs: np.ndarray, grid: Grid) -> np.ndarray:
    """Node values of ``sqrt(2/pi) dp sum_k c_k cos(p_k x)`` for k = 1..N."""
    c = np.zeros(grid.n_points + 2, dtype=complex)
    c[1:-1] = coeffs
    return np.sqrt(2 / np.pi) * grid.dp * 0.5 * sfft.dct(c, type=1)[1:-1]


def cosine_coefficients_closed(values_closed: np.ndarray, grid: Grid) -> np.ndarray:
    """Trapezoid cosine transform of samples on the closed node set."""
    return np.sqrt(2 / np.pi) * grid.dx * 0.5 * sfft.dct(
        np.asarray(values_closed, dtype=complex), type=1)


def cosine_synthesis_closed(coeffs_closed: np.ndarray, grid: Grid) -> np.ndarray:
    return np.sqrt(2 / np.pi) * grid.dp * 0.5 * sfft.dct(
        np.asarray(coeffs_closed, dtype=complex), type=1)


def edge_taylor(values: np.ndarray, grid: Grid, edge: complex | None = None) -> np.ndarray:
    """Taylor coefficients at x=0 from a one-sided polynomial fit of the first nodes."""
    m = min(_FIT_POINTS, grid.n_points)
    deg = min(_FIT_DEGREE, m - 2)
    xs = grid.x[:m]
    scale = xs[-1]
    s = xs / scale
    v = np.asarray(values[:m], dtype=complex)
    if edge is None:
        V = np.vander(s, deg + 1, increasing=True)
        coef = np.linalg.lstsq(V, v, rcond=None)[0]
    else:
        V = np.vander(s, deg + 1, increasing=True)[:, 1:]
        rest = np.linalg.lstsq(V, v - edge, rcond=None)[0]
        coef = np.concatenate([[edge], rest])
    return coef / scale ** np.arange(deg + 1)


def _corrector_width(grid: Grid) -> float:
    return min(grid.length / 10.0, max(1.0, 24.0 * grid.dx))


def _even_corrector(taylor: np.ndarray, grid: Grid):
    """Even function chi(x)*P(x) matching the even Taylor data up to x^6.

    Returns a callable giving the corrector on any array of points.
    """
    a = np.zeros(_EVEN_ORDER + 1, dtype=complex)
    n = min(len(taylor), _EVEN_ORDER + 1)
    a[:n] = taylor[:n]
    a0, a2, a4, a6 = a[0], a[2], a[4], a[6]
    sig = _corrector_width(grid)
    k = 1.0 / (2 * sig ** 2)
    b0 = a0
    b2 = a2 + k * a0
    b4 = a4 + k * a2 + k ** 2 * a0 / 2
    b6 = a6 + k * a4 + k ** 2 * a2 / 2 + k ** 3 * a0 / 6

    def corr(x):
        x2 = x * x
        return np.exp(-k * x2) * (b0 + x2 * (b2 + x2 * (b4 + x2 * b6)))

    return corr


def split_field(values: np.ndarray, grid: Grid, edge: complex | None = None):
    """Mixed representation: cosine coefficients (p_0..p_{N+1}) of an even corrector
    plus sine coefficients (p_1..p_N) of a remainder with smooth odd extension."""
    v = np.asarray(values, dtype=complex)
    corr = _even_corrector(edge_taylor(v, grid, edge), grid)
    cos_c = cosine_coefficients_closed(corr(grid.x_closed), grid)
    sin_c = sine_coefficients(v - corr(grid.x), grid)
    return cos_c, sin_c


def mixed_values(cos_c: np.ndarray, sin_c: np.ndarray, grid: Grid) -> np.ndarray:
    out = sine_synthesis(sin_c, grid)
    if cos_c is not None:
        out = out + cosine_synthesis_closed(cos_c, grid)[1:-1]
    return out


def mixed_edge(cos_c: np.ndarray, sin_c: np.ndarray, grid: Grid) -> complex:
    """Value at x = 0 of the mixed series (sine part vanishes there)."""
    if cos_c is None:
        return 0.0
    return np.sqrt(2 / np.pi) * grid.dp * (0.5 * cos_c[0] + cos_c[1:-1].sum() + 0.5 * cos_c[-1])


def mixed_derivative(cos_c, sin_c, grid: Grid):
    """d/dx on the mixed pair: cos -> -p sin, sin -> p cos."""
    p = grid.p
    new_sin = -p * cos_c[1:-1] if cos_c is not None else np.zeros_like(sin_c)
    new_cos = np.zeros(grid.n_points + 2, dtype=complex)
    new_cos[1:-1] = p * sin_c
    return new_cos, new_sin


def mixed_inverse_B(cos_c, sin_c, alpha: float, grid: Grid):
    """(1 + alpha d/dx)^{-1} as an exact multiplier on the mixed pair."""
    p = grid.p
    den = 1.0 + (alpha * p) ** 2
    new_cos = np.zeros(grid.n_points + 2, dtype=complex)
    new_cos[1:-1] = -alpha * p * sin_c / den
    new_sin = sin_c / den
    if cos_c is not None:
        new_cos[0] += cos_c[0]
        new_cos[1:-1] += cos_c[1:-1] / den
        # the p_{N+1} cosine mode keeps its own cosine share; its sine partner vanishes on nodes
        pn = (grid.n_points + 1) * grid.dp
        new_cos[-1] += cos_c[-1] / (1.0 + (alpha * pn) ** 2)
        new_sin = new_sin + alpha * p * cos_c[1:-1] / den
    return new_cos, new_sin


def derivative_values(values: np.ndarray, grid: Grid, edge: complex | None = None) -> np.ndarray:
    """Spectral first derivative at the nodes, valid for fields with f(0) != 0."""
    c, s = split_field(values, grid, edge)
    return mixed_values(*mixed_derivative(c, s, grid), grid)


def robin_sawtooth(alpha: float, grid: Grid, x=None):
    """``Q = B^{-1}(1 - x/L)`` on the 2L-periodic odd extension, its value and slope at 0."""
    L = grid.length
    x = grid.x if x is None else x
    if alpha < 0:
        q = -1.0 / alpha
        den = -np.expm1(-2 * q * L)
        expo = 2.0 * np.exp(q * (x - 2 * L)) / den
        e0 = 2.0 * np.exp(-2 * q * L) / den
    else:
        den = -np.expm1(-2 * L / alpha)
        expo = -2.0 * np.exp(-x / alpha) / den
        e0 = -2.0 / den
    vals = 1.0 - x / L + alpha / L + expo
    at0 = 1.0 + alpha / L + e0
    slope0 = (1.0 - at0) / alpha  # Q + alpha Q' = 1 at x = 0
    return vals, at0, slope0


def sine_to_robin(sin_c: np.ndarray, alpha: float, grid: Grid, edge: complex = 0.0):
    """Physical values of ``B^{-1}`` applied to a sine series plus ``edge*(1 - x/L)``.

    Returns node values, value at 0 and slope at 0.
    """
    c, s = mixed_inverse_B(None, sin_c, alpha, grid)
    vals = mixed_values(c, s, grid)
    v0 = mixed_edge(c, s, grid)
    if edge != 0:
        q, q0, _ = robin_sawtooth(alpha, grid)
        vals = vals + edge * q
        v0 = v0 + edge * q0
    # B w = V and V(0) = edge give w_x(0) = (edge - w(0))/alpha exactly
    return vals, v0, (edge - v0) / alpha


# ---------------------------------------------------------------------------
# field-level operations

def _physical(f: ComplexField):
    if f.rep != PHYSICAL:
        raise RepresentationError(f"expected a physical field, got {f.rep}")


def fourier_sine(f: ComplexField) -> ComplexField:
    """F_s; applied to a sine-spectral field it returns the physical field (involution)."""
    if f.rep == PHYSICAL:
        return f.with_values(_sine_scale(f.grid) * sfft.dst(f.values, type=1, norm="ortho"),
                             rep=SINE)
    if f.rep == SINE:
        return f.with_values(sine_synthesis(f.values, f.grid), rep=PHYSICAL)
    raise RepresentationError("fourier_sine needs a physical or sine-spectral field")


def fourier_cosine(f: ComplexField, edge: complex | None = None) -> ComplexField:
    """F_c over the closed node set; ``edge`` is f(0) (extrapolated when omitted), f(L) = 0."""
    g = f.grid
    if f.rep == PHYSICAL:
        f0 = edge_taylor(f.values, g)[0] if edge is None else edge
        closed = np.concatenate([[f0], f.values, [0.0]])
        return f.with_values(cosine_coefficients_closed(closed, g), rep=COSINE)
    if f.rep == COSINE:
        return f.with_values(cosine_synthesis_closed(f.values, g)[1:-1], rep=PHYSICAL)
    raise RepresentationError("fourier_cosine needs a physical or cosine-spectral field")


def half_line_integral(values: np.ndarray, grid: Grid) -> complex:
    """Integral over (0, L) of node samples that need not vanish at x = 0.

    Trapezoid rule with the Euler-Maclaurin end corrections at x = 0, so smooth
    integrands are integrated spectrally; the integrand is assumed to vanish near L.
    """
    v = np.asarray(values)
    c = edge_taylor(v, grid)
    h = grid.dx
    total = h * (0.5 * c[0] + v.sum())
    total += h ** 2 / 12 * c[1] - h ** 4 / 720 * 6 * c[3] + h ** 6 / 30240 * 120 * c[5]
    return total


def l2_norm(f: ComplexField) -> float:
    """L2 norm in the field's own variable (half-line quadrature for physical fields)."""
    g = f.grid
    v = np.abs(f.values) ** 2
    if f.rep == PHYSICAL:
        return float(np.sqrt(max(half_line_integral(v, g).real, 0.0)))
    if f.rep == SINE:
        return float(np.sqrt(g.dp * v.sum()))
    return float(np.sqrt(g.dp * (v[1:-1].sum() + 0.5 * (v[0] + v[-1]))))


def derivative(f: ComplexField, edge: complex | None = None) -> ComplexField:
    _physical(f)
    return f.with_values(derivative_values(f.values, f.grid, edge))


def apply_B(f: ComplexField, alpha, edge: complex | None = None) -> ComplexField:
    """f + alpha f_x."""
    _physical(f)
    a = _alpha_of(alpha)
    return f.with_values(f.values + a * derivative_values(f.values, f.grid, edge))


def apply_B_inverse(f: ComplexField, alpha, edge: complex | None = None) -> ComplexField:
    """Solve ``w + alpha w_x = f`` for the decaying (alpha < 0) solution."""
    _physical(f)
    a = _alpha_of(alpha)
    c, s = split_field(f.values, f.grid, edge)
    return f.with_values(mixed_values(*mixed_inverse_B(c, s, a, f.grid), f.grid))


def _free_phase(grid: Grid, t: float) -> np.ndarray:
    return np.exp(-0.5j * grid.p ** 2 * t)


def free_evolution_dirichlet(f: ComplexField, t: float) -> ComplexField:
    """U_D(t) = F_s exp(-i p^2 t/2) F_s."""
    _physical(f)
    a = sine_coefficients(f.values, f.grid)
    return ComplexField(f.grid, sine_synthesis(a * _free_phase(f.grid, t), f.grid),
                        max(f.t + t, 0.0))


def free_evolution_robin(f: ComplexField, t: float, alpha) -> ComplexField:
    """U(t) = B^{-1} U_D(t) B for the Robin problem ``u + alpha u_x = 0`` at x = 0."""
    _physical(f)
    a = _alpha_of(alpha)
    if t == 0:
        return f.with_values(f.values)
    g = f.grid
    Bf = f.values + a * derivative_values(f.values, g)
    b0 = edge_taylor(Bf, g)[0]
    coeffs = sine_coefficients(Bf, g, edge=b0) * _free_phase(g, t)
    # the jump b0 is evolved inside the sine series; return to Robin space
    vals, _, _ = sine_to_robin(coeffs, a, g)
    return ComplexField(g, vals, max(f.t + t, 0.0))


def quadratic_phase(grid: Grid, t: float, x=None) -> np.ndarray:
    """M(t) = exp(i x^2 / (2t))."""
    x = grid.x if x is None else x
    return np.exp(0.5j * x * x / t)


def apply_J(f: ComplexField, t: float) -> ComplexField:
    """J = x + i t d/dx."""
    _physical(f)
    if t == 0:
        return f.with_values(f.grid.x * f.values)
    return f.with_values(f.grid.x * f.values + 1j * t * derivative_values(f.values, f.grid))


def _sine_sum(values: np.ndarray, nodes: np.ndarray, spacing: float, points: np.ndarray,
              chunk: int = 512) -> np.ndarray:
    """sqrt(2/pi) * spacing * sum_j sin(q nodes_j) values_j at each q in ``points``."""
    points = np.asarray(points, dtype=float)
    out = np.empty(points.shape, dtype=complex)
    v = np.asarray(values, dtype=complex)
    c = np.sqrt(2 / np.pi) * spacing
    for i in range(0, points.size, chunk):
        q = points[i:i + chunk]
        out[i:i + chunk] = c * (np.sin(np.outer(q, nodes)) @ v)
    return out


def sine_transform_at(values: np.ndarray, grid: Grid, points: np.ndarray) -> np.ndarray:
    """Evaluate ``sqrt(2/pi) dx sum_j sin(q x_j) v_j`` at arbitrary ``q`` (band-limited)."""
    return _sine_sum(values, grid.x, grid.dx, points)


def sine_series_at(coeffs: np.ndarray, grid: Grid, points: np.ndarray) -> np.ndarray:
    """Evaluate the sine series with coefficients ``coeffs`` at arbitrary ``x``."""
    return _sine_sum(coeffs, grid.p, grid.dp, points)


def dilate(f: ComplexField, t: float) -> ComplexField:
    """D_t psi(x) = psi(x/t) / (i sqrt(i t)), sampled by band-limited sine interpolation."""
    _physical(f)
    if t <= 0:
        raise ConfigurationError("dilation needs t > 0")
    g = f.grid
    vals = sine_series_at(sine_coefficients(f.values, g), g, g.x / t)
    return f.with_values(vals / (1j * np.sqrt(1j * t)))


def mdtfm_factorization(f: ComplexField, t: float, alpha) -> ComplexField:
    """U(t) f computed as B^{-1} M D_t F_s M B f."""
    _physical(f)
    if t <= 0:
        raise ConfigurationError("factorized evolution needs t > 0")
    a = _alpha_of(alpha)
    g = f.grid
    Bf = f.values + a * derivative_values(f.values, g)
    mg = quadratic_phase(g, t) * Bf
    spec = sine_transform_at(mg, g, g.x / t)
    vals = quadratic_phase(g, t) * spec / (1j * np.sqrt(1j * t))
    return apply_B_inverse(ComplexField(g, vals, f.t + t), a, edge=0.0)
