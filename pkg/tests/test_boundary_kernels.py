import numpy as np
import pytest

from halfline_nls import analysis as an
from halfline_nls import boundary_kernels as bk
from halfline_nls import spectral_transforms as st

ALPHA = -1.0
EPS = 1e-2


def families():
    return {
        "theorem4-class": bk.theorem4_class(EPS),
        "theorem7-class": bk.theorem7_class(EPS, 0.9),
        "theorem8-profile": bk.theorem8_profile(EPS, 0.9),
        "single-frequency": bk.single_frequency(-2.0, EPS),
    }


@pytest.fixture(scope="module")
def grid80():
    return st.make_grid(80.0, 1024)


@pytest.fixture(scope="module")
def grid80_fine():
    # The closed form applies the grid inverse of B, so both representations
    # must share one grid that resolves the p^-3 spectral tail.
    return st.make_grid(80.0, 2047)


def rel(a, b, grid):
    return st.l2_norm(st.ComplexField(grid, a - b)) / st.l2_norm(st.ComplexField(grid, b))


# ---------------------------------------------------------------- data classes

def test_nonzero_initial_value_rejected():
    f = lambda t: np.asarray(t) * 0 + 1.0  # noqa: E731
    with pytest.raises(st.ConfigurationError):
        bk.BoundaryData(f, f, f)


def test_unknown_family_rejected():
    z = bk.zero_boundary()
    with pytest.raises(st.ConfigurationError):
        bk.BoundaryData(z.h, z.dh, z.d2h, family="theorem9")


@pytest.mark.parametrize("name", list(families()))
def test_derivatives_match_finite_differences(name):
    h = families()[name]
    t = np.array([0.3, 1.7, 12.0])
    d = 1e-5
    fd1 = (h.h(t + d) - h.h(t - d)) / (2 * d)
    fd2 = (h.dh(t + d) - h.dh(t - d)) / (2 * d)
    np.testing.assert_allclose(h.dh(t), fd1, rtol=1e-6, atol=1e-12)
    np.testing.assert_allclose(h.d2h(t), fd2, rtol=1e-6, atol=1e-12)


def test_theorem4_class_envelope():
    h = bk.theorem4_class(EPS)
    t = np.geomspace(1, 1e4, 50)
    env = EPS * (1 + t * t) ** (-(0.75 + h.gamma) / 2)
    assert np.all(np.abs(h.h(t)) <= env * (1 + 1e-12))
    assert h.gamma == pytest.approx(EPS ** (1 / 3))


# ---------------------------------------------------------------- zero data

def test_zero_boundary_gives_zero(grid80):
    h = bk.zero_boundary()
    assert np.all(bk.z_exact(h, 1.0, grid80, ALPHA).values == 0)
    assert np.all(bk.z_spectral(h, 1.0, grid80, ALPHA).values == 0)
    assert bk.z_traces(h, 1.0, ALPHA) == (0, 0, 0)
    assert np.all(bk.weighted_moment_xz(h, 1.0, grid80, ALPHA).values == 0)


@pytest.mark.parametrize("fn", [bk.z_exact, bk.z_spectral])
def test_nonpositive_time_rejected(grid80, fn):
    with pytest.raises(st.ConfigurationError):
        fn(bk.theorem4_class(EPS), 0.0, grid80, ALPHA)


# ---------------------------------------------------------------- Robin trace

@pytest.mark.parametrize("name", list(families()))
@pytest.mark.parametrize("t", [0.5, 1.0, 5.0])
def test_trace_identity(name, t):
    h = families()[name]
    z0, zx, _ = bk.z_traces(h, t, ALPHA)
    assert abs(z0 + ALPHA * zx - complex(h.h(t))) <= 1e-6


@pytest.mark.parametrize("t", [0.5, 1.0, 5.0])
def test_traces_match_spectral_field(grid80, t):
    h = bk.theorem8_profile(EPS, 0.9)
    resp = bk.BoundaryResponse(h, grid80, ALPHA)
    resp.advance_to(t)
    _, v0, vx = resp.field()
    z0, zx, _ = bk.z_traces(h, t, ALPHA)
    assert abs(v0 - z0) <= 1e-6
    assert abs(vx - zx) <= 1e-6


def test_time_trace_matches_difference_quotient():
    h = bk.theorem7_class(EPS, 0.9)
    d = 1e-4
    zt = bk.z_traces(h, 2.0, ALPHA)[2]
    fd = (bk.z_traces(h, 2.0 + d, ALPHA)[0] - bk.z_traces(h, 2.0 - d, ALPHA)[0]) / (2 * d)
    assert abs(zt - fd) <= 1e-7


# ---------------------------------------------------------------- two representations

@pytest.mark.parametrize("name", list(families()))
def test_exact_and_spectral_agree(grid80_fine, name):
    h = families()[name]
    ze = bk.z_exact(h, 1.0, grid80_fine, ALPHA)
    zs = bk.z_spectral(h, 1.0, grid80_fine, ALPHA)
    assert rel(ze.values, zs.values, grid80_fine) <= 1e-5


def test_exact_solution_solves_free_equation(grid80_fine):
    # The closed form is a genuine half-line field and does not vanish at the
    # artificial wall, so the residual is measured away from it.
    g = grid80_fine
    h = bk.theorem8_profile(EPS, 0.9)
    inner = g.x <= 0.9 * g.length
    edge = bk.z_traces(h, 2.0, ALPHA)
    z0 = bk.z_exact(h, 2.0, g, ALPHA).values
    zxx = st.derivative_values(st.derivative_values(z0, g, edge[0]), g, edge[1])
    errors = []
    for d in (1e-3, 3e-4, 1e-4):
        zt = (bk.z_exact(h, 2.0 + d, g, ALPHA).values - bk.z_exact(h, 2.0 - d, g, ALPHA).values) / (2 * d)
        res = (1j * zt + 0.5 * zxx)[inner]
        errors.append(np.linalg.norm(res) / np.linalg.norm(zt[inner]))
    assert errors[-1] <= 1e-4
    # Second order in the time step of the difference quotient.
    assert errors[0] / errors[1] >= 0.8 * (1e-3 / 3e-4) ** 2


def test_linearity(grid80):
    h1, h2 = bk.theorem4_class(EPS), bk.theorem8_profile(2 * EPS, 0.8)
    both = bk.combine(h1, h2)
    for fn in (bk.z_exact, bk.z_spectral):
        a = fn(both, 1.0, grid80, ALPHA).values
        b = fn(h1, 1.0, grid80, ALPHA).values + fn(h2, 1.0, grid80, ALPHA).values
        assert rel(a, b, grid80) <= 1e-10


def test_single_frequency_resonance():
    # the free phase is exp(-i p^2 t/2), so the forcing exp(-i omega t) excites p^2 = 2 omega
    omega = 2.0
    g = st.make_grid(80.0, 1024)
    resp = bk.BoundaryResponse(bk.single_frequency(-omega, 1.0), g, ALPHA)
    resp.advance_to(40.0, max_step=0.01)
    spec = np.abs(resp.dirichlet_coefficients())
    k = int(np.argmax(spec))
    k_star = int(np.argmin(np.abs(g.p - np.sqrt(2 * omega))))
    assert abs(k - k_star) <= 1


def test_theorem4_sup_norm_decay():
    h = bk.theorem4_class(EPS)
    g = st.make_grid(300.0, 1024)
    resp = bk.BoundaryResponse(h, g, ALPHA)
    ts, sup = [], []
    for t in np.arange(1.0, 201.0):
        resp.advance_to(t, max_step=0.02)
        z, z0, _ = resp.field()
        ts.append(t)
        sup.append(max(np.max(np.abs(z)), abs(z0)))
    fit = an.fit_decay_exponent(ts, sup, (10, 200))
    assert abs(fit.exponent + 0.5) <= 0.1


def test_boundary_slope_decay_rate():
    h = bk.theorem4_class(EPS)
    ts = np.linspace(10, 200, 40)
    zx = np.array([abs(bk.z_traces(h, t, ALPHA)[1]) for t in ts])
    fit = an.fit_decay_exponent(ts, zx, (10, 200))
    assert abs(fit.exponent - (-1.25 - h.gamma)) <= 0.1


# ---------------------------------------------------------------- kernel I(s, x)

@pytest.mark.parametrize("s", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("x", [0.5, 1.0, 2.0])
def test_kernel_split_reproduces_closed_form(s, x):
    k = bk.kernel_I(s, x, ALPHA)
    ref = bk.kernel_I_closed_form(s, x, ALPHA)
    assert abs(k.leading + k.remainder - ref) <= 1e-6 * max(1.0, abs(ref))
    assert abs(k.full - ref) <= 1e-10 * max(1.0, abs(ref))


def test_kernel_remainder_decay():
    s = np.geomspace(5, 100, 20)
    r = [abs(bk.kernel_I(v, 1.0, ALPHA).remainder) for v in s]
    assert an.fit_decay_exponent(s, r).exponent <= -0.7


@pytest.mark.parametrize("s,x", [(0.5, 1.0), (1.0, 0.5), (2.0, 2.0)])
def test_kernel_sign_flip_of_alpha(s, x):
    # p -> -p in the defining integral gives I(s, x; -alpha) = -I(s, -x; alpha)
    a = bk.kernel_I_quadrature(s, x, -ALPHA)
    b = -bk.kernel_I_quadrature(s, -x, ALPHA)
    assert abs(a - b) <= 1e-10 * max(1.0, abs(a))


def test_kernel_rejects_nonpositive_time():
    with pytest.raises(st.ConfigurationError):
        bk.kernel_I(0.0, 1.0)


# ---------------------------------------------------------------- x z representation

@pytest.mark.parametrize("name", list(families()))
def test_weighted_moment_matches_direct_product(grid80_fine, name):
    h = families()[name]
    ze = bk.z_exact(h, 1.0, grid80_fine, ALPHA).values
    xz = bk.weighted_moment_xz(h, 1.0, grid80_fine, ALPHA).values
    assert rel(xz, grid80_fine.x * ze, grid80_fine) <= 1e-4


def test_weighted_moment_growth_rate():
    h = bk.theorem4_class(EPS)
    g = st.make_grid(300.0, 1024)
    resp = bk.BoundaryResponse(h, g, ALPHA)
    ts, norms = [], []
    for t in np.arange(10.0, 201.0, 5.0):
        resp.advance_to(t, max_step=0.02)
        z = resp.field()[0]
        ts.append(t)
        norms.append(st.l2_norm(st.ComplexField(g, g.x * z)))
    fit = an.fit_decay_exponent(ts, norms, (10, 200))
    assert abs(fit.exponent - (0.25 - h.gamma)) <= 0.1


# ---------------------------------------------------------------- Filon weights

def test_filon_moments_against_quadrature():
    from scipy import integrate
    theta = np.array([1e-6, 0.3, 1.99, 2.01, 5.0, 80.0])
    m = bk.filon_moments(theta)
    assert m.shape == (4, theta.size)
    for i, th in enumerate(theta):
        for k in range(4):
            re = integrate.quad(lambda s: np.cos(th * s) * s ** k, 0, 1, limit=200)[0]
            im = integrate.quad(lambda s: np.sin(th * s) * s ** k, 0, 1, limit=200)[0]
            assert abs(m[k, i] - (re + 1j * im)) <= 1e-10
