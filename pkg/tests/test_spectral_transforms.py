import warnings

import numpy as np
import pytest
from scipy import integrate

import identities as I
from conftest import smooth_random_field
from halfline_nls import spectral_transforms as st
from halfline_nls import fd_oracle as fd
from halfline_nls import nls_solver as ns
from halfline_nls import trajectory as tr

ALPHA = -1.0


def compatible_field(grid):
    return st.ComplexField(grid, tr.robin_compatible(1.0, 1.0, ALPHA)(grid.x))


# ---------------------------------------------------------------- grid layout

def test_grid_layout_small():
    g = st.make_grid(10, 4)
    np.testing.assert_allclose(g.x, [2, 4, 6, 8])
    np.testing.assert_allclose(g.p, np.arange(1, 5) * np.pi / 10)


def test_grid_spacing():
    assert st.make_grid(40, 1024).dx == pytest.approx(40 / 1025, rel=1e-15)


@pytest.mark.parametrize("L,N", [(0, 16), (-1, 16), (10, 3), (10, 4.5)])
def test_grid_rejects_bad_layout(L, N):
    with pytest.raises(st.ConfigurationError):
        st.make_grid(L, N)


def test_field_rejects_wrong_length(grid40):
    with pytest.raises(st.ConfigurationError):
        st.ComplexField(grid40, np.zeros(10))


# ---------------------------------------------------------------- sine transform

def test_single_mode_is_concentrated(grid40):
    f = st.ComplexField(grid40, np.sin(grid40.p[0] * grid40.x))
    a = st.fourier_sine(f).values
    assert a[0] == pytest.approx(np.sqrt(2 / np.pi) * grid40.length / 2, rel=1e-12)
    assert np.max(np.abs(a[1:])) <= 1e-12 * abs(a[0])


def test_sine_transform_is_an_involution(grid40, rng):
    for _ in range(5):
        v = rng.normal(size=grid40.n_points) + 1j * rng.normal(size=grid40.n_points)
        assert I.sine_round_trip(st.ComplexField(grid40, v)) <= 1e-12


def test_sine_transform_of_exponential(grid40):
    g = grid40
    f = st.ComplexField(g, np.exp(-g.x))
    a = st.fourier_sine(f).values
    # direct trapezoid quadrature of sqrt(2/pi) int sin(p x) e^{-x} dx on the closed nodes
    xc = g.x_closed
    for k in (0, 3, 10, 50):
        direct = np.sqrt(2 / np.pi) * integrate.trapezoid(np.sin(g.p[k] * xc) * np.exp(-xc), xc)
        assert abs(a[k] - direct) <= 1e-6 * abs(direct)
    # the integrand has slope p at x = 0, so the plain trapezoid sum is only O(p dx^2)
    exact = np.sqrt(2 / np.pi) * g.p / (1 + g.p ** 2)
    assert np.max(np.abs(a[:50] - exact[:50])) <= 1e-3


def test_sine_coefficients_with_edge_value(grid40):
    g = grid40
    a = st.sine_coefficients(np.exp(-g.x), g, edge=1.0)
    exact = np.sqrt(2 / np.pi) * g.p / (1 + g.p ** 2)
    assert np.max(np.abs(a[:50] - exact[:50])) <= 1e-5


# ---------------------------------------------------------------- cosine transform

def test_cosine_transform_returns_closed_set(grid40):
    c = st.fourier_cosine(st.ComplexField(grid40, np.exp(-grid40.x)))
    assert c.rep == st.COSINE
    assert c.values.shape == (grid40.n_points + 2,)


def test_cosine_transform_of_exponential(grid40):
    g = grid40
    c = st.fourier_cosine(st.ComplexField(g, np.exp(-g.x)), edge=1.0).values
    xc = g.x_closed
    pc = g.p_closed
    for k in (0, 1, 7, 40):
        direct = np.sqrt(2 / np.pi) * integrate.trapezoid(np.cos(pc[k] * xc) * np.exp(-xc), xc)
        assert abs(c[k] - direct) <= 1e-6 * abs(direct)
    exact = np.sqrt(2 / np.pi) / (1 + pc ** 2)
    assert np.max(np.abs(c[:50] - exact[:50])) <= 1e-3


def test_cosine_parseval(grid40, rng):
    for _ in range(5):
        v = rng.normal(size=grid40.n_points + 2) + 1j * rng.normal(size=grid40.n_points + 2)
        assert I.cosine_parseval(v, grid40) <= 1e-10


def test_cosine_transform_of_constant_is_low_frequency():
    g = st.make_grid(2.0, 16)
    c = st.fourier_cosine(st.ComplexField(g, np.ones(16)), edge=1.0).values
    assert abs(c[0]) > 10 * np.max(np.abs(c[1:-1]))


def test_cosine_round_trip(grid40):
    f = st.ComplexField(grid40, np.exp(-grid40.x ** 2))
    back = st.fourier_cosine(st.fourier_cosine(f, edge=1.0))
    assert I.rel(back.values, f.values, grid40) <= 1e-12


def test_representation_tags_are_checked(grid40):
    c = st.fourier_cosine(st.ComplexField(grid40, np.exp(-grid40.x)))
    with pytest.raises(st.RepresentationError):
        st.fourier_sine(c)
    with pytest.raises(st.RepresentationError):
        st.apply_B(c, ALPHA)
    with pytest.raises(st.RepresentationError):
        st.ComplexField(grid40, np.zeros(grid40.n_points), rep="wavelet")


# ---------------------------------------------------------------- B and its inverse

def test_b_inverse_undoes_b(grid40, rng):
    for _ in range(10):
        assert I.b_inverse_b(smooth_random_field(grid40, rng), ALPHA) <= 1e-8


def test_b_inverse_minus_identity(grid40, rng):
    for _ in range(10):
        f = smooth_random_field(grid40, rng, edge_zero=False)
        assert I.b_inverse_minus_one(f, ALPHA) <= 1e-8


def test_b_inverse_sup_bound(grid40, rng):
    # |B^-1 f(x)| <= ||1/(1 + i alpha p)||_{L2(R)} / sqrt(2 pi) * ||f||_2 = ||f||_2 / sqrt(2 |alpha|)
    const = np.sqrt(np.pi / abs(ALPHA)) / np.sqrt(2 * np.pi)
    for _ in range(100):
        f = smooth_random_field(grid40, rng, edge_zero=False)
        w = st.apply_B_inverse(f, ALPHA)
        assert np.max(np.abs(w.values)) <= const * st.l2_norm(f) * (1 + 1e-9)


def test_alpha_zero_is_rejected(grid40):
    f = st.ComplexField(grid40, np.exp(-grid40.x))
    with pytest.raises(st.ConfigurationError):
        st.apply_B(f, 0.0)
    with pytest.raises(st.ConfigurationError):
        st.apply_B_inverse(f, 0.0)


def test_positive_alpha_warns(grid40):
    f = st.ComplexField(grid40, np.exp(-(grid40.x - 10) ** 2))
    with pytest.warns(RuntimeWarning, match="bound state"):
        st.apply_B(f, 1.0)


# ---------------------------------------------------------------- free Robin evolution

def test_zero_time_is_identity(grid40):
    f = compatible_field(grid40)
    assert I.rel(st.free_evolution_robin(f, 0.0, ALPHA).values, f.values, grid40) <= 1e-12


@pytest.mark.parametrize("t", [0.1, 0.5, 1.0])
@pytest.mark.parametrize("s", [0.1, 0.5, 1.0])
def test_group_law(grid40, rng, t, s):
    assert I.group_law(smooth_random_field(grid40, rng), t, s, ALPHA) <= 1e-8
    assert I.group_law(compatible_field(grid40), t, s, ALPHA) <= 1e-8


def test_unitarity_and_time_reversal(grid40, rng):
    for f in (smooth_random_field(grid40, rng), compatible_field(grid40)):
        for t in (0.1, 0.5, 1.0, 3.0):
            assert I.unitarity(f, t, ALPHA) <= 1e-8
        assert I.time_reversal(f, 1.0, ALPHA) <= 1e-8


def _oracle_free(datum, grid, t):
    prm = ns.ModelParams(0.0, 3, ALPHA, datum)
    traj = fd.crank_nicolson_robin(fd.FDConfig(grid.length, grid.n_points, 0.005, prm), t)
    return traj.snapshots[-1].u


def test_free_evolution_matches_oracle_on_x_gaussian(grid40):
    # x e^{-x^2} has B f(0) = alpha != 0, so it violates the Robin condition at t = 0
    datum = tr.InitialDatum("x-gaussian", lambda x: x * np.exp(-x ** 2))
    f = st.ComplexField(grid40, datum(grid40.x))
    u = st.free_evolution_robin(f, 0.5, ALPHA).values
    assert I.rel(_oracle_free(datum, grid40, 0.5), u, grid40) <= 1e-3


def test_free_evolution_matches_oracle_on_compatible_datum(grid40):
    datum = tr.robin_compatible(1.0, 1.0, ALPHA)
    f = st.ComplexField(grid40, datum(grid40.x))
    u = st.free_evolution_robin(f, 0.5, ALPHA).values
    assert I.rel(_oracle_free(datum, grid40, 0.5), u, grid40) <= 1e-3


# ---------------------------------------------------------------- Dirichlet evolution

def test_dirichlet_zero_time(grid40, rng):
    f = smooth_random_field(grid40, rng)
    assert I.rel(st.free_evolution_dirichlet(f, 0.0).values, f.values, grid40) <= 1e-12


def test_dirichlet_matches_method_of_images(grid40):
    datum = tr.gaussian_odd(1.0, x0=10.0, width=1.0, k0=0.5)
    f = st.ComplexField(grid40, datum(grid40.x))
    for t in (0.5, 2.0):
        u = st.free_evolution_dirichlet(f, t).values
        assert I.rel(u, datum.free_solution(grid40.x, t), grid40) <= 1e-8


def test_dirichlet_keeps_zero_boundary_value(grid40):
    datum = tr.gaussian_odd(1.0, x0=3.0, width=1.0, k0=-1.0)
    u = st.free_evolution_dirichlet(st.ComplexField(grid40, datum(grid40.x)), 2.0).values
    assert abs(st.edge_taylor(u, grid40)[0]) <= 1e-6 * np.max(np.abs(u))


# ---------------------------------------------------------------- J operator

def test_j_at_time_zero_is_multiplication(grid40, rng):
    f = smooth_random_field(grid40, rng)
    assert np.array_equal(st.apply_J(f, 0.0).values, grid40.x * f.values)


def test_j_conjugation_identity(grid40, rng):
    for t in (0.5, 1.0, 2.0):
        assert I.j_conjugation(smooth_random_field(grid40, rng), t) <= 1e-8


def test_j_on_gaussian_closed_form(grid40):
    x = grid40.x
    f = st.ComplexField(grid40, np.exp(-x ** 2))
    jf = st.apply_J(f, 1.0).values
    exact = (x - 2j * x) * np.exp(-x ** 2)
    assert np.max(np.abs(jf - exact)) <= 1e-8


# ---------------------------------------------------------------- factorised evolution

def test_factorisation_agrees_with_pipeline():
    g = st.make_grid(40, 2048)
    f = st.ComplexField(g, tr.robin_compatible(1.0, 1.0, ALPHA)(g.x))
    a = st.mdtfm_factorization(f, 1.0, ALPHA).values
    b = st.free_evolution_robin(f, 1.0, ALPHA).values
    assert I.rel(a, b, g) <= 1e-4


def test_quadratic_phases_cancel(grid40, rng):
    f = smooth_random_field(grid40, rng)
    m = st.quadratic_phase(grid40, 0.7)
    m_inv = st.quadratic_phase(grid40, -0.7)
    np.testing.assert_array_equal(np.abs(m * m_inv * f.values - f.values) <= 1e-15, True)


def test_dilation_is_unitary(grid40):
    f = st.ComplexField(grid40, np.exp(-((grid40.x - 6) / 1.5) ** 2))
    assert abs(st.l2_norm(st.dilate(f, 2.0)) - st.l2_norm(f)) <= 1e-8 * st.l2_norm(f)


def test_factorisation_needs_positive_time(grid40):
    f = compatible_field(grid40)
    with pytest.raises(st.ConfigurationError):
        st.mdtfm_factorization(f, 0.0, ALPHA)


# ---------------------------------------------------------------- sup-norm inequalities

def test_lemma_sup_bounds_on_random_fields(grid40, rng):
    violations = 0
    for _ in range(100):
        f = smooth_random_field(grid40, rng, edge_zero=bool(rng.integers(2)))
        sup2 = np.max(np.abs(f.values)) ** 2
        n2 = st.l2_norm(f)
        if sup2 > 2 * st.l2_norm(st.derivative(f)) * n2 * (1 + 1e-10):
            violations += 1
        for t in (0.5, 1.0, 2.0):
            if sup2 > (2 / t) * st.l2_norm(st.apply_J(f, t)) * n2 * (1 + 1e-10):
                violations += 1
    assert violations == 0


def test_no_warnings_for_negative_alpha(grid40):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        st.apply_B(compatible_field(grid40), ALPHA)
