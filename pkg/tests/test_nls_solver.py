import numpy as np
import pytest

import identities as I
from conftest import smooth_random_field
from halfline_nls import boundary_kernels as bk
from halfline_nls import fd_oracle as fd
from halfline_nls import nls_solver as ns
from halfline_nls import spectral_transforms as st
from halfline_nls import trajectory as tr

ALPHA = -1.0
EPS = 1e-2


@pytest.fixture(scope="module")
def grid():
    return st.make_grid(40.0, 1024)


def small_cubic():
    return ns.ModelParams(1.0, 3, ALPHA, tr.robin_compatible(EPS, 1.0, ALPHA))


# ---------------------------------------------------------------- parameters

@pytest.mark.parametrize("kw", [dict(power=1.5), dict(alpha=0.0),
                                dict(initial=tr.InitialDatum("bad", lambda x: 1 + 0 * x))])
def test_invalid_parameters(kw):
    with pytest.raises((tr.SolverConfigurationError, st.ConfigurationError)):
        ns.ModelParams(**kw)


def test_compatibility_flags():
    prm = small_cubic()
    assert prm.compatible(bk.theorem4_class(EPS), first_order=True)
    odd = ns.ModelParams(1.0, 3, ALPHA, tr.gaussian_odd(EPS, x0=0.0))
    assert odd.compatible(bk.zero_boundary())
    assert not ns.ModelParams(1.0, 3, ALPHA, tr.InitialDatum("x", lambda x: x * np.exp(-x * x))
                              ).compatible(bk.zero_boundary(), first_order=True)


def test_solver_rejects_bad_steps(grid):
    with pytest.raises(tr.SolverConfigurationError):
        ns.solve(small_cubic(), None, 1.0, 0.3, grid)
    with pytest.raises(tr.SolverConfigurationError):
        ns.solve(small_cubic(), None, 1.0, 0.1, grid, method="euler")


# ---------------------------------------------------------------- nonlinearity

def test_nonlinearity_trivial_cases(grid):
    prm = ns.ModelParams(1.0, 3, ALPHA)
    assert np.all(ns.nonlinearity(st.ComplexField(grid, np.zeros(grid.n_points)), prm).values == 0)
    ones = st.ComplexField(grid, np.ones(grid.n_points))
    assert np.all(ns.nonlinearity(ones, prm).values == 1)


@pytest.mark.parametrize("power", [3, 5])
def test_gauge_covariance(grid, rng, power):
    prm = ns.ModelParams(0.7, power, ALPHA)
    u = smooth_random_field(grid, rng)
    for theta in (0.3, 1.1, -2.5):
        ph = np.exp(1j * theta)
        lhs = ns.nonlinearity(u * ph, prm).values
        rhs = ph * ns.nonlinearity(u, prm).values
        assert np.max(np.abs(lhs - rhs)) <= 1e-14 * np.max(np.abs(rhs))


def test_fractional_power(grid, rng):
    prm = ns.ModelParams(1.0, 2.5, ALPHA)
    u = smooth_random_field(grid, rng)
    np.testing.assert_allclose(ns.nonlinearity(u, prm).values,
                               np.abs(u.values) ** 1.5 * u.values, rtol=1e-14)


def test_j_calculus_identity(grid, rng):
    p, t = 3, 1.0
    prm = ns.ModelParams(1.0, p, ALPHA)
    for _ in range(5):
        v = smooth_random_field(grid, rng)
        jv = st.apply_J(v, t).values
        jf = st.apply_J(ns.nonlinearity(v, prm), t).values
        m = np.abs(v.values)
        rhs = (0.5 * (p + 1) * m ** (p - 1) * jv
               - 0.5 * (p - 1) * m ** (p - 3) * v.values ** 2 * np.conj(jv))
        assert I.rel(rhs, jf, grid) <= 1e-8


def test_nonlinear_l2_bound(grid, rng):
    for power in (3, 4, 5):
        prm = ns.ModelParams(1.0, power, ALPHA)
        for _ in range(20):
            v = smooth_random_field(grid, rng)
            f = ns.nonlinearity(v, prm)
            bound = np.max(np.abs(v.values)) ** (power - 1) * st.l2_norm(v)
            assert st.l2_norm(f) <= bound * (1 + 1e-12)


# ---------------------------------------------------------------- Duhamel map

def test_duhamel_without_source_is_free_flow(grid):
    prm = ns.ModelParams(0.0, 3, ALPHA, tr.robin_compatible(1.0, 1.0, ALPHA))
    traj = ns.duhamel_solve_w(prm, lambda t: np.zeros(grid.n_points), 0.5, 0.05, grid)
    free = st.free_evolution_robin(prm.initial_field(grid), 0.5, ALPHA).values
    assert I.rel(traj.snapshots[-1].w, free, grid) <= 1e-12


def _bump(grid):
    return np.exp(-((grid.x - 8.0) / 1.5) ** 2) * (1 + 0.5j)


def test_duhamel_constant_source_is_integrated_exactly(grid):
    prm = ns.ModelParams(0.0, 3, ALPHA)
    g = _bump(grid)
    coarse = ns.duhamel_solve_w(prm, lambda t: g, 1.0, 0.1, grid).snapshots[-1].w
    fine = ns.duhamel_solve_w(prm, lambda t: g, 1.0, 0.0125, grid).snapshots[-1].w
    assert I.rel(coarse, fine, grid) <= 1e-10


def test_duhamel_time_dependent_source_converges_at_second_order(grid):
    prm = ns.ModelParams(0.0, 3, ALPHA)
    g = _bump(grid)
    src = lambda t: g * np.cos(3 * t)  # noqa: E731
    w = {dt: ns.duhamel_solve_w(prm, src, 1.0, dt, grid).snapshots[-1].w
         for dt in (0.1, 0.05, 0.025, 0.003125)}
    e1 = I.rel(w[0.1], w[0.003125], grid)
    e2 = I.rel(w[0.05], w[0.003125], grid)
    e3 = I.rel(w[0.025], w[0.003125], grid)
    assert e1 / e2 >= 3.5 and e2 / e3 >= 3.5


def test_duhamel_residual(grid):
    prm = ns.ModelParams(0.0, 3, ALPHA)
    g = _bump(grid)
    src = lambda t: g * np.cos(3 * t)  # noqa: E731
    res = {}
    for dt in (0.02, 0.01):
        traj = ns.duhamel_solve_w(prm, src, 0.4, dt, grid)
        k = len(traj.snapshots) // 2
        s0, s1, s2 = traj.snapshots[k - 1:k + 2]
        wt = (s2.w - s0.w) / (2 * dt)
        wx = st.derivative_values(s1.w, grid, s1.u_edge)
        wxx = st.derivative_values(wx, grid)
        r = 1j * wt + 0.5 * wxx - src(s1.t)
        res[dt] = st.l2_norm(st.ComplexField(grid, r))
    assert res[0.01] <= 1e-3 * st.l2_norm(st.ComplexField(grid, g))
    assert res[0.02] / res[0.01] >= 3.5


# ---------------------------------------------------------------- full solver

def test_splitting_is_exact(grid):
    traj = ns.solve(small_cubic(), bk.theorem8_profile(EPS, 0.9), 0.5, 0.01, grid,
                    snapshot_every=0.1)
    for s in traj.snapshots:
        assert np.max(np.abs(s.u - (s.w + s.z))) <= 1e-12 * max(1.0, np.max(np.abs(s.u)))


def test_zero_coupling_reduces_to_linear_flow(grid):
    h = bk.theorem8_profile(EPS, 0.9)
    prm = ns.ModelParams(0.0, 3, ALPHA, tr.robin_compatible(EPS, 1.0, ALPHA))
    traj = ns.solve(prm, h, 1.0, 0.01, grid)
    free = st.free_evolution_robin(prm.initial_field(grid), 1.0, ALPHA).values
    z = bk.z_spectral(h, 1.0, grid, ALPHA, max_step=0.01).values
    assert I.rel(traj.snapshots[-1].u, free + z, grid) <= 1e-8


def test_mass_conservation_without_forcing():
    g = st.make_grid(80.0, 2048)
    prm = ns.ModelParams(1.0, 3, ALPHA, tr.gaussian_odd(0.5, x0=15.0, width=1.0))
    traj = ns.solve(prm, None, 10.0, 0.01, g, snapshot_every=1.0)
    m = np.array([ns.mass(s.u, g) for s in traj.snapshots])
    assert np.max(np.abs(np.sqrt(m / m[0]) - 1)) <= 1e-6


def test_time_self_convergence(grid):
    h = bk.theorem8_profile(EPS, 0.9)
    prm = small_cubic()
    u = {dt: ns.solve(prm, h, 1.0, dt, grid).snapshots[-1].u for dt in (0.02, 0.01, 0.005, 0.0025)}
    e1 = I.rel(u[0.02], u[0.0025], grid)
    e2 = I.rel(u[0.01], u[0.0025], grid)
    assert e1 / e2 >= 3.5


def test_agreement_with_oracle(grid):
    h = bk.theorem4_class(EPS)
    prm = small_cubic()
    u = ns.solve(prm, h, 1.0, 0.005, grid).snapshots[-1].u
    ref = fd.crank_nicolson_robin(fd.FDConfig(40.0, 1024, 0.005, prm, h), 1.0).snapshots[-1].u
    assert I.rel(u, ref, grid) <= 1e-3


def test_blow_up_is_reported(grid):
    # lam = 5i turns the equation into u_t = (i/2) u_xx + 5 |u|^2 u, which blows up near t = 0.1
    prm = ns.ModelParams(5j, 3, ALPHA, tr.gaussian_odd(1.0, x0=10.0))
    traj = ns.solve(prm, None, 1.0, 0.001, grid, snapshot_every=0.01)
    assert traj.status == "aborted"
    assert "blow-up" in traj.message
    assert all(np.all(np.isfinite(s.u)) for s in traj.snapshots)
    assert traj.snapshots[-1].t < 1.0


@pytest.mark.slow
def test_small_data_decay_envelope():
    g = st.make_grid(150.0, 1024)
    prm = ns.ModelParams(1.0, 3, ALPHA, tr.robin_compatible(EPS, 2.0, ALPHA))
    traj = ns.solve(prm, bk.theorem4_class(EPS), 100.0, 0.02, g, snapshot_every=1.0)
    t = traj.times
    sup = np.array([max(np.max(np.abs(s.u)), abs(s.u_edge)) for s in traj.snapshots])
    scaled = sup * np.sqrt(1 + t * t) ** 0.5
    late = t >= 10
    assert np.max(scaled[late]) <= 1.5 * scaled[late][0]


# ---------------------------------------------------------------- Picard iteration

def test_picard_trivial_data(grid):
    prm = ns.ModelParams(1.0, 3, ALPHA)
    traj, diag = ns.picard_iterate(prm, bk.zero_boundary(), 0.1, 0.01, grid)
    assert diag.converged and diag.iterations <= 2
    assert all(np.all(s.u == 0) for s in traj.snapshots)


def test_picard_contraction_and_residual():
    g = st.make_grid(40.0, 512)
    prm = small_cubic()
    traj, diag = ns.picard_iterate(prm, bk.theorem4_class(EPS), 0.5, 0.005, g, n_max=8)
    r = diag.ratios
    assert len(r) >= 2
    assert np.all(r[1:] <= 0.5)
    res = ns.pde_residual(traj, prm, g)
    scale = max(st.l2_norm(st.ComplexField(g, s.u)) for s in traj.snapshots)
    assert np.max(res[5:-5]) <= 1e-3 * scale


def test_picard_failure_carries_history():
    g = st.make_grid(40.0, 256)
    prm = ns.ModelParams(1.0, 3, ALPHA, tr.gaussian_odd(3.0, x0=10.0))
    with pytest.raises(ns.IterationFailure) as info:
        ns.picard_iterate(prm, bk.zero_boundary(), 1.0, 0.01, g, n_max=3, raise_on_failure=True)
    assert len(info.value.diagnostics.differences) == 2


def test_picard_warns_beyond_local_scale():
    g = st.make_grid(40.0, 256)
    prm = ns.ModelParams(1.0, 3, ALPHA, tr.gaussian_odd(3.0, x0=10.0))
    with pytest.warns(RuntimeWarning, match="local existence"):
        ns.picard_iterate(prm, bk.zero_boundary(), 1.0, 0.01, g, n_max=2)
