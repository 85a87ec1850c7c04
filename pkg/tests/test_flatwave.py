import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from wavegauge import checks
from wavegauge import diagnostics as dg
from wavegauge import flatwave as fw
from wavegauge import frame as fr
from wavegauge.frame import ALL_Z, GridSpec, PolyGaussian, VectorFieldId


# [TRIVIAL] positive-part power
def test_plus_power():
    A = np.array([1.0, 2.0, 5.0])
    assert np.allclose(fw.plus_power(A, 0.5), np.sqrt(A))
    assert np.allclose(fw.plus_power(A, -0.7), 1.0)
    assert np.allclose(fw.plus_power(A, 0.0), np.log1p(A))


@given(st.integers(0, 1000))
def test_flat_laplacian_matches_frame(seed):
    grid = GridSpec(40, 16, 6.0)
    rng = np.random.default_rng(seed)
    u = rng.normal(size=grid.shape)
    assert np.allclose(fw.FlatLaplacian(grid)(u), fr.laplacian(u, grid), atol=1e-9)


def _origin_exact(t):
    # Poisson formula at x = 0 for phi0 = 0, phi1 = exp(-r^2)
    f = lambda rho: math.exp(-rho ** 2) * rho / math.sqrt(t * t - rho * rho)
    return integrate.quad(f, 0, t, limit=200)[0]


# [DERIVED] origin value against the two-dimensional Poisson formula
def test_origin_matches_poisson_formula():
    grid = GridSpec(256, 16, 32.0)
    traj = fw.solve_flat_wave(np.zeros(grid.shape), np.exp(-grid.r ** 2), grid, 8.0,
                              record_every=2.0)
    for t, v in zip(traj.times[1:], traj.origin[1:]):
        assert abs(v - _origin_exact(t)) < 2e-4 * abs(_origin_exact(t)) + 1e-7


# [DERIVED] energy conservation of the undamped scheme
def test_energy_conserved():
    grid = GridSpec(256, 16, 64.0)
    traj = fw.solve_flat_wave(np.exp(-grid.r ** 2 / 4) * (1 + 0.3 * grid.x), np.zeros(grid.shape),
                              grid, 20.0, keep_fields=False)
    e = np.array(traj.energy)
    assert np.abs(e / e[0] - 1).max() < 1e-4


def test_support_violation():
    grid = GridSpec(32, 8, 8.0)
    with pytest.raises(fw.SupportViolation):
        fw.solve_flat_wave(np.exp(-(grid.r - 6) ** 2), np.zeros(grid.shape), grid, 4.0)


def test_final_time_recorded():
    grid = GridSpec(32, 8, 16.0)
    z = np.zeros(grid.shape)
    traj = fw.solve_flat_wave(z, z, grid, 1.3, record_every=1.0)
    assert abs(traj.times[-1] - 1.3) < 1e-12
    assert traj.rows()[-1]["sup_phi"] == 0.0


# the decay estimate with mu > 1/2 is a bounded ratio
def test_flat_decay_witness():
    grid = GridSpec(128, 16, 40.0)
    phi0 = np.exp(-grid.r ** 2)
    w = fw.decay_constant_M(phi0, np.zeros(grid.shape), grid, mu=1.0)
    traj = fw.solve_flat_wave(phi0, np.zeros(grid.shape), grid, 20.0, record_every=2.0)
    m = fw.verify_flat_decay(traj, w)
    assert 0 < m < 10
    assert w.margin_field is not None
    with pytest.raises(fw.ExponentRangeError):
        fw.decay_constant_M(phi0, phi0, grid, mu=0.5)


# [DERIVED] first-order Z derivatives agree with direct application
def test_z_derivatives_first_order():
    grid = GridSpec(80, 32, 10.0)
    f = PolyGaussian()
    t = 0.5
    u, u_t, u_tt, _ = f.time_derivatives(t, grid.x, grid.y)
    zs = fw.z_derivatives(u, u_t, u_tt, t, grid)
    assert len(zs) == 1 + 7 + 49
    for i, Z in enumerate(ALL_Z):
        assert np.allclose(zs[1 + 8 * i], fr.apply_Z(u, Z, t, grid, u_t))


# [DERIVED] S S u from the analytic time derivatives of the test field
def test_z_second_order_scaling():
    grid = GridSpec(160, 32, 10.0)
    f = PolyGaussian()
    t = 0.5
    u, u_t, u_tt, u_ttt = f.time_derivatives(t, grid.x, grid.y)
    D1 = fw.z_apply_sequence([u, u_t, u_tt], VectorFieldId.S, t, grid)
    # d_t(S u) = u_t + t u_tt + r d_r u_t
    ref = u_t + t * u_tt + grid.r * fr.d_r(u_t, grid)
    assert np.allclose(D1[1], ref, atol=1e-12)


@given(st.floats(1e-3, 1e3))
def test_ks_margin_scale_invariant(scale):
    grid = GridSpec(48, 16, 10.0)
    f = PolyGaussian()
    u, u_t, u_tt, _ = f.time_derivatives(0.3, grid.x, grid.y)
    w = dg.WeightSpec()
    a = fw.klainerman_sobolev_margin(u, u_t, u_tt, 0.3, grid, w)
    b = fw.klainerman_sobolev_margin(scale * u, scale * u_t, scale * u_tt, 0.3, grid, w)
    assert np.isfinite(a) and abs(b / a - 1) < 1e-12


def test_hardy_errors():
    grid = GridSpec(48, 16, 10.0)
    with pytest.raises(fw.ExponentRangeError):
        fw.hardy_margin(np.ones(grid.shape), grid, 0.0, 1.2, 2.0)
    with pytest.raises(ZeroDivisionError):
        fw.hardy_margin(np.ones(grid.shape), grid, 0.0, 0.5, 2.0)


def test_hardy_margin_bounded():
    grid = GridSpec(96, 16, 20.0)
    f = np.exp(-(grid.r - 3) ** 2)
    m = fw.hardy_margin(f, grid, 2.0, 0.5, 1.5)
    assert 0 < m < 10


def test_inhom_rejects_exponents():
    grid = GridSpec(32, 8, 8.0)
    F = lambda s: np.zeros(grid.shape)
    with pytest.raises(fw.ExponentRangeError):
        fw.inhom_constant(F, [0.0], grid, 1.4, 2.0)
    with pytest.raises(fw.ExponentRangeError):
        fw.inhom_constant(F, [0.0], grid, 2.0, 1.0)


def test_toolbox_suite_small():
    res = checks.check_toolbox(n_cases=6)
    assert res.passed, res.line()
