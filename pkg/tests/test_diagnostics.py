import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from wavegauge import diagnostics as dg, evolve as ev, flatwave as fw, frame as fr
from wavegauge.background import ACoeffs, a_from_phi, smoothstep
from wavegauge.frame import GridSpec
from wavegauge.evolve import PHI, PI


# ---------------------------------------------------------------- weights

qs = st.floats(-200, 200).filter(lambda q: abs(q) > 1e-6)


@pytest.mark.parametrize("family", ["w", "w1", "w2"])
def test_weight_closed_forms(family):
    spec = dg.WeightSpec(delta=0.8, sigma=0.1, mu=0.2, family=family)
    q = np.array([-7.0, -0.5, 0.5, 3.0])
    A = 1 + np.abs(q)
    pos, neg = {"w": (A ** 3.6, 1 + A ** -0.4),
                "w1": (A ** 3.4, A ** -0.2),
                "w2": (A ** 3.2, A ** -1.2)}[family]
    np.testing.assert_allclose(spec(q), np.where(q > 0, pos, neg), rtol=1e-14)


@pytest.mark.parametrize("family", ["w", "w1", "w2"])
@given(q=qs)
def test_weight_derivative_matches_difference(family, q):
    spec = dg.WeightSpec(family=family)
    h = 1e-6 * min(1.0, abs(q))
    fd = (spec(q + h) - spec(q - h)) / (2 * h)
    assert np.isclose(spec.derivative(q), fd, rtol=1e-5, atol=1e-12)


@given(q=qs, delta=st.floats(0.51, 0.99), mu=st.floats(0.01, 0.25))
def test_w_monotone_and_sandwich(q, delta, mu):
    # constants read off the closed forms: on q<0, 1 < w <= 2 and w' = 2mu A^(-1-2mu);
    # on q>0, w' = (2+2delta) w / A
    spec = dg.WeightSpec(delta=delta, mu=mu)
    A = 1 + abs(q)
    w, wp = float(spec(q)), float(spec.derivative(q))
    assert wp > 0
    assert mu * w / A ** (1 + 2 * mu) <= wp * (1 + 1e-12)
    assert wp <= (2 + 2 * delta) * w / A * (1 + 1e-12)


def test_w_interior_branch_bounds():
    w = dg.WeightSpec()
    q = -np.linspace(1e-9, 100, 50)
    assert np.all((w(q) > 1) & (w(q) <= 2))
    # the exterior branch starts at 1: the family drops by one across q = 0
    assert w(1e-12) == pytest.approx(1.0) and w(-1e-12) == pytest.approx(2.0)


def test_weight_validation():
    with pytest.raises(ValueError):
        dg.WeightSpec(delta=0.4)
    with pytest.raises(ValueError):
        dg.WeightSpec(mu=0.3)
    with pytest.raises(ValueError):
        dg.WeightSpec(family="w3")


# ---------------------------------------------------------------- energies

@pytest.fixture(scope="module")
def grid():
    return GridSpec(256, 16, 40.0)


def test_weighted_energy_zero_and_bounds(grid):
    z = np.zeros(grid.shape)
    assert dg.weighted_energy([z, z], 0.0, grid, dg.WeightSpec()) == 0.0
    u = np.exp(-grid.r ** 2) * (1 + 0.3 * grid.x)
    D = [u, np.zeros(grid.shape)]
    plain = dg.weighted_energy(D, 10.0, grid, lambda q: np.ones_like(q))
    wv = dg.weighted_energy(D, 10.0, grid, dg.WeightSpec())
    assert plain < wv <= np.sqrt(2) * plain


def test_weighted_energy_gaussian_quadrature():
    g = GridSpec(400, 8, 10.0)
    u = np.exp(-g.r ** 2)
    wt = dg.WeightSpec()
    val = dg.weighted_energy([u, np.zeros(g.shape)], 1.0, g, wt)
    ref = quad(lambda r: 2 * np.pi * r * wt(r - 1.0) * 4 * r ** 2 * np.exp(-2 * r ** 2),
               0, 12, points=[1.0])[0]
    assert val == pytest.approx(np.sqrt(ref), rel=1e-4)


def test_weighted_energy_needs_time_derivatives(grid):
    z = np.zeros(grid.shape)
    with pytest.raises(ValueError):
        dg.weighted_energy([z, z], 0.0, grid, dg.WeightSpec(), I=[fr.VectorFieldId.S])


@pytest.fixture(scope="module")
def flat_frames(grid):
    traj = fw.solve_flat_wave(np.exp(-grid.r ** 2 / 2), np.zeros(grid.shape), grid, 12.0,
                              record_every=0.25)
    return [(t, u, ut, np.zeros(grid.shape)) for t, u, ut in zip(traj.times, traj.phi, traj.phi_t)]


@pytest.mark.parametrize("family", ["w1", "w2"])
def test_energy_margin_continuous_weights(grid, flat_frames, family):
    # for a continuous weight and a free wave the identity holds with C = 1/2 and zero right side
    m = dg.energy_inequality_margin(flat_frames, grid, dg.WeightSpec(family=family), eps=0.01)
    assert m["max_ratio"] < 1.0


def test_energy_margin_w_finite(grid, flat_frames):
    m = dg.energy_inequality_margin(flat_frames, grid, dg.WeightSpec(), eps=0.01)
    assert np.isfinite(m["max_ratio"]) and m["max_ratio"] > 0


def test_energy_margin_homogeneous(grid, flat_frames):
    spec = dg.WeightSpec()
    doubled = [(t, 2 * u, 2 * ut, 2 * f) for t, u, ut, f in flat_frames]
    a = dg.energy_inequality_margin(flat_frames, grid, spec, eps=0.01)
    b = dg.energy_inequality_margin(doubled, grid, spec, eps=0.01)
    np.testing.assert_allclose(b["ratio"], a["ratio"], rtol=1e-12)
    np.testing.assert_allclose(b["energy"], 4 * a["energy"], rtol=1e-12)


# ---------------------------------------------------------------- Delta_h

def test_delta_h_trivial(grid):
    z = np.zeros(grid.shape)
    assert dg.delta_h(z, z, 0.0, grid, lambda th, s: 0.0 * th) == 0.0


@pytest.fixture(scope="module")
def moving_data():
    g = GridSpec(320, 16, 16.0)
    phi0 = 0.01 * np.exp(-g.r ** 2) * (1 + 0.5 * g.x)
    phi1 = 0.01 * np.exp(-g.r ** 2) * g.y
    energy = fr.integrate(phi1 ** 2 + sum(d ** 2 for d in fr.gradient(phi0, g)), g)
    return g, phi0, phi1, a_from_phi(phi0, phi1, g), energy


def test_delta_h_matched_static_data():
    g = GridSpec(320, 16, 16.0)
    phi0 = 0.01 * np.exp(-g.r ** 2) * (1 + 0.5 * g.x)
    a = a_from_phi(phi0, np.zeros(g.shape), g)
    energy = fr.integrate(sum(d ** 2 for d in fr.gradient(phi0, g)), g)
    assert dg.delta_h(phi0, np.zeros(g.shape), 0.0, g, lambda th, s: 2 * a.a(th)) < 1e-12 * energy


def test_delta_h_momentum_sign(moving_data):
    # h = 2a with the leading-order a1, a2 doubles the momentum terms instead of cancelling them
    g, phi0, phi1, a, energy = moving_data
    m = np.pi * np.array([a.a1, a.a2])
    lit = dg.delta_h(phi0, phi1, 0.0, g, lambda th, s: 2 * a.a(th))
    assert lit == pytest.approx(4 * np.abs(m).sum(), rel=1e-10)
    assert lit > 0.5 * energy
    flipped = ACoeffs(a.a0, -a.a1, -a.a2)
    assert dg.delta_h(phi0, phi1, 0.0, g, lambda th, s: 2 * flipped.a(th)) < 1e-12 * energy


def _rotation_case(k):
    g = GridSpec(128, 16, 12.0)
    phi = np.exp(-g.r ** 2) * (1 + 0.4 * g.x + 0.2 * g.y)
    phit = np.exp(-g.r ** 2) * 0.3 * (1 + g.x - 2 * g.y)
    h = lambda th, s: 0.1 + 0.05 * np.cos(th) - 0.02 * np.sin(2 * th)
    alpha = k * g.dtheta
    # rotating the state by alpha moves row j to row j + k
    rot = lambda f: np.roll(f, k, axis=0)
    hr = lambda th, s: h(th - alpha, s)
    return dg.delta_h(phi, phit, 1.0, g, h), dg.delta_h(rot(phi), rot(phit), 1.0, g, hr)


@pytest.mark.parametrize("k", [4, 8, 12])
def test_delta_h_quarter_turn_equivariance(k):
    before, after = _rotation_case(k)
    assert after == pytest.approx(before, rel=1e-12)


def test_delta_h_generic_rotation_moves_l1_sum():
    # the momentum part is an l1 sum of a rotating 2-vector: only quarter turns preserve it
    before, after = _rotation_case(3)
    assert abs(after - before) > 1e-6 * before


# ---------------------------------------------------------------- fits

@given(p=st.floats(-3, 2), c=st.floats(1e-3, 1e3))
def test_fit_exact_power(p, c):
    t = np.linspace(5, 50, 40)
    f = dg.fit_decay(t, c * (1 + t) ** p)
    assert f.exponent == pytest.approx(p, abs=1e-10)
    assert f.stderr < 1e-8


def test_fit_inverse_and_constant():
    t = np.arange(0, 60.5, 0.5)
    f = dg.fit_decay(t, 1 / (1 + t), window=(5, 50))
    assert f.exponent == pytest.approx(-1.0, abs=1e-12)
    assert f.n == 91
    assert dg.fit_decay(t, np.full(t.size, 3.0)).exponent == pytest.approx(0.0, abs=1e-12)


def test_fit_errors():
    t = np.linspace(0, 10, 20)
    with pytest.raises(ValueError):
        dg.fit_decay(t[:5], np.ones(5))
    with pytest.raises(ValueError):
        dg.fit_decay(t, np.where(t > 5, 0.0, 1.0))
    with pytest.raises(ValueError):
        dg.fit_decay(t, -np.ones(20))


# ---------------------------------------------------------------- runs

@pytest.fixture(scope="module")
def small_run():
    cfg = ev.RunConfig(n_r=160, n_theta=8, r_max=32.0, T_final=4.0, output_every=0.5)
    return ev.run(cfg, monitor=dg.monitor_row, history_every=0.25)


def test_monitor_rows(small_run):
    keys = {"t", "dLbLb_l2", "sup_g", "sup_phi", "sup_phi_outside", "gauge_sup",
            "ham_sup", "mom_sup", "delta_h", "sup_k"}
    assert len(small_run.rows) == 9
    for row in small_run.rows:
        assert set(row) == keys
        assert all(np.isfinite(v) for v in row.values())
    first = small_run.rows[0]
    assert first["dLbLb_l2"] == 0.0 and first["sup_g"] == 0.0
    assert first["delta_h"] < 1e-12


def test_monitor_zero_state():
    cfg = ev.RunConfig(n_r=64, n_theta=8, r_max=32.0, eps=0.0, T_final=0.5)
    res = ev.run(cfg, monitor=dg.monitor_row)
    for row in res.rows:
        assert all(v == 0.0 for k, v in row.items() if k != "t")


def test_wave_condition_goodness(small_run):
    evo, state = small_run.evolution, small_run.state
    rep = dg.wave_condition_goodness(state, evo)
    for k in ("LL", "LU", "UU"):
        assert np.isfinite(rep[f"{k}_sup"]) and np.isfinite(rep[f"{k}_ratio"])
    z = ev.FieldState.zeros(evo.grid, t=2.0)
    flat = ev.Evolution(ev.RunConfig(n_r=160, n_theta=8, r_max=32.0, gauge_mode="plain_harmonic"),
                        ACoeffs())
    rep0 = dg.wave_condition_goodness(z, flat)
    assert all(rep0[f"{k}_sup"] == 0.0 for k in ("LL", "LU", "UU"))


def test_extract_h(small_run):
    evo, hist = small_run.evolution, small_run.history
    hx = dg.extract_h(hist, evo)
    assert hx.T == pytest.approx(4.0)
    assert np.all(hx.beta[-1] == 0.0)
    np.testing.assert_allclose(hx.s, 2 * np.array([t for t, _ in hist]))
    mis = dg.flux_mismatch(hx, hist, evo.grid)
    scale = np.sqrt(np.sum(hx.h_check ** 2, axis=1) * evo.grid.dtheta)
    # at t = 0 the metric is exactly flat and beta is the only difference
    assert np.all(mis[1:] <= 0.05 * scale[1:] + 1e-14)
    hp = hx.h_prime()
    np.testing.assert_allclose(hp[hx.s <= 2 * hx.T - 1], hx.h_check[hx.s <= 2 * hx.T - 1])
    np.testing.assert_allclose(hp[-1], hx.h_check[-1])
    text = hx.to_text(n_modes=3)
    assert text.startswith("# h fourier table")
    assert len([ln for ln in text.splitlines() if not ln.startswith(("#", "modes", "rows"))]) == hx.s.size


def test_extract_h_beta_zero_without_sources():
    cfg = ev.RunConfig(n_r=64, n_theta=8, r_max=32.0, eps=0.0, T_final=1.0)
    res = ev.run(cfg, history_every=0.25)
    hx = dg.extract_h(res.history, res.evolution)
    assert np.all(hx.beta == 0.0)
    assert np.all(hx.h_check == 0.0)


def test_history_errors(small_run):
    evo = small_run.evolution
    with pytest.raises(dg.HistoryError):
        dg.extract_h([], evo)
    with pytest.raises(dg.HistoryError):
        dg.extract_h(small_run.history, evo, T=10.0)
    with pytest.raises(dg.HistoryError):
        dg.eikonal_cone_check([], evo)


def test_cone_flat_translate():
    # flat metric and a profile whose edge moves out at unit speed: the u-level stays put
    cfg = ev.RunConfig(n_r=256, n_theta=8, r_max=32.0, gauge_mode="plain_harmonic", R=3.0)
    evo = ev.Evolution(cfg, ACoeffs())
    g = evo.grid
    hist = []
    for t in np.arange(0, 6.01, 0.5):
        Y = ev.FieldState.zeros(g).Y.copy()
        Y[PHI] = 1.0 - smoothstep(g.r - t - 2.0)
        Y[PI] = 0.0
        hist.append((t, Y))
    rep = dg.eikonal_cone_check(hist, evo, tol=1e-6)
    assert np.ptp(rep.levels) < 2 * g.dr
    assert rep.max_level == pytest.approx(3.0, abs=2 * g.dr)


def test_barLbarL_norm_zero(small_run):
    z = ev.FieldState.zeros(small_run.evolution.grid)
    assert dg.barLbarL_norm(z, small_run.evolution.grid) == 0.0
