import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from wavegauge import bsolve as bs
from wavegauge.background import ACoeffs

N = 64
TH = 2 * np.pi * np.arange(N) / N


# ---------------------------------------------------------------- spectral helpers

def test_spectral_derivative():
    u = np.sin(3 * TH) + 0.5 * np.cos(5 * TH)
    np.testing.assert_allclose(bs.spectral_derivative(u), 3 * np.cos(3 * TH) - 2.5 * np.sin(5 * TH),
                               atol=1e-12)
    np.testing.assert_allclose(bs.spectral_derivative(u, 2), -9 * np.sin(3 * TH) - 12.5 * np.cos(5 * TH),
                               atol=1e-11)


def test_project_high_and_antiderivative():
    u = 2 + np.cos(TH) - 3 * np.sin(TH) + np.cos(2 * TH)
    np.testing.assert_allclose(bs.project_high(u), np.cos(2 * TH), atol=1e-14)
    F = bs.zero_mean_antiderivative(u)
    np.testing.assert_allclose(F, np.sin(TH) + 3 * np.cos(TH) + 0.5 * np.sin(2 * TH), atol=1e-13)


def test_fourier_resample_band_limited():
    u = np.cos(3 * TH) - 0.2 * np.sin(7 * TH)
    m = 4 * N
    th = 2 * np.pi * np.arange(m) / m
    np.testing.assert_allclose(bs.fourier_resample(u, m), np.cos(3 * th) - 0.2 * np.sin(7 * th),
                               atol=1e-13)


# ---------------------------------------------------------------- solver

def test_zero_fixed_point():
    r = bs.solve_b_from_h(np.zeros(N))
    assert np.all(r.b == 0) and (r.b0, r.b1, r.b2) == (0.0, 0.0, 0.0)


def test_a0_forces_b0():
    a = ACoeffs(a0=3e-4)
    r = bs.solve_b_from_h(np.zeros(N), a)
    assert np.max(np.abs(r.b)) == 0.0
    assert r.b0 == pytest.approx(2 * 3e-4, rel=1e-14)
    assert abs(r.b1) < 1e-18 and abs(r.b2) < 1e-18


def _linear_coefficient():
    """Symbolic linearisation of the circle display around b = 0 for b = B cos(k theta)."""
    th, eps, B, k = sp.symbols("theta epsilon B k", real=True)
    b = eps * B * sp.cos(k * th)
    display = (1 / (1 + b) ** 2 - 1 - 2 * sp.diff(b, th, 2) / (1 + b)
               + sp.diff(b, th) ** 2 / (1 + b) ** 2)
    lin = sp.simplify(sp.diff(display, eps).subs(eps, 0) / sp.cos(k * th))
    # display = delta cos(k theta) to first order
    return sp.lambdify(k, sp.solve(sp.Eq(lin, 1), B)[0])


@pytest.mark.parametrize("k", [2, 3, 5])
def test_linear_response_symbolic(k):
    coef = _linear_coefficient()
    delta = 1e-7
    r = bs.solve_b_from_h(lambda t: delta * np.cos(k * t))
    np.testing.assert_allclose(r.b, delta * coef(k) * np.cos(k * TH), atol=1e-5 * delta)
    assert coef(k) == pytest.approx(1 / (2 * (k ** 2 - 1)))


def test_cos2_substitution_residual():
    h = 1e-4 * np.cos(2 * TH)
    r = bs.solve_b_from_h(h, tol=1e-12)
    assert r.residual <= 1e-12
    assert bs.substitution_residual(r, h, ACoeffs(), dense=8) <= 1e-12
    assert r.intb < 1e-15


def test_low_modes_are_absorbed():
    base = bs.solve_b_from_h(1e-4 * np.cos(2 * TH))
    more = bs.solve_b_from_h(1e-4 * (np.cos(2 * TH) + 3 + np.cos(TH) - np.sin(TH)))
    np.testing.assert_allclose(more.b, base.b, atol=1e-16)


@given(c=st.lists(st.floats(-1e-3, 1e-3), min_size=6, max_size=6),
       a=st.tuples(st.floats(0, 1e-3), st.floats(-1e-3, 1e-3), st.floats(-1e-3, 1e-3)))
def test_random_targets_solve(c, a):
    h = sum(ci * np.cos((i // 2 + 2) * TH + (i % 2) * np.pi / 2) for i, ci in enumerate(c))
    ac = ACoeffs(*a)
    r = bs.solve_b_from_h(h, ac, tol=1e-10)
    assert bs.substitution_residual(r, h, ac) <= 1e-10
    assert r.intb < 1e-13


@given(c=st.lists(st.floats(-1e-3, 1e-3), min_size=4, max_size=4), shift=st.integers(1, N - 1))
def test_rotation_equivariance_without_a(c, shift):
    h = sum(ci * np.cos((i + 2) * TH + i) for i, ci in enumerate(c))
    r = bs.solve_b_from_h(h)
    rr = bs.solve_b_from_h(np.roll(h, shift))
    np.testing.assert_allclose(rr.b, np.roll(r.b, shift), atol=1e-14)


def test_ball_violation():
    with pytest.raises(bs.BallViolation):
        bs.solve_b_from_h(2.0 * np.cos(2 * TH))


def test_non_contraction():
    with pytest.raises(bs.NonContraction):
        bs.solve_b_from_h(1e-2 * np.cos(2 * TH), max_iter=1)


# ---------------------------------------------------------------- profiles

def test_solve_profile_roundtrip():
    s = np.linspace(0, 10, 6)
    h = 1e-5 * np.cos(2 * TH)[None, :] / np.sqrt(1 + s)[:, None]
    prof, results = bs.solve_profile(s, h, n_modes=12)
    for si, r in zip(s, results):
        np.testing.assert_allclose(prof.b(TH, si), r.b, atol=1e-15)


def _decaying_profile(n_s, eps=0.05):
    s = np.linspace(0, 40, n_s)
    h = eps ** 2 * np.cos(2 * TH)[None, :] / np.sqrt(1 + s)[:, None]
    results = [bs.solve_b_from_h(row) for row in h]
    return s, np.stack([r.b for r in results])


def test_hypotheses_zero():
    s = np.linspace(0, 10, 11)
    rep = bs.check_hypotheses_H(s, np.zeros((11, N)), eps=0.1, rho=0.05, sigma=0.1)
    assert all(v == 0.0 for v in rep.values())


def test_hypotheses_homogeneity():
    s, b = _decaying_profile(41)
    one = bs.check_hypotheses_H(s, b, eps=0.05, rho=0.05, sigma=0.1)
    two = bs.check_hypotheses_H(s, 2 * b, eps=0.05, rho=0.05, sigma=0.1)
    for key in ("estb1", "estb2", "estb3", "estb4", "f_pointwise"):
        assert two[key] == pytest.approx(2 * one[key], rel=1e-12)
    for key in ("estb5", "estb5bis", "estb5ter", "f_H1_integrated", "ds_f_H1_integrated"):
        assert two[key] == pytest.approx(4 * one[key], rel=1e-12)


def test_hypotheses_refinement_stable():
    coarse = bs.check_hypotheses_H(*_decaying_profile(41), eps=0.05, rho=0.05, sigma=0.1)
    fine = bs.check_hypotheses_H(*_decaying_profile(161), eps=0.05, rho=0.05, sigma=0.1)
    for key in ("estb1", "estb2", "estb3", "estb4", "f_pointwise", "estb5", "f_H1_integrated"):
        assert np.isfinite(coarse[key])
        assert fine[key] == pytest.approx(coarse[key], rel=0.05), key


def test_hypotheses_needs_samples():
    with pytest.raises(ValueError):
        bs.check_hypotheses_H(np.arange(3.0), np.zeros((3, N)), 0.1, 0.05, 0.1)
