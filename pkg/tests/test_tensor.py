import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from wavegauge import tensor as tn


def random_jet(rng, n=5, amp=0.3):
    g = tn.minkowski((n,)) + amp * tn.sym_from_components(rng.normal(size=(6, n)))
    g[0, 0] -= 1.0  # keep it Lorentzian
    dg = rng.normal(size=(3, 3, 3, n))
    dg = 0.5 * (dg + np.swapaxes(dg, 1, 2))
    ddg = rng.normal(size=(3, 3, 3, 3, n))
    ddg = 0.5 * (ddg + np.swapaxes(ddg, 0, 1))
    ddg = 0.5 * (ddg + np.swapaxes(ddg, 2, 3))
    return tn.MetricJet(g, dg, ddg)


@given(st.integers(0, 10_000))
def test_inverse3_matches_numpy(seed):
    jet = random_jet(np.random.default_rng(seed))
    inv = tn.inverse3(jet.g)
    ref = np.linalg.inv(np.moveaxis(jet.g, -1, 0))
    assert np.allclose(np.moveaxis(inv, -1, 0), ref, rtol=1e-10, atol=1e-12)


def test_degenerate_metric_raises():
    with pytest.raises(tn.DegenerateMetric):
        tn.inverse3(np.zeros((3, 3, 2)))


@given(st.integers(0, 10_000))
def test_reduced_ricci_identity(seed):
    # 2R = -g^{ab} dd_ab g + H^r d_r g + sym(g dH) + P(g)(dg, dg)
    jet = random_jet(np.random.default_rng(seed))
    gi = jet.ginv
    H = tn.H_christoffel(gi, jet.dg)
    dH = tn.dH_christoffel(gi, jet.dg, jet.ddg)
    lhs = 2 * tn.ricci(jet)
    rhs = (-np.einsum("ab...,abmn...->mn...", gi, jet.ddg)
           + np.einsum("r...,rmn...->mn...", H, jet.dg)
           + tn.sym_grad_term(jet.g, dH) + tn.P_quadratic(gi, jet.dg))
    assert np.abs(lhs - rhs).max() < 1e-10 * max(1.0, np.abs(lhs).max())


@given(st.integers(0, 10_000))
def test_compiled_kernels_match(seed):
    jet = random_jet(np.random.default_rng(seed))
    gi, F, dF, R, P = tn.jet_bundle(jet)
    assert np.allclose(gi, jet.ginv, atol=1e-12)
    assert np.allclose(F, tn.H_christoffel(jet.ginv, jet.dg), atol=1e-11)
    assert np.allclose(dF, tn.dH_christoffel(jet.ginv, jet.dg, jet.ddg), atol=1e-10)
    assert np.allclose(R, tn.ricci(jet), atol=1e-10)
    assert np.allclose(P, tn.P_quadratic(jet.ginv, jet.dg), atol=1e-10)
    assert np.allclose(tn.P_quadratic_fast(jet.ginv, jet.dg), P, atol=1e-12)


@given(st.integers(0, 10_000))
def test_H_linear_operator_is_contracted_christoffel(seed):
    jet = random_jet(np.random.default_rng(seed))
    assert np.allclose(tn.H_linear_operator(jet.ginv, jet.dg),
                       tn.H_christoffel(jet.ginv, jet.dg), atol=1e-12)


def test_sym_roundtrip():
    c = np.arange(6.0)
    assert np.array_equal(tn.components_from_sym(tn.sym_from_components(c)), c)


# [DERIVED] symbolic Ricci of an explicit metric evaluated at a point
def _sympy_ricci_jet():
    t, x, y = X = sp.symbols("t x y")
    g = sp.Matrix([[-1 - sp.Rational(1, 5) * x * y * t, sp.Rational(1, 10) * sp.sin(x), 0],
                   [sp.Rational(1, 10) * sp.sin(x), 1 + x ** 2 * y / 7, sp.Rational(1, 20) * t * y],
                   [0, sp.Rational(1, 20) * t * y, sp.exp(x * y / 9)]])
    gi = g.inv()
    Gam = [[[sum(gi[a, l] * (sp.diff(g[l, m], X[n]) + sp.diff(g[l, n], X[m])
                             - sp.diff(g[m, n], X[l])) for l in range(3)) / 2
             for n in range(3)] for m in range(3)] for a in range(3)]
    R = sp.zeros(3)
    for m in range(3):
        for n in range(3):
            R[m, n] = (sum(sp.diff(Gam[a][m][n], X[a]) for a in range(3))
                       - sum(sp.diff(Gam[a][a][m], X[n]) for a in range(3))
                       + sum(Gam[a][a][b] * Gam[b][m][n] for a in range(3) for b in range(3))
                       - sum(Gam[a][n][b] * Gam[b][a][m] for a in range(3) for b in range(3)))
    pt = {t: 0.3, x: 0.7, y: -0.4}
    ev = lambda e: float(e.subs(pt).evalf())
    gn = np.array([[ev(g[i, j]) for j in range(3)] for i in range(3)])
    dg = np.array([[[ev(sp.diff(g[i, j], X[a])) for j in range(3)] for i in range(3)]
                   for a in range(3)])
    ddg = np.array([[[[ev(sp.diff(g[i, j], X[a], X[b])) for j in range(3)] for i in range(3)]
                     for b in range(3)] for a in range(3)])
    Rn = np.array([[ev(R[i, j]) for j in range(3)] for i in range(3)])
    return tn.MetricJet(gn, dg, ddg), Rn


def test_ricci_against_symbolic():
    jet, Rn = _sympy_ricci_jet()
    assert np.allclose(tn.ricci(jet), Rn, atol=1e-12)
