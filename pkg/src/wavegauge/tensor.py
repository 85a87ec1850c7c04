"""Pointwise tensor kernels on metric jets.

A jet stores a symmetric 3x3 metric together with its first and second
coordinate derivatives, all in (t, x, y) components and broadcast over
trailing grid axes:

    g[m, n, ...], dg[a, m, n, ...] = d_a g_mn, ddg[a, b, m, n, ...] = d_a d_b g_mn.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ES = dict(optimize=True)


@dataclass
class MetricJet:
    g: np.ndarray
    dg: np.ndarray
    ddg: np.ndarray | None = None

    @property
    def ginv(self) -> np.ndarray:
        if not hasattr(self, "_ginv"):
            self._ginv = inverse3(self.g)
        return self._ginv


class DegenerateMetric(ArithmeticError):
    pass


def minkowski(shape=()) -> np.ndarray:
    m = np.zeros((3, 3) + tuple(shape))
    m[0, 0] = -1.0
    m[1, 1] = 1.0
    m[2, 2] = 1.0
    return m


def det3(g: np.ndarray) -> np.ndarray:
    return (g[0, 0] * (g[1, 1] * g[2, 2] - g[1, 2] * g[2, 1])
            - g[0, 1] * (g[1, 0] * g[2, 2] - g[1, 2] * g[2, 0])
            + g[0, 2] * (g[1, 0] * g[2, 1] - g[1, 1] * g[2, 0]))


def inverse3(g: np.ndarray) -> np.ndarray:
    """Closed-form inverse of a symmetric 3x3 field."""
    d = det3(g)
    if np.any(d == 0) or not np.all(np.isfinite(d)):
        raise DegenerateMetric("singular metric")
    inv = np.empty_like(g)
    inv[0, 0] = g[1, 1] * g[2, 2] - g[1, 2] ** 2
    inv[1, 1] = g[0, 0] * g[2, 2] - g[0, 2] ** 2
    inv[2, 2] = g[0, 0] * g[1, 1] - g[0, 1] ** 2
    inv[0, 1] = inv[1, 0] = g[0, 2] * g[1, 2] - g[0, 1] * g[2, 2]
    inv[0, 2] = inv[2, 0] = g[0, 1] * g[1, 2] - g[0, 2] * g[1, 1]
    inv[1, 2] = inv[2, 1] = g[0, 1] * g[0, 2] - g[0, 0] * g[1, 2]
    return inv / d


def christoffel_first(dg: np.ndarray) -> np.ndarray:
    """Gamma_{s m n} = (d_m g_sn + d_n g_sm - d_s g_mn) / 2."""
    return 0.5 * (np.swapaxes(dg, 0, 1) + np.moveaxis(dg, 0, 2).swapaxes(0, 1) - dg)


def christoffel(ginv: np.ndarray, dg: np.ndarray) -> np.ndarray:
    """Gamma^a_{mn}."""
    return np.einsum("as...,smn...->amn...", ginv, christoffel_first(dg), **ES)


def d_inverse(ginv: np.ndarray, dg: np.ndarray) -> np.ndarray:
    """d_c g^{ab} = -g^{am} d_c g_mn g^{nb}."""
    return -np.einsum("am...,cmn...,nb...->cab...", ginv, dg, ginv, **ES)


def d_christoffel(ginv: np.ndarray, dg: np.ndarray, ddg: np.ndarray) -> np.ndarray:
    """d_c Gamma^a_{mn} indexed [c, a, m, n]."""
    G1 = christoffel_first(dg)
    # d_c Gamma_{smn} = (dd_{c m} g_sn + dd_{c n} g_sm - dd_{c s} g_mn) / 2
    dG1 = 0.5 * (np.einsum("cmsn...->csmn...", ddg)
                 + np.einsum("cnsm...->csmn...", ddg)
                 - ddg)
    dinv = d_inverse(ginv, dg)
    return (np.einsum("cas...,smn...->camn...", dinv, G1, **ES)
            + np.einsum("as...,csmn...->camn...", ginv, dG1, **ES))


def ricci(jet: MetricJet) -> np.ndarray:
    """R_mn = d_a Gamma^a_mn - d_n Gamma^a_am + Gamma^a_ab Gamma^b_mn - Gamma^a_nb Gamma^b_am."""
    ginv = jet.ginv
    Gam = christoffel(ginv, jet.dg)
    dGam = d_christoffel(ginv, jet.dg, jet.ddg)
    tr = np.einsum("aamn...->mn...", dGam)
    dtr = np.einsum("naam...->mn...", dGam)
    con = np.einsum("aab...->b...", Gam)
    q1 = np.einsum("b...,bmn...->mn...", con, Gam, **ES)
    q2 = np.einsum("anb...,bam...->mn...", Gam, Gam, **ES)
    return tr - dtr + q1 - q2


def H_christoffel(ginv: np.ndarray, dg: np.ndarray) -> np.ndarray:
    """H^a = g^{lb} Gamma^a_{lb}."""
    return np.einsum("lb...,alb...->a...", ginv, christoffel(ginv, dg), **ES)


def dH_christoffel(ginv: np.ndarray, dg: np.ndarray, ddg: np.ndarray) -> np.ndarray:
    """d_c H^a indexed [c, a]."""
    Gam = christoffel(ginv, dg)
    dinv = d_inverse(ginv, dg)
    dGam = d_christoffel(ginv, dg, ddg)
    return (np.einsum("clb...,alb...->ca...", dinv, Gam, **ES)
            + np.einsum("lb...,calb...->ca...", ginv, dGam, **ES))


def H_linear_operator(ginv: np.ndarray, X: np.ndarray) -> np.ndarray:
    """K(g)[X]^a = g^{lb} g^{as} (X_{l s b} - X_{s l b} / 2), linear in X = d g."""
    return (np.einsum("lb...,as...,lsb...->a...", ginv, ginv, X, **ES)
            - 0.5 * np.einsum("lb...,as...,slb...->a...", ginv, ginv, X, **ES))


def P_quadratic(ginv: np.ndarray, du: np.ndarray) -> np.ndarray:
    """Quadratic form P_mn(g)(du, du) of the reduced Ricci decomposition.

    Defined so that, with du = dg,
    2 R_mn = -g^{ab} dd_ab g_mn + H^r d_r g_mn + g_mr d_n H^r + g_nr d_m H^r + P_mn.
    Every term is a contraction of two copies of du against the inverse metric.
    """
    G1 = christoffel_first(du)
    Gam = np.einsum("as...,smn...->amn...", ginv, G1, **ES)
    dinv = d_inverse(ginv, du)
    H = np.einsum("lb...,alb...->a...", ginv, Gam, **ES)
    con = np.einsum("aab...->b...", Gam)
    t1 = 2.0 * np.einsum("aas...,smn...->mn...", dinv, G1, **ES)
    t2 = np.einsum("nas...,mas...->mn...", dinv, du, **ES)
    t3 = 2.0 * np.einsum("b...,bmn...->mn...", con, Gam, **ES)
    t4 = 2.0 * np.einsum("anb...,bam...->mn...", Gam, Gam, **ES)
    # quadratic part of d_n H_m, with H_m = g^{ab}(d_a g_mb - d_m g_ab / 2)
    hm = (np.einsum("nab...,amb...->mn...", dinv, du, **ES)
          - 0.5 * np.einsum("nab...,mab...->mn...", dinv, du, **ES))
    t5 = hm + np.swapaxes(hm, 0, 1)
    t6 = 2.0 * np.einsum("r...,rmn...->mn...", H, G1, **ES)
    return t1 - t2 + t3 - t4 - t5 + t6


def lower(g: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.einsum("ab...,b...->a...", g, v)


def sym_grad_term(g: np.ndarray, dV: np.ndarray) -> np.ndarray:
    """g_mr d_n V^r + g_nr d_m V^r with dV indexed [c, r]."""
    T = np.einsum("mr...,nr...->mn...", g, dV)
    return T + np.swapaxes(T, 0, 1)


def sym_from_components(c6) -> np.ndarray:
    """Build (3, 3, ...) from the six components (00, 01, 02, 11, 12, 22)."""
    c6 = np.asarray(c6)
    out = np.empty((3, 3) + c6.shape[1:])
    idx = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]
    for k, (i, j) in enumerate(idx):
        out[i, j] = out[j, i] = c6[k]
    return out


SYM_INDEX = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))


def components_from_sym(T: np.ndarray) -> np.ndarray:
    return np.stack([T[i, j] for i, j in SYM_INDEX])


# --------------------------------------------------------------------------
# compiled pointwise kernels (same formulas, loop form)

import numba as nb


@nb.njit(cache=True, fastmath=False)
def _inv3(g, out):
    a, b, c = g[0, 0], g[0, 1], g[0, 2]
    d, e, f = g[1, 1], g[1, 2], g[2, 2]
    c00 = d * f - e * e
    c01 = c * e - b * f
    c02 = b * e - c * d
    det = a * c00 + b * c01 + c * c02
    out[0, 0] = c00 / det
    out[0, 1] = out[1, 0] = c01 / det
    out[0, 2] = out[2, 0] = c02 / det
    out[1, 1] = (a * f - c * c) / det
    out[1, 2] = out[2, 1] = (b * c - a * e) / det
    out[2, 2] = (a * d - b * b) / det


@nb.njit(cache=True)
def _point_P(gi, du, G1, Gam, dinv, out):
    for s in range(3):
        for m in range(3):
            for n in range(3):
                G1[s, m, n] = 0.5 * (du[m, s, n] + du[n, s, m] - du[s, m, n])
    for a in range(3):
        for m in range(3):
            for n in range(3):
                acc = 0.0
                for s in range(3):
                    acc += gi[a, s] * G1[s, m, n]
                Gam[a, m, n] = acc
    for c in range(3):
        for a in range(3):
            for b in range(3):
                acc = 0.0
                for m in range(3):
                    for n in range(3):
                        acc += gi[a, m] * du[c, m, n] * gi[n, b]
                dinv[c, a, b] = -acc
    H = np.zeros(3)
    con = np.zeros(3)
    for a in range(3):
        acc = 0.0
        for l in range(3):
            for b in range(3):
                acc += gi[l, b] * Gam[a, l, b]
        H[a] = acc
        acc = 0.0
        for b in range(3):
            acc += Gam[b, b, a]
        con[a] = acc
    hm = np.zeros((3, 3))
    for m in range(3):
        for n in range(3):
            t1 = 0.0
            t2 = 0.0
            t3 = 0.0
            t4 = 0.0
            t6 = 0.0
            h = 0.0
            for a in range(3):
                for s in range(3):
                    t1 += dinv[a, a, s] * G1[s, m, n]
                    t2 += dinv[n, a, s] * du[m, a, s]
                    t4 += Gam[a, n, s] * Gam[s, a, m]
                    h += dinv[n, a, s] * (du[a, m, s] - 0.5 * du[m, a, s])
                t3 += con[a] * Gam[a, m, n]
                t6 += H[a] * G1[a, m, n]
            out[m, n] = 2.0 * t1 - t2 + 2.0 * t3 - 2.0 * t4 + 2.0 * t6
            hm[m, n] = h
    for m in range(3):
        for n in range(3):
            out[m, n] -= hm[m, n] + hm[n, m]


@nb.njit(cache=True)
def _P_loop(ginv, du, out):
    N = ginv.shape[-1]
    G1 = np.empty((3, 3, 3))
    Gam = np.empty((3, 3, 3))
    dinv = np.empty((3, 3, 3))
    gi = np.empty((3, 3))
    d = np.empty((3, 3, 3))
    o = np.empty((3, 3))
    for p in range(N):
        for i in range(3):
            for j in range(3):
                gi[i, j] = ginv[i, j, p]
                for k in range(3):
                    d[i, j, k] = du[i, j, k, p]
        _point_P(gi, d, G1, Gam, dinv, o)
        for i in range(3):
            for j in range(3):
                out[i, j, p] = o[i, j]


def P_quadratic_fast(ginv: np.ndarray, du: np.ndarray) -> np.ndarray:
    """Compiled equivalent of :func:`P_quadratic`."""
    shape = ginv.shape[2:]
    N = int(np.prod(shape))
    gi = np.ascontiguousarray(ginv.reshape(3, 3, N))
    d = np.ascontiguousarray(du.reshape(3, 3, 3, N))
    out = np.empty((3, 3, N))
    _P_loop(gi, d, out)
    return out.reshape((3, 3) + shape)


@nb.njit(cache=True)
def _bundle_loop(g, dg, ddg, ginv_o, F_o, dF_o, R_o, P_o):
    N = g.shape[-1]
    gi = np.empty((3, 3))
    gp = np.empty((3, 3))
    d = np.empty((3, 3, 3))
    dd = np.empty((3, 3, 3, 3))
    G1 = np.empty((3, 3, 3))
    Gam = np.empty((3, 3, 3))
    dinv = np.empty((3, 3, 3))
    dG1 = np.empty((3, 3, 3, 3))
    dGam = np.empty((3, 3, 3, 3))
    o = np.empty((3, 3))
    for p in range(N):
        for i in range(3):
            for j in range(3):
                gp[i, j] = g[i, j, p]
                for k in range(3):
                    d[i, j, k] = dg[i, j, k, p]
                    for l in range(3):
                        dd[i, j, k, l] = ddg[i, j, k, l, p]
        _inv3(gp, gi)
        _point_P(gi, d, G1, Gam, dinv, o)
        for c in range(3):
            for s in range(3):
                for m in range(3):
                    for n in range(3):
                        dG1[c, s, m, n] = 0.5 * (dd[c, m, s, n] + dd[c, n, s, m] - dd[c, s, m, n])
        for c in range(3):
            for a in range(3):
                for m in range(3):
                    for n in range(3):
                        acc = 0.0
                        for s in range(3):
                            acc += dinv[c, a, s] * G1[s, m, n] + gi[a, s] * dG1[c, s, m, n]
                        dGam[c, a, m, n] = acc
        for i in range(3):
            for j in range(3):
                ginv_o[i, j, p] = gi[i, j]
                P_o[i, j, p] = o[i, j]
        for a in range(3):
            acc = 0.0
            for l in range(3):
                for b in range(3):
                    acc += gi[l, b] * Gam[a, l, b]
            F_o[a, p] = acc
        for c in range(3):
            for a in range(3):
                acc = 0.0
                for l in range(3):
                    for b in range(3):
                        acc += dinv[c, l, b] * Gam[a, l, b] + gi[l, b] * dGam[c, a, l, b]
                dF_o[c, a, p] = acc
        for m in range(3):
            for n in range(3):
                acc = 0.0
                for a in range(3):
                    acc += dGam[a, a, m, n] - dGam[n, a, a, m]
                    for b in range(3):
                        acc += Gam[a, a, b] * Gam[b, m, n] - Gam[a, n, b] * Gam[b, a, m]
                R_o[m, n, p] = acc


def jet_bundle(jet: MetricJet):
    """(ginv, H, dH[c, a], Ricci, P(g)(dg, dg)) of a jet in one compiled pass."""
    shape = jet.g.shape[2:]
    N = int(np.prod(shape))
    g = np.ascontiguousarray(jet.g.reshape(3, 3, N))
    dg = np.ascontiguousarray(jet.dg.reshape(3, 3, 3, N))
    ddg = np.ascontiguousarray(jet.ddg.reshape(3, 3, 3, 3, N))
    ginv = np.empty((3, 3, N))
    F = np.empty((3, N))
    dF = np.empty((3, 3, N))
    R = np.empty((3, 3, N))
    P = np.empty((3, 3, N))
    _bundle_loop(g, dg, ddg, ginv, F, dF, R, P)
    rs = lambda a, k: a.reshape(a.shape[:k] + shape)
    return rs(ginv, 2), rs(F, 1), rs(dF, 2), rs(R, 2), rs(P, 2)
