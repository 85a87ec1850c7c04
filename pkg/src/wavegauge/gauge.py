"""Generalized wave-coordinate machinery.

H^a is computed two ways (Christoffel contraction and divergence of the
inverse metric).  The prescribed source is H = F_b + G + G~ where F_b is
the background value, G the constructed source built from the scalar field
flux and the profile h, and G~ a modulation collecting the crossed terms
with high b-derivatives.

G is stored through its frame coefficients, G = G^L L + G^U U, with no
L-bar coefficient.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import frame as fr
from .background import (ACoeffs, BProfile, CutoffSpec, _jacobian, change_of_variables,
                         h_of, metric_ga, minkowski_sqt, null_polar_to_cartesian, time_fd)
from .frame import GridSpec
from .tensor import H_christoffel, H_linear_operator, MetricJet, d_inverse, inverse3

BAND_TERMS = ("chi_prime", "d2q_qchi")


class SupportViolation(ValueError):
    pass


# --------------------------------------------------------------------------
# H two ways


def christoffel_H(jet: MetricJet) -> np.ndarray:
    """H^a = g^{lb} Gamma^a_{lb}."""
    return H_christoffel(jet.ginv, jet.dg)


def wave_gauge_H_divergence(g: np.ndarray, g_t: np.ndarray, grid: GridSpec,
                            outer: str = "extrapolate") -> np.ndarray:
    """H^a = -d_l g^{la} - 1/2 g^{ak} g^{lm} d_k g_lm.

    Spatial derivatives act on the sampled inverse metric; the time
    derivative of the inverse uses d_t g^{-1} = -g^{-1} d_t g g^{-1}.
    """
    ginv = inverse3(g)
    ginv_t = -np.einsum("am...,mn...,nb...->ab...", ginv, g_t, ginv, optimize=True)
    ix, iy = fr.gradient(ginv, grid, outer)
    div = ginv_t[0] + ix[1] + iy[2]
    gx, gy = fr.gradient(g, grid, outer)
    dg = np.stack([g_t, gx, gy])
    trace_grad = np.einsum("lm...,klm...->k...", ginv, dg)
    return -div - 0.5 * np.einsum("ak...,k...->a...", ginv, trace_grad)


# --------------------------------------------------------------------------
# constructed source G


@dataclass
class GaugeSource:
    """G in coordinate components plus its frame coefficients."""

    G: np.ndarray          # (3, n_theta, n_r): G^t, G^x, G^y
    GL: np.ndarray
    GU: np.ndarray
    G_t: np.ndarray | None = None

    @property
    def GLbar(self) -> np.ndarray:
        return np.zeros_like(self.GL)

    def contractions(self, grid: GridSpec) -> dict:
        """Recover the frame coefficients from the coordinate components."""
        c, s = grid.cos, grid.sin
        Gt, Gx, Gy = self.G
        radial = c * Gx + s * Gy
        return {"L": 0.5 * (Gt + radial), "Lbar": 0.5 * (Gt - radial),
                "U": -s * Gx + c * Gy}


def _assemble(GL, GU, grid: GridSpec) -> np.ndarray:
    c, s = grid.cos, grid.sin
    return np.stack([GL, GL * c - GU * s, GL * s + GU * c])


def _inward_integral(f: np.ndarray, dr: float) -> np.ndarray:
    """int_{r_end}^{r} f dr' per ray, trapezoid rule, zero at the last node."""
    seg = 0.5 * dr * (f[..., 1:] + f[..., :-1])
    out = np.zeros_like(f)
    out[..., :-1] = -np.cumsum(seg[..., ::-1], axis=-1)[..., ::-1]
    return out


def _band_profile(cutoff: CutoffSpec, q, band_term: str, n: int = 0):
    """k(q) multiplying h in the G^L integrand (n = 1 gives dk/dq)."""
    if band_term == "chi_prime":
        return cutoff.chi(q, 1 + n)
    if band_term == "d2q_qchi":
        if n == 0:
            return cutoff.d2q_qchi(q)
        return 3.0 * cutoff.chi(q, 2) + q * cutoff.chi(q, 3)
    raise ValueError(f"band_term must be one of {BAND_TERMS}")


def h_from_background(b: BProfile, a: ACoeffs, ds: float = 1e-3) -> Callable:
    """h(theta, s, ns) built from h_of, with the s-derivative by central differences."""
    if b is None or b.s_grid.size == 1:
        def h(theta, s, ns=0):
            s = np.asarray(s, dtype=float)
            val = h_of(b, a, theta, s) if b is not None else 2.0 * a.a(theta) + 0.0 * s
            return val if ns == 0 else np.zeros_like(val)
        return h

    def h(theta, s, ns=0):
        if ns == 0:
            return h_of(b, a, theta, s)
        return (h_of(b, a, theta, s + ds) - h_of(b, a, theta, s - ds)) / (2 * ds)
    return h


def check_support(phi: np.ndarray, grid: GridSpec, t: float, cutoff: CutoffSpec,
                  tol: float = 0.0) -> float:
    """Largest |phi| in q >= R + 1/2; raises if it exceeds ``tol``."""
    q = grid.r - t
    outside = q >= cutoff.R + 0.5
    worst = float(np.max(np.abs(phi[..., outside]), initial=0.0))
    if worst > tol:
        raise SupportViolation(f"scalar field reaches q >= R + 1/2 (|phi| = {worst:.3e})")
    return worst


def G_source(phi: np.ndarray, phi_t: np.ndarray, t: float, grid: GridSpec,
             h: Callable, cutoff: CutoffSpec, b: BProfile | None = None,
             band_term: str = "chi_prime", phi_tt: np.ndarray | None = None,
             support_tol: float | None = None) -> GaugeSource:
    """Constructed gauge source.

    G^L = Upsilon(r/t)/r * int_inf^r (2 (d_q phi)^2 r - h(theta, 2t) k(q)) dr,
    G^U = sigma0_UL chi'(q), with k = chi' by default.  When ``phi_tt`` is
    given the exact time derivative of G is returned as well.
    """
    if support_tol is not None:
        check_support(phi, grid, t, cutoff, support_tol)
    r, th = grid.r, grid.theta
    q = r - t
    phi_r = fr.d_r(phi, grid)
    phi_q = 0.5 * (phi_r - phi_t)
    hv = h(grid.theta1d[:, None], 2.0 * t)
    k0 = _band_profile(cutoff, q, band_term)
    integrand = 2.0 * phi_q ** 2 * r - hv * k0
    I = _inward_integral(integrand, grid.dr)
    ups = cutoff.upsilon_rt(r, t)
    GL = ups * I / r

    has_b = b is not None and not b.is_zero
    if has_b:
        s = t + r
        sig = s * (1.0 + b.b(th, s)) * b.f(th, s, 0, 1)
        GU = sig * cutoff.chi(q, 1)
    else:
        GU = np.zeros_like(GL)
    G = _assemble(GL, GU, grid)

    G_t = None
    if phi_tt is not None:
        phi_qt = 0.5 * (fr.d_r(phi_t, grid) - phi_tt)
        hs = h(grid.theta1d[:, None], 2.0 * t, 1)
        k1 = _band_profile(cutoff, q, band_term, 1)
        dint = 4.0 * phi_q * phi_qt * r - 2.0 * hs * k0 + hv * k1
        I_t = _inward_integral(dint, grid.dr)
        GL_t = (cutoff.upsilon_rt(r, t, 1) * I + ups * I_t) / r
        if has_b:
            B = 1.0 + b.b(th, s)
            fs = b.f(th, s, 0, 1)
            dsig = B * fs + s * b.b(th, s, 0, 1) * fs + s * B * b.f(th, s, 0, 2)
            GU_t = dsig * cutoff.chi(q, 1) - sig * cutoff.chi(q, 2)
        else:
            GU_t = np.zeros_like(GL)
        G_t = _assemble(GL_t, GU_t, grid)
    return GaugeSource(G, GL, GU, G_t)


def source_gradient(src: GaugeSource, grid: GridSpec) -> np.ndarray:
    """d_c G^a indexed [c, a]; requires the time derivative."""
    if src.G_t is None:
        raise ValueError("time derivative of G not available")
    gx, gy = fr.gradient(src.G, grid)
    return np.stack([src.G_t, gx, gy])


# --------------------------------------------------------------------------
# modulation G~

# Derivative pattern (l, k) = (s-order, theta-order) of each jet entering the
# pullback.  f counts as k = -1 since d_theta f = 1/(1+b) - 1.
JET_PATTERNS = {"b": (0, 0), "bt": (0, 1), "btt": (0, 2), "bs": (1, 0),
                "bts": (1, 1), "f": (0, -1), "fs": (1, -1)}


def is_high(l: int, k: int) -> bool:
    return l + k - 2 >= 1 or l >= 2


# Frozen inventory: (jet, direction) pairs whose differentiated pattern is high.
# Produced by filtering JET_PATTERNS with is_high; a test re-derives it.
TERM_INVENTORY = (("btt", "s"), ("btt", "theta"), ("bs", "s"),
                  ("bts", "s"), ("bts", "theta"), ("fs", "s"))

# (ntheta, ns) of b (or f) giving d_direction of each inventory jet
_DERIV_OF = {("btt", "s"): ("b", 2, 1), ("btt", "theta"): ("b", 3, 0),
             ("bs", "s"): ("b", 0, 2), ("bts", "s"): ("b", 1, 2),
             ("bts", "theta"): ("b", 2, 1), ("fs", "s"): ("f", 0, 2)}


def _ga_sqt_from_jets(s, q, th, jets: dict, a: ACoeffs) -> np.ndarray:
    r = 0.5 * (s + q)
    B = 1.0 + jets["b"]
    sp = B * s - jets["bt"] ** 2 / B * q
    qp = q / B
    thp = th - (q / r) * jets["bt"] / B ** 2 + jets["f"]
    G = metric_ga(sp, qp, thp, a)
    Jm = _jacobian(s, q, jets)
    return np.einsum("ia...,ij...,jb...->ab...", Jm, G, Jm)


def jet_sensitivity(s, q, th, jets: dict, a: ACoeffs, name: str, h: float = 1e-30):
    """d g_a(s,q,theta components) / d jet[name] by complex step."""
    pert = dict(jets)
    pert[name] = jets[name] + 1j * h
    return np.imag(_ga_sqt_from_jets(s, q, th, pert, a)) / h


def high_derivative_part(t: float, grid: GridSpec, a: ACoeffs, b: BProfile,
                         cutoff: CutoffSpec | None, terms=TERM_INVENTORY) -> np.ndarray:
    """X[c, m, n]: the part of d_c (g_b)_mn carried by high b-derivatives."""
    n_th, n_r = grid.shape
    X = np.zeros((3, 3, 3, n_th, n_r))
    if b is None or b.is_zero:
        return X
    r = grid.r
    q = r - t
    chi = np.ones_like(r) if cutoff is None else cutoff.chi(q)
    mask = chi > 0
    if not np.any(mask):
        return X
    th = grid.theta[mask]
    s = t + r[mask]
    qm = q[mask]
    jets = b.jets(th, s)
    c, sn, rm = grid.cos[mask], grid.sin[mask], r[mask]
    ds = np.stack([np.ones_like(c), c, sn])
    dth = np.stack([np.zeros_like(c), -sn / rm, c / rm])
    out = np.zeros((3, 3, 3) + th.shape)
    for name, direction in terms:
        src, nt, ns = _DERIV_OF[(name, direction)]
        val = (b.b if src == "b" else b.f)(th, s, nt, ns)
        sens = jet_sensitivity(s, qm, th, jets, a, name)
        dcoord = ds if direction == "s" else dth
        out += np.einsum("c...,mn...->cmn...", dcoord, sens * val)
    cart = np.stack([null_polar_to_cartesian(out[cc], t, grid.x[mask], grid.y[mask])
                     for cc in range(3)])
    X[:, :, :, mask] = cart * chi[mask]
    return X


def G_tilde(g_tilde: np.ndarray, g_b: np.ndarray, X: np.ndarray) -> np.ndarray:
    """K(g_b + g~)[X] - K(g_b)[X]: crossed terms with high b-derivatives."""
    if not np.any(X):
        return np.zeros((3,) + g_b.shape[2:])
    g = g_b + g_tilde
    return H_linear_operator(inverse3(g), X) - H_linear_operator(inverse3(g_b), X)


def G_tilde_t(g_tilde: np.ndarray, g_tilde_t: np.ndarray, g_b: np.ndarray, g_b_t: np.ndarray,
              X: np.ndarray, X_t: np.ndarray) -> np.ndarray:
    """Time derivative of G_tilde."""
    if not (np.any(X) or np.any(X_t)):
        return np.zeros((3,) + g_b.shape[2:])
    g = g_b + g_tilde
    gi, bi = inverse3(g), inverse3(g_b)
    out = H_linear_operator(gi, X_t) - H_linear_operator(bi, X_t)
    for ginv, gt in ((gi, g_b_t + g_tilde_t), (bi, g_b_t)):
        dinv = d_inverse(ginv, gt[None])[0]
        sign = 1.0 if ginv is gi else -1.0
        term = (np.einsum("lb...,as...,lsb...->a...", dinv, ginv, X, optimize=True)
                - 0.5 * np.einsum("lb...,as...,slb...->a...", dinv, ginv, X, optimize=True)
                + np.einsum("lb...,as...,lsb...->a...", ginv, dinv, X, optimize=True)
                - 0.5 * np.einsum("lb...,as...,slb...->a...", ginv, dinv, X, optimize=True))
        out = out + sign * term
    return out


def high_derivative_part_t(t: float, grid: GridSpec, a: ACoeffs, b: BProfile,
                           cutoff: CutoffSpec | None, ht: float | None = None):
    """X and its time derivative (4th-order differences in t)."""
    ht = grid.dr if ht is None else ht
    X, X_t, _ = time_fd(lambda tt: high_derivative_part(tt, grid, a, b, cutoff), t, ht)
    return X, X_t


# --------------------------------------------------------------------------
# residual


@dataclass
class GaugeResidual:
    field: np.ndarray
    sup: float
    l2: float


def gauge_residual(jet: MetricJet, F_b: np.ndarray, G: np.ndarray, Gt: np.ndarray,
                   grid: GridSpec, weight: np.ndarray | None = None,
                   mask: np.ndarray | None = None) -> GaugeResidual:
    """H(g) - (F_b + G + G~) with sup and (weighted) L2 norms."""
    res = christoffel_H(jet) - (F_b + G + Gt)
    mag2 = np.sum(res ** 2, axis=0)
    if mask is not None:
        mag2 = np.where(mask, mag2, 0.0)
    w = 1.0 if weight is None else weight
    return GaugeResidual(res, float(np.sqrt(mag2.max())),
                         float(np.sqrt(fr.integrate(w * mag2, grid))))
