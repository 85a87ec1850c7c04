"""Exterior metric g_a, profile-deformed background g_b, the angular profile h,
and a grid Ricci evaluator.

Coordinates: null polar (s, q, theta) with s = t + r, q = r - t.  In those
coordinates the Minkowski metric is ds dq + r^2 dtheta^2, so as a tensor
m(d_s, d_q) = 1/2.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from . import frame as fr
from .frame import GridSpec
from .tensor import MetricJet, minkowski, ricci as ricci_jet


# --------------------------------------------------------------------------
# cutoffs


def smoothstep(x: np.ndarray, n: int = 0) -> np.ndarray:
    """Quintic smoothstep 6x^5 - 15x^4 + 10x^3 on [0, 1] and its derivatives."""
    x = np.asarray(x, dtype=float)
    inside = (x > 0) & (x < 1)
    xc = np.clip(x, 0.0, 1.0)
    if n == 0:
        return xc ** 3 * (10.0 - 15.0 * xc + 6.0 * xc ** 2)
    polys = {1: 30.0 * xc ** 2 * (1 - xc) ** 2,
             2: 60.0 * xc * (1 - xc) * (1 - 2 * xc),
             3: 60.0 * (1 - 6 * xc + 6 * xc ** 2)}
    return np.where(inside, polys[n], 0.0)


@dataclass(frozen=True)
class CutoffSpec:
    """chi(q): 0 below R + 1/2, 1 above R + 1.  Upsilon(rho): bump on [1/2, 2]."""

    R: float

    def chi(self, q, n: int = 0):
        x = (np.asarray(q, dtype=float) - (self.R + 0.5)) / 0.5
        return smoothstep(x, n) * 2.0 ** n

    def d2q_qchi(self, q):
        """d_q^2 (q chi(q))."""
        return 2.0 * self.chi(q, 1) + q * self.chi(q, 2)

    def dq_qchi(self, q):
        return self.chi(q) + q * self.chi(q, 1)

    @staticmethod
    def upsilon(rho, n: int = 0):
        rho = np.asarray(rho, dtype=float)
        up = smoothstep((rho - 0.5) / 0.25, n) * 4.0 ** n
        down = smoothstep((2.0 - rho) / 0.5, n) * (-2.0) ** n
        if n == 0:
            return up * down
        # the two ramps never overlap, so the product rule reduces to a sum
        return np.where(rho < 1.0, up, down)

    @staticmethod
    def upsilon_rt(r, t, n: int = 0):
        """Upsilon(r / t) with Upsilon = 0 for t <= 0; n = 1 gives d_t."""
        r = np.asarray(r, dtype=float)
        if t <= 0:
            return np.zeros_like(r)
        if n == 0:
            return CutoffSpec.upsilon(r / t)
        return CutoffSpec.upsilon(r / t, 1) * (-r / t ** 2)


# --------------------------------------------------------------------------
# a coefficients


@dataclass(frozen=True)
class ACoeffs:
    a0: float = 0.0
    a1: float = 0.0
    a2: float = 0.0
    J_modes: tuple = ()  # (k, cos coefficient, sin coefficient)

    def a(self, theta, n: int = 0):
        theta = np.asarray(theta) * 1.0
        c, s = np.cos(theta), np.sin(theta)
        if n == 0:
            return self.a0 + self.a1 * c + self.a2 * s
        if n == 1:
            return -self.a1 * s + self.a2 * c
        raise ValueError("only first derivative supported")

    def J(self, theta, n: int = 0):
        theta = np.asarray(theta) * 1.0
        out = np.zeros_like(theta)
        for k, ck, sk in self.J_modes:
            if n == 0:
                out = out + ck * np.cos(k * theta) + sk * np.sin(k * theta)
            else:
                out = out + k * (-ck * np.sin(k * theta) + sk * np.cos(k * theta))
        return out

    def to_dict(self) -> dict:
        return {"a0": self.a0, "a1": self.a1, "a2": self.a2,
                "J_modes": [list(m) for m in self.J_modes]}

    @classmethod
    def from_dict(cls, d: dict) -> "ACoeffs":
        return cls(float(d.get("a0", 0.0)), float(d.get("a1", 0.0)), float(d.get("a2", 0.0)),
                   tuple(tuple(m) for m in d.get("J_modes", ())))


def a_from_phi(phi0: np.ndarray, phi1: np.ndarray, grid: GridSpec) -> ACoeffs:
    """Leading-order deficit-angle coefficients from the scalar data."""
    px, py = fr.gradient(phi0, grid)
    a0 = fr.integrate(phi1 ** 2 + px ** 2 + py ** 2, grid) / (4.0 * np.pi)
    a1 = fr.integrate(phi1 * px, grid) / np.pi
    a2 = fr.integrate(phi1 * py, grid) / np.pi
    return ACoeffs(float(a0), float(a1), float(a2))


# --------------------------------------------------------------------------
# b profile


class ProfileError(ValueError):
    pass


def _synth(cos_c: np.ndarray, sin_c: np.ndarray, theta, n: int = 0):
    """Evaluate sum_k cos_c[..., k] cos(k th) + sin_c[..., k] sin(k th) (d/dtheta)^n."""
    theta = np.asarray(theta, dtype=float)
    K = cos_c.shape[-1]
    out = 0.0
    for k in range(K):
        ck = cos_c[..., k]
        sk = sin_c[..., k]
        ph = k * theta
        fac = float(k) ** n
        m = n % 4
        if m == 0:
            term = ck * np.cos(ph) + sk * np.sin(ph)
        elif m == 1:
            term = -ck * np.sin(ph) + sk * np.cos(ph)
        elif m == 2:
            term = -(ck * np.cos(ph) + sk * np.sin(ph))
        else:
            term = ck * np.sin(ph) - sk * np.cos(ph)
        out = out + fac * term
    return out * np.ones_like(theta)


def _analyse(values: np.ndarray, K: int):
    """Real Fourier coefficients (cos, sin) up to mode K of uniform samples."""
    n = values.shape[-1]
    c = np.fft.rfft(values, axis=-1) / n
    cos_c = 2.0 * c.real[..., :K + 1]
    sin_c = -2.0 * c.imag[..., :K + 1]
    cos_c[..., 0] /= 2.0
    sin_c[..., 0] = 0.0
    if n % 2 == 0 and K >= n // 2:
        cos_c[..., n // 2] /= 2.0
    return cos_c, sin_c


def antiderivative_zero_mean(values: np.ndarray) -> np.ndarray:
    """Spectral antiderivative in theta of zero-mean uniform samples."""
    n = values.shape[-1]
    vh = np.fft.rfft(values, axis=-1)
    k = np.fft.rfftfreq(n, 1.0 / n)
    out = np.zeros_like(vh)
    out[..., 1:] = vh[..., 1:] / (1j * k[1:])
    if n % 2 == 0:
        out[..., -1] = 0.0
    return np.fft.irfft(out, n=n, axis=-1)


@dataclass(frozen=True)
class BProfile:
    """b(theta, s) as real Fourier tables on an s grid, cubic in s.

    ``b_cos[i, k]``, ``b_sin[i, k]`` are the mode-k coefficients at s_grid[i].
    Outside the tabulated range b is held at the end values.
    """

    s_grid: np.ndarray
    b_cos: np.ndarray
    b_sin: np.ndarray
    n_dense: int = 128
    tol: float = 1e-10
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        s = np.atleast_1d(np.asarray(self.s_grid, dtype=float))
        bc = np.atleast_2d(np.asarray(self.b_cos, dtype=float))
        bs = np.atleast_2d(np.asarray(self.b_sin, dtype=float))
        if bc.shape != bs.shape or bc.shape[0] != s.size:
            raise ProfileError("coefficient table does not match s grid")
        if s.size > 1 and np.any(np.diff(s) <= 0):
            raise ProfileError("s grid must be increasing")
        object.__setattr__(self, "s_grid", s)
        object.__setattr__(self, "b_cos", bc)
        object.__setattr__(self, "b_sin", bs)
        K = bc.shape[1] - 1
        nd = max(self.n_dense, 8 * (K + 1))
        th = 2 * np.pi * np.arange(nd) / nd
        vals = _synth(bc[:, None, :], bs[:, None, :], th[None, :])
        if np.any(1.0 + vals <= 0.5):
            raise ProfileError("1 + b must exceed 1/2")
        integrand = 1.0 / (1.0 + vals) - 1.0
        intb = np.abs(np.mean(vals / (1.0 + vals), axis=-1)) * 2 * np.pi
        if np.any(intb > self.tol):
            raise ProfileError(f"integral of b/(1+b) is {intb.max():.3e}, must vanish")
        f_vals = antiderivative_zero_mean(integrand - integrand.mean(axis=-1, keepdims=True))
        fc, fs = _analyse(f_vals, nd // 2 - 1)
        object.__setattr__(self, "f_cos", fc)
        object.__setattr__(self, "f_sin", fs)
        object.__setattr__(self, "intb", intb)

    # construction helpers -------------------------------------------------
    @classmethod
    def zero(cls, n_modes: int = 4) -> "BProfile":
        z = np.zeros((1, n_modes + 1))
        return cls(np.array([0.0]), z, z.copy())

    @classmethod
    def from_values(cls, s_grid, values: np.ndarray, n_modes: int, **kw) -> "BProfile":
        """From samples b(theta_j, s_i) on a uniform theta grid (last axis)."""
        bc, bs = _analyse(np.atleast_2d(values), n_modes)
        return cls(np.atleast_1d(s_grid), bc, bs, **kw)

    @classmethod
    def from_shape(cls, s_grid, values: np.ndarray, n_modes: int, **kw) -> "BProfile":
        """Shift each s-row of ``values`` by a constant so that b/(1+b) has zero mean."""
        v = np.atleast_2d(np.asarray(values, dtype=float)).copy()
        for i in range(v.shape[0]):
            c = 0.0
            for _ in range(50):
                w = v[i] + c
                F = np.mean(w / (1.0 + w))
                dF = np.mean(1.0 / (1.0 + w) ** 2)
                step = F / dF
                c -= step
                if abs(step) < 1e-16:
                    break
            v[i] += c
        return cls.from_values(s_grid, v, n_modes, **kw)

    @property
    def n_modes(self) -> int:
        return self.b_cos.shape[1] - 1

    @property
    def is_zero(self) -> bool:
        if "zero" not in self._cache:
            self._cache["zero"] = not (np.any(self.b_cos) or np.any(self.b_sin))
        return self._cache["zero"]

    # evaluation -----------------------------------------------------------
    def _coeffs(self, which: str, s, ns: int):
        tab_c, tab_s = (self.b_cos, self.b_sin) if which == "b" else (self.f_cos, self.f_sin)
        s = np.asarray(s, dtype=float)
        if self.s_grid.size == 1:
            if ns:
                z = np.zeros(s.shape + tab_c.shape[1:])
                return z, z
            return (np.broadcast_to(tab_c[0], s.shape + tab_c.shape[1:]),
                    np.broadcast_to(tab_s[0], s.shape + tab_c.shape[1:]))
        key = which
        if key not in self._cache:
            self._cache[key] = (CubicSpline(self.s_grid, tab_c, axis=0, bc_type="natural"),
                                CubicSpline(self.s_grid, tab_s, axis=0, bc_type="natural"))
        spc, sps = self._cache[key]
        lo, hi = self.s_grid[0], self.s_grid[-1]
        sc = np.clip(s, lo, hi)
        cc, ss = spc(sc, ns), sps(sc, ns)
        if ns:
            outside = ((s < lo) | (s > hi))[..., None]
            cc = np.where(outside, 0.0, cc)
            ss = np.where(outside, 0.0, ss)
        return cc, ss

    def b(self, theta, s, ntheta: int = 0, ns: int = 0):
        if self.is_zero:
            return np.zeros(np.broadcast(np.asarray(theta), np.asarray(s)).shape)
        cc, ss = self._coeffs("b", s, ns)
        return _synth(cc, ss, theta, ntheta)

    def f(self, theta, s, ntheta: int = 0, ns: int = 0):
        if self.is_zero:
            return np.zeros(np.broadcast(np.asarray(theta), np.asarray(s)).shape)
        if ntheta >= 1:
            # d_theta f = 1/(1+b) - 1, exact
            if ntheta == 1 and ns == 0:
                return 1.0 / (1.0 + self.b(theta, s)) - 1.0
        cc, ss = self._coeffs("f", s, ns)
        return _synth(cc, ss, theta, ntheta)

    def jets(self, theta, s) -> dict:
        """b, its theta/s derivatives, and f, f_s at (theta, s)."""
        return {
            "b": self.b(theta, s), "bt": self.b(theta, s, 1), "btt": self.b(theta, s, 2),
            "bs": self.b(theta, s, 0, 1), "bts": self.b(theta, s, 1, 1),
            "f": self.f(theta, s), "fs": self.f(theta, s, 0, 1),
        }

    # serialization ----------------------------------------------------------
    def to_text(self) -> str:
        K = self.n_modes
        head = ["# BProfile fourier table", f"modes {K}", f"rows {self.s_grid.size}",
                "# s " + " ".join(f"c{k}" for k in range(K + 1)) + " "
                + " ".join(f"s{k}" for k in range(1, K + 1))]
        rows = []
        for i, s in enumerate(self.s_grid):
            vals = [s] + list(self.b_cos[i]) + list(self.b_sin[i, 1:])
            rows.append(" ".join(repr(float(v)) for v in vals))
        return "\n".join(head + rows) + "\n"

    @classmethod
    def from_text(cls, text: str, **kw) -> "BProfile":
        K = None
        rows = []
        for ln, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("modes"):
                K = int(line.split()[1])
                continue
            if line.startswith("rows"):
                continue
            vals = [float(v) for v in line.split()]
            if K is None or len(vals) != 2 * K + 2:
                raise ProfileError(f"line {ln}: expected {None if K is None else 2 * K + 2} numbers")
            rows.append(vals)
        if not rows:
            raise ProfileError("empty profile table")
        a = np.array(rows)
        bs = np.concatenate([np.zeros((a.shape[0], 1)), a[:, K + 2:]], axis=1)
        return cls(a[:, 0], a[:, 1:K + 2], bs, **kw)


# --------------------------------------------------------------------------
# change of variables and metrics


class InvertibilityError(ValueError):
    pass


def change_of_variables(s, q, theta, b: BProfile, jets: dict | None = None):
    """(s', q', theta') of the profile-deformed coordinates."""
    j = jets if jets is not None else b.jets(theta, s)
    B = 1.0 + j["b"]
    if np.any(np.real(B) <= 0.5):
        raise InvertibilityError("1 + b must exceed 1/2")
    r = 0.5 * (np.asarray(s) + np.asarray(q))
    sp = B * s - j["bt"] ** 2 / B * q
    qp = q / B
    thp = theta - (q / r) * j["bt"] / B ** 2 + j["f"]
    return sp, qp, thp


def _jacobian(s, q, j: dict):
    """d(s', q', theta')/d(s, q, theta) as a (3, 3, ...) array [primed, unprimed]."""
    b, bt, btt, bs, bts, fs = j["b"], j["bt"], j["btt"], j["bs"], j["bts"], j["fs"]
    B = 1.0 + b
    r = 0.5 * (s + q)
    E = bt / B ** 2
    E_t = btt / B ** 2 - 2.0 * bt ** 2 / B ** 3
    E_s = bts / B ** 2 - 2.0 * bt * bs / B ** 3
    Jm = np.empty((3, 3) + np.shape(B), dtype=np.result_type(*j.values(), float))
    Jm[0, 0] = B + bs * s - q * (2.0 * bt * bts / B - bt ** 2 * bs / B ** 2)
    Jm[0, 1] = -bt ** 2 / B
    Jm[0, 2] = bt * s - q * (2.0 * bt * btt / B - bt ** 3 / B ** 2)
    Jm[1, 0] = -q * bs / B ** 2
    Jm[1, 1] = 1.0 / B
    Jm[1, 2] = -q * bt / B ** 2
    Jm[2, 0] = q / (2 * r ** 2) * E - (q / r) * E_s + fs
    Jm[2, 1] = -s / (2 * r ** 2) * E
    Jm[2, 2] = 1.0 - (q / r) * E_t + (1.0 / B - 1.0)
    return Jm


def metric_ga(sp, qp, thp, a: ACoeffs) -> np.ndarray:
    """g_a in (s', q', theta') components."""
    rp = 0.5 * (np.asarray(sp) + np.asarray(qp))
    A = rp + a.a(thp) * qp
    if np.any(np.real(A) <= 0):
        raise InvertibilityError("degenerate exterior metric: r' + a q' <= 0")
    shape = np.shape(A)
    G = np.zeros((3, 3) + shape, dtype=np.result_type(A, float))
    G[0, 1] = G[1, 0] = 0.5
    G[2, 2] = A ** 2
    G[1, 2] = G[2, 1] = 0.5 * a.J(thp)
    return G


def null_polar_to_cartesian(g_sqt: np.ndarray, t, x, y) -> np.ndarray:
    """Convert (s, q, theta) components to (t, x, y) components."""
    r = np.hypot(x, y)
    c, sn = x / r, y / r
    one = np.ones_like(r)
    M = np.stack([np.stack([one, c, sn]),
                  np.stack([-one, c, sn]),
                  np.stack([0 * r, -sn / r, c / r])])
    return np.einsum("ia...,ij...,jb...->ab...", M, g_sqt, M)


def minkowski_sqt(s, q):
    r = 0.5 * (np.asarray(s) + np.asarray(q))
    m = np.zeros((3, 3) + np.shape(r))
    m[0, 1] = m[1, 0] = 0.5
    m[2, 2] = r ** 2
    return m


def metric_ga_sqt(s, q, theta, a: ACoeffs, b: BProfile) -> np.ndarray:
    """Pullback of g_a to (s, q, theta) through the profile change of variables."""
    j = b.jets(theta, s)
    sp, qp, thp = change_of_variables(s, q, theta, b, j)
    G = metric_ga(sp, qp, thp, a)
    Jm = _jacobian(s, q, j)
    return np.einsum("ia...,ij...,jb...->ab...", Jm, G, Jm)


def metric_gb(t, x, y, a: ACoeffs, b: BProfile, cutoff: CutoffSpec | None) -> np.ndarray:
    """g_b = chi(q) g_a + (1 - chi(q)) m in (t, x, y) components.

    With ``cutoff=None`` the exterior metric is used everywhere (chi = 1).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    shape = np.broadcast(x, y).shape
    x = np.broadcast_to(x, shape)
    y = np.broadcast_to(y, shape)
    out = minkowski(shape)
    r = np.hypot(x, y)
    s, q = t + r, r - t
    th = np.arctan2(y, x)
    chi = np.ones(shape) if cutoff is None else cutoff.chi(q)
    mask = chi > 0
    if not np.any(mask):
        return out
    sm, qm, tm = s[mask], q[mask], th[mask]
    ga = metric_ga_sqt(sm, qm, tm, a, b)
    blend = chi[mask] * ga + (1.0 - chi[mask]) * minkowski_sqt(sm, qm)
    out[:, :, mask] = null_polar_to_cartesian(blend, t, x[mask], y[mask])
    return out


def h_of(b: BProfile, a: ACoeffs, theta, s):
    """h(theta, s) with theta' = theta + f."""
    B = 1.0 + b.b(theta, s)
    bt = b.b(theta, s, 1)
    btt = b.b(theta, s, 2)
    thp = theta + b.f(theta, s)
    return (2.0 * a.a(thp) / B ** 2 + 1.0 / B ** 2 - 1.0
            - 2.0 * btt / B + bt ** 2 / B ** 2)


def sigma0_UL(b: BProfile, theta, s):
    """s (1 + b) d_s f."""
    return s * (1.0 + b.b(theta, s)) * b.f(theta, s, 0, 1)


# --------------------------------------------------------------------------
# jets on the grid and Ricci


def time_fd(fn: Callable[[float], np.ndarray], t: float, ht: float):
    """4th-order central first and second time derivatives of fn at t."""
    fm2, fm1, f0, fp1, fp2 = (fn(t + k * ht) for k in (-2, -1, 0, 1, 2))
    d1 = (fm2 - 8 * fm1 + 8 * fp1 - fp2) / (12 * ht)
    d2 = (-fm2 + 16 * fm1 - 30 * f0 + 16 * fp1 - fp2) / (12 * ht ** 2)
    return f0, d1, d2


def jet_from_samples(g: np.ndarray, g_t: np.ndarray, g_tt: np.ndarray, grid: GridSpec,
                     outer: str = "extrapolate") -> MetricJet:
    """Assemble a metric jet from g and its time derivatives on the grid."""
    (gx, gy), (gxx, gxy, gyy) = fr.hessian(g, grid, outer)
    gtx, gty = fr.gradient(g_t, grid, outer)
    dg = np.stack([g_t, gx, gy])
    ddg = np.stack([np.stack([g_tt, gtx, gty]),
                    np.stack([gtx, gxx, gxy]),
                    np.stack([gty, gxy, gyy])])
    return MetricJet(g, dg, ddg)


def metric_jet(metric_fn: Callable[[float], np.ndarray], t: float, grid: GridSpec,
               ht: float | None = None) -> MetricJet:
    """Jet of a time-dependent grid metric; time derivatives by finite differences."""
    ht = grid.dr if ht is None else ht
    g, g_t, g_tt = time_fd(metric_fn, t, ht)
    return jet_from_samples(g, g_t, g_tt, grid)


def background_metric_fn(grid: GridSpec, a: ACoeffs, b: BProfile,
                         cutoff: CutoffSpec | None) -> Callable[[float], np.ndarray]:
    return lambda t: metric_gb(t, grid.x, grid.y, a, b, cutoff)


def ricci(metric_fn: Callable[[float], np.ndarray], t: float, grid: GridSpec,
          ht: float | None = None) -> np.ndarray:
    """Ricci tensor (t, x, y components) of a grid metric via Christoffel symbols."""
    return ricci_jet(metric_jet(metric_fn, t, grid, ht))


def ricci_at(metric_fn, t: float, grid: GridSpec, point, ht: float | None = None) -> np.ndarray:
    """Ricci tensor at the grid node nearest ``point = (x, y)``."""
    R = ricci(metric_fn, t, grid, ht)
    x, y = point
    k = np.argmin((grid.x - x) ** 2 + (grid.y - y) ** 2)
    i, jj = np.unravel_index(k, grid.shape)
    return R[:, :, i, jj]


def frame_components(T: np.ndarray, grid: GridSpec) -> fr.NullFrameComponents:
    """Null-frame components of a grid tensor field."""
    f = fr.frame_vectors(grid.theta)
    L, Lb, U = f["L"], f["Lbar"], f["U"]
    c = fr.contract
    return fr.NullFrameComponents(c(T, L, L), c(T, L, Lb), c(T, L, U),
                                  c(T, Lb, Lb), c(T, Lb, U), c(T, U, U))
