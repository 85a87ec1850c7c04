"""Run diagnostics: weighted energies, wave-condition residuals, the Delta_h
identity, h extraction with backward beta transport, eikonal cone levels and
decay-exponent fits.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from . import frame as fr
from . import gauge as gg
from .background import CutoffSpec, _analyse, smoothstep
from .evolve import GT, GTT, K, KT, PHI, PI, Evolution, FieldState, constraint_residuals, dq_squared
from .flatwave import z_apply_sequence
from .frame import GridSpec, VectorFieldId
from .stepping import rk4
from .tensor import MetricJet, det3, inverse3, sym_from_components

WEIGHT_FAMILIES = ("w", "w1", "w2")


class HistoryError(ValueError):
    pass


class CharacteristicCrossing(UserWarning):
    pass


# --------------------------------------------------------------------------
# weights


@dataclass(frozen=True)
class WeightSpec:
    delta: float = 0.9
    sigma: float = 0.1
    mu: float = 0.25
    family: str = "w"

    def __post_init__(self):
        if not 0.5 < self.delta < 1:
            raise ValueError("delta must lie in (1/2, 1)")
        if not 0 < self.mu <= 0.25:
            raise ValueError("mu must lie in (0, 1/4]")
        if self.family not in WEIGHT_FAMILIES:
            raise ValueError(f"family must be one of {WEIGHT_FAMILIES}")

    def _exponents(self):
        d, s = self.delta, self.sigma
        return {"w1": (2 + 2 * d - 2 * s, -2 * s), "w2": (2 + 2 * d - 4 * s, -1 - 2 * s)}[self.family]

    def __call__(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        A = 1.0 + np.abs(q)
        if self.family == "w":
            return np.where(q > 0, A ** (2 + 2 * self.delta), 1.0 + A ** (-2 * self.mu))
        pe, ne = self._exponents()
        return np.where(q > 0, A ** pe, A ** ne)

    def derivative(self, q) -> np.ndarray:
        """Pointwise derivative away from q = 0."""
        q = np.asarray(q, dtype=float)
        A = 1.0 + np.abs(q)
        sgn = np.sign(q)
        if self.family == "w":
            pe, ne = 2 + 2 * self.delta, -2 * self.mu
        else:
            pe, ne = self._exponents()
        return np.where(q > 0, pe * A ** (pe - 1), ne * A ** (ne - 1) * sgn)


def weighted_energy(D: Sequence[np.ndarray], t: float, grid: GridSpec,
                    weight: WeightSpec | Callable, I: Sequence[VectorFieldId] = ()) -> float:
    """||weight^{1/2}(q) d Z^I u||_{L2} from D = [u, d_t u, d_t^2 u, ...].

    D needs |I| + 2 entries (the time derivatives consumed by the Z's).
    """
    if len(D) < len(I) + 2:
        raise ValueError("not enough time derivatives for the requested Z^I")
    seq = list(D)
    for Z in I:
        seq = z_apply_sequence(seq, VectorFieldId(Z), t, grid)
    u, u_t = seq[0], seq[1]
    ux, uy = fr.gradient(u, grid)
    w = weight(grid.r - t)
    return float(np.sqrt(max(fr.integrate(w * (u_t ** 2 + ux ** 2 + uy ** 2), grid), 0.0)))


def energy_inequality_margin(frames: Sequence[tuple], grid: GridSpec, weight: WeightSpec,
                             eps: float, C: float = 0.5) -> dict:
    """Per-sample ratio of the weighted energy identity's left side to its bound.

    ``frames`` holds (t, u, u_t, f) with f = box u.  Left side:
    d/dt int Q_TT w + C int w' ((L u)^2 + (d_theta u / r)^2); right side:
    eps/(1+t) int w |du|^2 + int w |f d_t u|.  Time derivatives are centred
    differences over the samples.
    """
    ts = np.array([fr_[0] for fr_ in frames], dtype=float)
    E, flux, rhs = [], [], []
    for t, u, u_t, f in frames:
        q = grid.r - t
        w, wp = weight(q), weight.derivative(q)
        ux, uy = fr.gradient(u, grid)
        ur = fr.d_r(u, grid)
        uth = fr.d_th(u, grid) / grid.r
        grad2 = u_t ** 2 + ux ** 2 + uy ** 2
        E.append(float(fr.integrate(0.5 * grad2 * w, grid)))
        flux.append(float(fr.integrate(wp * ((u_t + ur) ** 2 + uth ** 2), grid)))
        rhs.append(eps / (1 + t) * float(fr.integrate(w * grad2, grid))
                   + float(fr.integrate(w * np.abs(f * u_t), grid)))
    E, flux, rhs = map(np.asarray, (E, flux, rhs))
    dE = np.gradient(E, ts) if len(ts) > 2 else np.zeros_like(E)
    lhs = dE + C * flux
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(rhs > 0, lhs / rhs, np.where(np.abs(lhs) > 0, np.inf, 0.0))
    interior = ratio[1:-1] if len(ratio) > 2 else ratio
    return {"t": ts, "energy": E, "lhs": lhs, "rhs": rhs, "ratio": ratio,
            "max_ratio": float(np.max(interior)) if interior.size else 0.0}


# --------------------------------------------------------------------------
# frame helpers


def _frame(grid: GridSpec):
    c, s = grid.cos, grid.sin
    one = np.ones_like(c)
    return {"L": np.stack([one, c, s]), "Lbar": np.stack([one, -c, -s]),
            "U": np.stack([0 * c, -s, c])}


def _fc(T: np.ndarray, v: np.ndarray, w: np.ndarray) -> np.ndarray:
    return np.einsum("m...,n...,mn...->...", v, w, T)


def _dq(u: np.ndarray, u_t: np.ndarray, grid: GridSpec) -> np.ndarray:
    return 0.5 * (fr.d_r(u, grid) - u_t)


def _ds(u: np.ndarray, u_t: np.ndarray, grid: GridSpec) -> np.ndarray:
    return 0.5 * (fr.d_r(u, grid) + u_t)


# --------------------------------------------------------------------------
# wave-condition goodness


def wave_condition_goodness(state: FieldState, evo: Evolution, region: str = "annulus") -> dict:
    """Bad-derivative combinations of g~ against tangential norms.

    LL: d_q g~_LL - g~_LLbar / (2r); LU: d_q g~_UL + G^U; UU: d_q g~_UU + 2 G^L.
    Measured over q <= R + 1 intersected with t/2 <= r <= 2t (``region="annulus"``)
    or over q <= R + 1 only.
    """
    grid, t = evo.grid, state.t
    fv = _frame(grid)
    L, U = fv["L"], fv["U"]
    gt, gtt = state.g_tilde, state.g_tilde_t
    comp = {k: (_fc(gt, *v), _fc(gtt, *v)) for k, v in
            {"LL": (L, L), "LLb": (L, fv["Lbar"]), "UL": (U, L), "UU": (U, U)}.items()}
    if evo.constructed:
        src = gg.G_source(state.phi, state.phi_t, t, grid, evo.h, evo.cutoff, evo.b,
                          evo.config.band_term)
        GL, GU = src.GL, src.GU
    else:
        GL = GU = np.zeros(grid.shape)
    res = {
        "LL": _dq(*comp["LL"], grid) - comp["LLb"][0] / (2.0 * grid.r),
        "LU": _dq(*comp["UL"], grid) + GU,
        "UU": _dq(*comp["UU"], grid) + 2.0 * GL,
    }
    mask = grid.r - t <= evo.config.R + 1.0
    if region == "annulus":
        mask &= (grid.r >= t / 2) & (grid.r <= 2 * t)
    mask &= ~evo.sponge
    # tangential size: |L g~| + |U g~| + |g~| / r over all components
    Lg = 2.0 * _ds(state.Y[GT], state.Y[GTT], grid)
    Ug = fr.d_th(state.Y[GT], grid) / grid.r
    tang = np.sqrt(np.sum(Lg ** 2 + Ug ** 2 + (state.Y[GT] / grid.r) ** 2, axis=0))
    out = {"t": t}
    tn = float(np.sqrt(fr.integrate(np.where(mask, tang ** 2, 0.0), grid)))
    out["tangential_l2"] = tn
    for k, v in res.items():
        v = np.where(mask, v, 0.0)
        out[f"{k}_sup"] = float(np.abs(v).max()) if mask.any() else 0.0
        out[f"{k}_l2"] = float(np.sqrt(fr.integrate(v ** 2, grid)))
        out[f"{k}_ratio"] = out[f"{k}_l2"] / tn if tn > 0 else (0.0 if out[f"{k}_l2"] == 0 else np.inf)
    return out


# --------------------------------------------------------------------------
# Delta_h


def delta_h(phi: np.ndarray, phi_t: np.ndarray, t: float, grid: GridSpec,
            h: Callable) -> float:
    """Mismatch of the angular moments of h(., 2t) with the field's energy and momentum."""
    th = grid.theta1d
    hv = np.asarray(h(th, 2.0 * t), dtype=float) * np.ones_like(th)
    dth = grid.dtheta
    px, py = fr.gradient(phi, grid)
    e = float(fr.integrate(phi_t ** 2 + px ** 2 + py ** 2, grid))
    m1 = float(fr.integrate(phi_t * px, grid))
    m2 = float(fr.integrate(phi_t * py, grid))
    return (abs(np.sum(hv) * dth - e) + abs(np.sum(hv * np.cos(th)) * dth + 2 * m1)
            + abs(np.sum(hv * np.sin(th)) * dth + 2 * m2))


# --------------------------------------------------------------------------
# h extraction


@dataclass
class HExtract:
    s: np.ndarray              # s = 2t of the stored slices
    theta: np.ndarray
    h_check: np.ndarray        # (n_s, n_theta)
    beta: np.ndarray           # (n_s, n_theta, n_r), beta[-1] = 0
    F1: np.ndarray
    F2: np.ndarray
    T: float

    def h_prime(self, theta_index: slice | None = None, s=None) -> np.ndarray:
        """psi(s) h_check(s) + (1 - psi(s)) h_check(2T), psi = 1 for s <= 2T - 1."""
        s = self.s if s is None else np.atleast_1d(np.asarray(s, dtype=float))
        sc = np.clip(s, self.s[0], self.s[-1])
        hc = np.stack([np.interp(sc, self.s, self.h_check[:, j])
                       for j in range(self.theta.size)], axis=-1)
        psi = 1.0 - smoothstep(s - (2 * self.T - 1.0))
        return psi[:, None] * hc + (1 - psi[:, None]) * self.h_check[-1][None, :]

    def to_text(self, n_modes: int = 4) -> str:
        """Per-s real Fourier table in the BProfile text layout."""
        bc, bs = _analyse(self.h_prime(), n_modes)
        head = ["# h fourier table", f"modes {n_modes}", f"rows {self.s.size}",
                "# s " + " ".join(f"c{k}" for k in range(n_modes + 1)) + " "
                + " ".join(f"s{k}" for k in range(1, n_modes + 1))]
        rows = [" ".join(repr(float(v)) for v in [s] + list(bc[i]) + list(bs[i, 1:]))
                for i, s in enumerate(self.s)]
        return "\n".join(head + rows) + "\n"


def _slice_fields(evo: Evolution, t: float, Y: np.ndarray):
    """Metric and transport coefficients of one stored slice."""
    grid = evo.grid
    fv = _frame(grid)
    L, Lb = fv["L"], fv["Lbar"]
    bg = evo.background.at(t)
    gt = sym_from_components(Y[GT])
    gtt = sym_from_components(Y[GTT])
    g = bg.g + gt
    gLL = _fc(g, L, L)
    ups = CutoffSpec.upsilon_rt(grid.r, t)
    ups_t = CutoffSpec.upsilon_rt(grid.r, t, 1)
    dq2 = dq_squared(grid)
    g1 = gt - 4.0 * ups * Y[K] * dq2
    g1_t = gtt - 4.0 * (ups * Y[KT] + ups_t * Y[K]) * dq2

    def transport(u, u_t):
        return _ds(u, u_t, grid) + 0.25 * gLL * fr.d_r(u, grid)

    gtLL, gtLL_t = _fc(gt, L, L), _fc(gtt, L, L)
    F2 = transport(gtLL, gtLL_t)
    for v in fv.values():
        for w in fv.values():
            c, c_t = _fc(g1, v, w), _fc(g1_t, v, w)
            F2 = F2 + c * transport(c, c_t)
    gLLb = _fc(gt, L, Lb)
    F1 = _dq(gtLL, gtLL_t, grid) - gLLb / grid.r - F2
    return g, gLL, gLLb, F1, F2


def extract_h(history: Sequence[tuple], evo: Evolution, T: float | None = None,
              substeps: int | None = None, dissipation: float = 0.02) -> HExtract:
    """Backward beta transport from beta(T) = 0 and the h_check functional per slice.

    d_s beta + g_LL d_r beta / 4 = -g~_LLbar / (2r) - F2 / 2 with d_s = (d_t + d_r)/2,
    i.e. d_t beta = -(1 + g_LL / 2) d_r beta - g~_LLbar / r - F2, integrated with RK4 on
    linear-in-time interpolants of the stored coefficients.
    """
    if not history:
        raise HistoryError("no stored history")
    ts = np.array([h[0] for h in history], dtype=float)
    T = ts[-1] if T is None else T
    if ts[-1] < T - 1e-9 or np.any(np.diff(ts) <= 0):
        raise HistoryError("history does not reach T with increasing times")
    keep = ts <= T + 1e-9
    ts = ts[keep]
    Ys = [h[1] for h, k in zip(history, keep) if k]
    grid = evo.grid
    fields = [_slice_fields(evo, t, Y) for t, Y in zip(ts, Ys)]
    speed = [1.0 + 0.5 * f[1] for f in fields]
    source = [-f[2] / grid.r - f[4] for f in fields]

    beta = np.zeros((len(ts),) + grid.shape)
    b = np.zeros(grid.shape)
    for i in range(len(ts) - 1, 0, -1):
        t1, t0 = ts[i], ts[i - 1]
        dt = t1 - t0
        n = substeps or max(1, int(np.ceil(dt / (0.25 * grid.dr))))
        h = -dt / n

        def rhs(bb, t):
            lam = (t - t0) / dt
            c = (1 - lam) * speed[i - 1] + lam * speed[i]
            f = (1 - lam) * source[i - 1] + lam * source[i]
            out = -c * fr.d_r(bb, grid) + f
            # dissipation acts with the sign of backward integration
            out -= dissipation * fr.ko_dissipation(bb, grid)
            return out

        t = t1
        for _ in range(n):
            b = rk4(rhs, b, t, h)
            t += h
        beta[i - 1] = b

    hc = np.empty((len(ts), grid.n_theta))
    for i, (t, Y) in enumerate(zip(ts, Ys)):
        g = fields[i][0]
        ginv = inverse3(g)
        px, py = fr.gradient(Y[PHI], grid)
        dphi = np.stack([Y[PI], px, py])
        g0a = np.einsum("a...,a...->...", ginv[0], dphi)
        vol = grid.r * np.sqrt(np.abs(det3(g)))
        integrand = (1.0 + beta[i]) * g0a * vol * fr.d_r(Y[PHI], grid)
        hc[i] = 2.0 * np.sum(integrand, axis=-1) * grid.dr
    return HExtract(2.0 * ts, grid.theta1d.copy(), hc, beta,
                    np.stack([f[3] for f in fields]), np.stack([f[4] for f in fields]), float(T))


def flux_mismatch(hx: HExtract, history: Sequence[tuple], grid: GridSpec) -> np.ndarray:
    """||h_check(., 2t) + 2 int d_r phi d_t phi r dr||_{L2(S1)} per slice."""
    out = []
    for i, (t, Y) in enumerate(history[:len(hx.s)]):
        ref = 2.0 * np.sum(fr.d_r(Y[PHI], grid) * Y[PI] * grid.r, axis=-1) * grid.dr
        out.append(float(np.sqrt(np.sum((hx.h_check[i] + ref) ** 2) * grid.dtheta)))
    return np.array(out)


# --------------------------------------------------------------------------
# eikonal cone


def _metric_and_derivative(evo: Evolution, t: float, Y: np.ndarray):
    grid = evo.grid
    bg = evo.background.at(t)
    gt = sym_from_components(Y[GT])
    gx, gy = fr.gradient(gt, grid)
    dg = bg.dg + np.stack([sym_from_components(Y[GTT]), gx, gy])
    ginv = inverse3(bg.g + gt)
    dginv = -np.einsum("ab...,cbd...,de...->cae...", ginv, dg, ginv, optimize=True)
    return ginv, dginv


def _interp_polar(F: np.ndarray, x: np.ndarray, y: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Bilinear interpolation in (theta, r) of fields F[..., n_theta, n_r] at points."""
    r = np.hypot(x, y)
    th = np.mod(np.arctan2(y, x), 2 * np.pi)
    fi = th / grid.dtheta
    i0 = np.floor(fi).astype(int) % grid.n_theta
    i1 = (i0 + 1) % grid.n_theta
    wi = fi - np.floor(fi)
    fj = np.clip(r / grid.dr - 0.5, 0.0, grid.n_r - 1.000001)
    j0 = np.floor(fj).astype(int)
    wj = fj - j0
    j1 = np.minimum(j0 + 1, grid.n_r - 1)
    return ((1 - wi) * ((1 - wj) * F[..., i0, j0] + wj * F[..., i0, j1])
            + wi * ((1 - wj) * F[..., i1, j0] + wj * F[..., i1, j1]))


@dataclass
class ConeReport:
    times: np.ndarray
    levels: np.ndarray          # (n_t, n_theta) u-level of the support boundary
    max_level: float
    margin: float               # max_level - (R + 1/2)


def eikonal_cone_check(history: Sequence[tuple], evo: Evolution, tol: float = 1e-8,
                       r_launch: np.ndarray | None = None, substeps: int = 8) -> ConeReport:
    """Outgoing eikonal u with u = r at t = 0, followed along its null rays.

    Rays start on the grid rays theta_j with covector du = (p_t, cos, sin), p_t the
    outgoing root of g^{ab} p_a p_b = 0, and follow Hamilton's equations in t.
    The u-level of the phi support boundary (last radius with |phi| above
    ``tol`` times the initial sup) is interpolated from the ray radii.
    """
    if not history:
        raise HistoryError("no stored history")
    grid = evo.grid
    R = evo.config.R
    if r_launch is None:
        r_launch = np.arange(0.25, min(R + 4.0, grid.r_max / 2), 0.25 * max(grid.dr, 0.05))
    th = grid.theta1d
    TH, R0 = np.meshgrid(th, r_launch, indexing="ij")          # (n_theta, n_rays)
    X = np.stack([R0 * np.cos(TH), R0 * np.sin(TH)])

    def covector(ginv_pts, px, py):
        a = ginv_pts[0, 0]
        bq = 2 * (ginv_pts[0, 1] * px + ginv_pts[0, 2] * py)
        c = ginv_pts[1, 1] * px ** 2 + 2 * ginv_pts[1, 2] * px * py + ginv_pts[2, 2] * py ** 2
        disc = np.sqrt(np.maximum(bq ** 2 - 4 * a * c, 0.0))
        return (-bq + disc) / (2 * a)      # a < 0: this root continues p_t = -1

    t0, Y0 = history[0]
    ginv, dginv = _metric_and_derivative(evo, t0, Y0)
    gi = _interp_polar(ginv, X[0], X[1], grid)
    P = np.stack([covector(gi, np.cos(TH), np.sin(TH)), np.cos(TH), np.sin(TH)])
    scale = np.abs(Y0[PHI]).max()
    levels, times = [], []
    prev = (ginv, dginv)

    def record(t, Y):
        phi = np.abs(Y[PHI])
        rr = np.hypot(X[0], X[1])
        lev = np.empty(grid.n_theta)
        for j in range(grid.n_theta):
            above = np.nonzero(phi[j] > tol * scale)[0] if scale > 0 else []
            if len(above) == 0:
                lev[j] = -np.inf
                continue
            rs = grid.r1d[above[-1]]
            if np.any(np.diff(rr[j]) <= 0):
                warnings.warn("outgoing characteristics crossed", CharacteristicCrossing)
            lev[j] = np.interp(rs, rr[j], r_launch)
        levels.append(lev)
        times.append(t)

    record(t0, Y0)
    for (ta, Ya), (tb, Yb) in zip(history[:-1], history[1:]):
        nxt = _metric_and_derivative(evo, tb, Yb)
        h = (tb - ta) / substeps

        def rhs(Z, t):
            lam = (t - ta) / (tb - ta)
            x, p = Z[:2], Z[2:]
            gI = _interp_polar((1 - lam) * prev[0] + lam * nxt[0], x[0], x[1], grid)
            dgI = _interp_polar((1 - lam) * prev[1] + lam * nxt[1], x[0], x[1], grid)
            v = np.einsum("ab...,b...->a...", gI, p)
            dp = -0.5 * np.einsum("cab...,a...,b...->c...", dgI, p, p)
            return np.concatenate([v[1:] / v[0], dp / v[0]])

        Z = np.concatenate([X, P])
        t = ta
        for _ in range(substeps):
            Z = rk4(rhs, Z, t, h)
            t += h
        X = Z[:2]
        # project back onto the null cone to stop drift
        gi = _interp_polar(nxt[0], X[0], X[1], grid)
        P = np.concatenate([covector(gi, Z[3], Z[4])[None], Z[3:]])
        prev = nxt
        record(tb, Yb)
    levels = np.array(levels)
    mx = float(np.max(levels))
    return ConeReport(np.array(times), levels, mx, mx - (R + 0.5))


# --------------------------------------------------------------------------
# fits


@dataclass
class DecayFit:
    exponent: float
    stderr: float
    n: int


def fit_decay(t, values, window: tuple[float, float] | None = None,
              min_samples: int = 10) -> DecayFit:
    """Least-squares slope of log(value) against log(1 + t) over ``window``."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=float)
    if window is not None:
        m = (t >= window[0] - 1e-12) & (t <= window[1] + 1e-12)
        t, v = t[m], v[m]
    if t.size < min_samples:
        raise ValueError(f"need at least {min_samples} samples, got {t.size}")
    if np.any(v <= 0) or not np.all(np.isfinite(v)):
        raise ValueError("fit_decay needs positive finite values")
    res = stats.linregress(np.log1p(t), np.log(v))
    return DecayFit(float(res.slope), float(res.stderr), int(t.size))


# --------------------------------------------------------------------------
# run monitor


def barLbarL_norm(state: FieldState, grid: GridSpec) -> float:
    """||d g~_{LbarLbar}||_{L2} over all three Cartesian derivatives."""
    Lb = _frame(grid)["Lbar"]
    u = _fc(state.g_tilde, Lb, Lb)
    u_t = _fc(state.g_tilde_t, Lb, Lb)
    ux, uy = fr.gradient(u, grid)
    return float(np.sqrt(fr.integrate(u_t ** 2 + ux ** 2 + uy ** 2, grid)))


def gauge_residual_state(state: FieldState, evo: Evolution):
    """H(g) - (F_b + G + G~) on the state (zero prescribed source in plain mode)."""
    grid = evo.grid
    bg = evo.background.at(state.t)
    gt = state.g_tilde
    gx, gy = fr.gradient(gt, grid)
    dg = bg.dg + np.stack([state.g_tilde_t, gx, gy])
    jet = MetricJet(bg.g + gt, dg)
    mask = ~evo.sponge
    if evo.constructed:
        src = gg.G_source(state.phi, state.phi_t, state.t, grid, evo.h, evo.cutoff, evo.b,
                          evo.config.band_term)
        Gt = gg.G_tilde(gt, bg.g, bg.X)
        return gg.gauge_residual(jet, bg.F, src.G, Gt, grid, mask=mask)
    z = np.zeros((3,) + grid.shape)
    return gg.gauge_residual(jet, z, z, z, grid, mask=mask)


def monitor_row(evo: Evolution, state: FieldState) -> dict:
    """One diagnostics row for a run."""
    grid = evo.grid
    ham, mom = constraint_residuals(state, evo)
    q = grid.r - state.t
    out_phi = np.abs(state.phi[q > evo.config.R + 1.0])
    return {
        "t": state.t,
        "dLbLb_l2": barLbarL_norm(state, grid),
        "sup_g": float(np.abs(state.Y[GT]).max()),
        "sup_phi": float(np.abs(state.phi).max()),
        "sup_phi_outside": float(out_phi.max()) if out_phi.size else 0.0,
        "gauge_sup": gauge_residual_state(state, evo).sup,
        "ham_sup": float(np.abs(ham).max()),
        "mom_sup": float(np.abs(mom).max()),
        "delta_h": delta_h(state.phi, state.phi_t, state.t, grid, evo.h),
        "sup_k": float(np.abs(state.k).max()),
    }
