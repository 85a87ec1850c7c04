"""Coupled evolution of the scalar field and the metric perturbation.

The metric is split as g = g_b + g~.  The state is stored as one array of
shape (NFIELDS, n_theta, n_r):

    phi, d_t phi, g~ (six symmetric components), d_t g~ (six), k, d_t k

where k is the auxiliary field used to peel the dq^2 part off g~.
Time stepping is RK4 with radial Kreiss-Oliger dissipation and a frozen
sponge ring at the outer edge.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Callable, NamedTuple

import numpy as np

from . import frame as fr
from . import gauge as gg
from .background import (ACoeffs, BProfile, CutoffSpec, a_from_phi, metric_gb, smoothstep,
                         time_fd)
from .frame import GridSpec
from .stepping import LostTimeFunction, reduced_wave_apply, rk4, wave_derivatives
from .tensor import (SYM_INDEX, DegenerateMetric, H_christoffel, H_linear_operator,
                     MetricJet, P_quadratic, P_quadratic_fast, dH_christoffel, jet_bundle, det3, inverse3, minkowski, ricci,
                     sym_from_components, sym_grad_term)

PHI, PI = 0, 1
GT = slice(2, 8)
GTT = slice(8, 14)
K, KT = 14, 15
NFIELDS = 16
GAUGE_MODES = ("constructed", "plain_harmonic")


class ConfigError(ValueError):
    pass


class EvolutionError(RuntimeError):
    pass


# --------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    eps: float = 0.01
    R: float = 3.0
    delta: float = 0.9
    sigma: float = 0.1
    mu: float = 0.25
    rho: float = 0.05
    n_r: int = 640
    n_theta: int = 8
    r_max: float = 64.0
    cfl: float = 0.5
    dissipation: float = 0.02
    T_final: float = 50.0
    N_d: int = 1
    gauge_mode: str = "constructed"
    band_term: str = "chi_prime"
    deficit_scale: float = 1.0
    data_width: float = 1.0
    data: str = "gaussian"
    sponge_width: float = 2.0
    output_every: float = 0.5
    evolve_metric: bool = True
    b_profile: str | None = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        errs = []
        if not (0 <= self.eps < self.rho < self.sigma < self.delta):
            errs.append("parameter ordering violated: need eps << rho << sigma << delta "
                        f"(got eps={self.eps}, rho={self.rho}, sigma={self.sigma}, "
                        f"delta={self.delta})")
        if not self.delta - 2 * self.sigma > 0.5:
            errs.append(f"need delta - 2 sigma > 1/2 (got {self.delta - 2 * self.sigma:.3g})")
        if not 0.5 < self.delta < 1:
            errs.append(f"delta must lie in (1/2, 1) (got {self.delta})")
        if not 0 < self.mu <= 0.25:
            errs.append(f"mu must lie in (0, 1/4] (got {self.mu})")
        if not 0 < self.cfl <= 0.5:
            errs.append(f"cfl must lie in (0, 0.5] (got {self.cfl})")
        if self.dissipation < 0:
            errs.append("dissipation must be nonnegative")
        if not 0 <= self.N_d <= 2:
            errs.append("N_d must be 0, 1 or 2 at desk scale")
        if self.gauge_mode not in GAUGE_MODES:
            errs.append(f"gauge_mode must be one of {GAUGE_MODES}")
        if self.band_term not in gg.BAND_TERMS:
            errs.append(f"band_term must be one of {gg.BAND_TERMS}")
        if self.R <= 0:
            errs.append("R must be positive")
        if self.data not in ("gaussian", "zero"):
            errs.append("data must be 'gaussian' or 'zero'")
        if errs:
            raise ConfigError("; ".join(errs))

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.n_r, self.n_theta, self.r_max)

    @property
    def dt(self) -> float:
        return self.cfl * self.grid.dt_max_unit

    @property
    def cutoff(self) -> CutoffSpec:
        return CutoffSpec(self.R)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        return cls(**d)


# --------------------------------------------------------------------------
# state


@dataclass
class FieldState:
    t: float
    Y: np.ndarray

    @classmethod
    def zeros(cls, grid: GridSpec, t: float = 0.0) -> "FieldState":
        return cls(t, np.zeros((NFIELDS,) + grid.shape))

    @property
    def phi(self):
        return self.Y[PHI]

    @property
    def phi_t(self):
        return self.Y[PI]

    @property
    def g_tilde(self):
        return sym_from_components(self.Y[GT])

    @property
    def g_tilde_t(self):
        return sym_from_components(self.Y[GTT])

    @property
    def k(self):
        return self.Y[K]

    @property
    def k_t(self):
        return self.Y[KT]

    def copy(self) -> "FieldState":
        return FieldState(self.t, self.Y.copy())


@dataclass
class AuxK:
    k: np.ndarray
    k_t: np.ndarray


# --------------------------------------------------------------------------
# background data


class BackgroundData(NamedTuple):
    g: np.ndarray
    dg: np.ndarray
    ddg: np.ndarray
    ginv: np.ndarray
    F: np.ndarray
    dF: np.ndarray
    R: np.ndarray
    P: np.ndarray
    X: np.ndarray
    X_t: np.ndarray


class Background:
    """Background metric g_b and derived fields, cached per time."""

    def __init__(self, grid: GridSpec, a: ACoeffs, b: BProfile | None, cutoff: CutoffSpec,
                 mode: str = "constructed", deficit_scale: float = 1.0,
                 ht: float | None = None):
        self.grid, self.b, self.cutoff, self.mode = grid, b, cutoff, mode
        self.a = a
        self.a_metric = ACoeffs(a.a0 * deficit_scale, a.a1 * deficit_scale,
                                a.a2 * deficit_scale, a.J_modes)
        self.ht = grid.dr if ht is None else ht
        self._cache: dict[float, BackgroundData] = {}
        self.has_b = b is not None and not b.is_zero
        am = self.a_metric
        trivial = am.a0 == am.a1 == am.a2 == 0 and not am.J_modes and not self.has_b
        # a Minkowski background is represented exactly
        self.flat = mode == "plain_harmonic" or trivial

    def metric(self, t: float) -> np.ndarray:
        return metric_gb(t, self.grid.x, self.grid.y, self.a_metric,
                         self.b if self.b is not None else BProfile.zero(), self.cutoff)

    def at(self, t: float) -> BackgroundData:
        if t in self._cache:
            return self._cache[t]
        shape = self.grid.shape
        if self.flat:
            z3 = np.zeros((3,) + shape)
            m = minkowski(shape)
            data = BackgroundData(m, np.zeros((3, 3, 3) + shape), np.zeros((3, 3, 3, 3) + shape),
                                  m.copy(), z3, np.zeros((3, 3) + shape),
                                  np.zeros((3, 3) + shape), np.zeros((3, 3) + shape),
                                  np.zeros((3, 3, 3) + shape), np.zeros((3, 3, 3) + shape))
        else:
            from .background import jet_from_samples
            g, g_t, g_tt = time_fd(self.metric, t, self.ht)
            jet = jet_from_samples(g, g_t, g_tt, self.grid)
            ginv, F, dF, Rb, Pb = jet_bundle(jet)
            if self.has_b:
                X, X_t = gg.high_derivative_part_t(t, self.grid, self.a_metric, self.b,
                                                   self.cutoff, self.ht)
            else:
                X = X_t = np.zeros((3, 3, 3) + shape)
            data = BackgroundData(g, jet.dg, jet.ddg, ginv, F, dF, Rb, Pb, X, X_t)
        if len(self._cache) > 4:
            self._cache.pop(next(iter(self._cache)))
        self._cache[t] = data
        return data


# --------------------------------------------------------------------------
# right-hand side


def sponge_mask(grid: GridSpec, width: float) -> np.ndarray:
    return grid.r >= grid.r_max - width


def dq_squared(grid: GridSpec) -> np.ndarray:
    """(dq)^2 with dq = dr - dt in (t, x, y) components."""
    v = np.stack([-np.ones(grid.shape), grid.cos, grid.sin])
    return v[:, None] * v[None, :]


def g1_decomposition(g_tilde: np.ndarray, k: np.ndarray, t: float, grid: GridSpec) -> np.ndarray:
    """g~_1 = g~ - 4 Upsilon(r/t) k dq^2."""
    ups = CutoffSpec.upsilon_rt(grid.r, t)
    return g_tilde - 4.0 * ups * k * dq_squared(grid)


class Evolution:
    """Right-hand side assembly and stepping for one run."""

    def __init__(self, config: RunConfig, a: ACoeffs, b: BProfile | None = None,
                 h: Callable | None = None, background: Background | None = None):
        self.config = config
        self.grid = config.grid
        self.cutoff = config.cutoff
        self.a = a
        self.b = b
        self.constructed = config.gauge_mode == "constructed"
        self.h = h if h is not None else gg.h_from_background(b, a)
        self.background = background or Background(
            self.grid, a, b, self.cutoff, config.gauge_mode, config.deficit_scale)
        self.sponge = sponge_mask(self.grid, config.sponge_width)
        self.aux: dict = {}

    # ---------------------------------------------------------------
    def rhs(self, Y: np.ndarray, t: float, keep_aux: bool = False) -> np.ndarray:
        grid = self.grid
        bg = self.background.at(t)
        out = np.zeros_like(Y)

        u = np.concatenate([Y[PHI:PHI + 1], Y[GT], Y[K:K + 1]])
        u_t = np.concatenate([Y[PI:PI + 1], Y[GTT], Y[KT:KT + 1]])
        du, hess, dut = wave_derivatives(u, u_t, grid)
        dphi = du[:, 0]
        dgt = sym_from_components(np.moveaxis(du[:, 1:7], 1, 0))        # [m, n, c]
        dgt = np.moveaxis(dgt, 2, 0)                                     # [c, m, n]

        g_t = sym_from_components(Y[GT])
        g = bg.g + g_t
        if np.any(det3(g) >= 0):
            raise DegenerateMetric("full metric lost Lorentzian signature")
        ginv = inverse3(g)

        if self.constructed:
            src = gg.G_source(Y[PHI], Y[PI], t, grid, self.h, self.cutoff, self.b,
                              self.config.band_term)
            Gt = gg.G_tilde(g_t, bg.g, bg.X)
            H = bg.F + src.G + Gt
        else:
            src = None
            Gt = None
            H = None

        # scalar field
        phi_tt = reduced_wave_apply(ginv, H, du[:, 0], tuple(x[0] for x in hess),
                                    tuple(x[0] for x in dut))

        # metric perturbation sources
        S = -4.0 * dphi[:, None] * dphi[None, :]
        dg = bg.dg + dgt
        Pfull = P_quadratic_fast(ginv, dg)
        if self.constructed:
            src = gg.G_source(Y[PHI], Y[PI], t, grid, self.h, self.cutoff, self.b,
                              self.config.band_term, phi_tt)
            dG = gg.source_gradient(src, grid)
            dH_pres = bg.dF + dG
            S = S + 2.0 * bg.R + sym_grad_term(g, dG)
            S = S + Pfull - bg.P
            S = S + np.einsum("ab...,abmn...->mn...", bg.ginv - ginv, bg.ddg, optimize=True)
            S = S + np.einsum("r...,rmn...->mn...", src.G + Gt, bg.dg, optimize=True)
            S = S + sym_grad_term(g_t, bg.dF)
            if self.background.has_b:
                gtt_full = sym_from_components(Y[GTT])
                Gt_t = gg.G_tilde_t(g_t, gtt_full, bg.g, bg.dg[0], bg.X, bg.X_t)
                Gx, Gy = fr.gradient(Gt, grid)
                dGt = np.stack([Gt_t, Gx, Gy])
                S = S + sym_grad_term(g, dGt)
                dH_pres = dH_pres + dGt
        else:
            S = S + Pfull
            dH_pres = None
        S6 = np.stack([S[i, j] for i, j in SYM_INDEX])

        # auxiliary k: box_g k = dq g_UU dq g~_LbarL + g~_LLbar dq G^L
        if self.constructed:
            Q = self._k_source(dg, dgt, g_t, src, grid)
        else:
            Q = np.zeros(grid.shape)

        srcs = np.concatenate([np.zeros((1,) + grid.shape), S6, Q[None]])
        utt = reduced_wave_apply(ginv, H, du, hess, dut, srcs)

        if self.config.evolve_metric:
            out[PHI], out[PI] = Y[PI], utt[0]
            out[GT], out[GTT] = Y[GTT], utt[1:7]
            out[K], out[KT] = Y[KT], utt[7]
        else:
            out[PHI], out[PI] = Y[PI], utt[0]

        sig = self.config.dissipation
        if sig > 0:
            out += sig * fr.ko_dissipation(Y, grid)
        out[:, self.sponge] = 0.0
        if not np.all(np.isfinite(out)):
            raise EvolutionError(f"non-finite right-hand side at t = {t}")
        if keep_aux:
            self.aux = {"t": t, "g": g, "ginv": ginv, "dg": dg, "H": H, "src": src,
                        "G_tilde": Gt, "phi_tt": utt[0], "S": S, "bg": bg,
                        "dH": dH_pres, "utt": utt}
        return out

    @staticmethod
    def _k_source(dg, dgt, g_tilde, src, grid):
        """Q = d_q g_UU d_q g~_LbarL + g~_LLbar d_q G^L."""
        c, s = grid.cos, grid.sin
        one = np.ones_like(c)
        L = np.stack([one, c, s])
        Lb = np.stack([one, -c, -s])
        U = np.stack([0 * c, -s, c])
        dq_g = 0.5 * (c * dg[1] + s * dg[2] - dg[0])
        dq_gt = 0.5 * (c * dgt[1] + s * dgt[2] - dgt[0])
        dq_gUU = np.einsum("m...,n...,mn...->...", U, U, dq_g)
        dq_gLbL = np.einsum("m...,n...,mn...->...", Lb, L, dq_gt)
        gLLb = np.einsum("m...,n...,mn...->...", L, Lb, g_tilde)
        GL_t = 0.5 * (src.G_t[0] + c * src.G_t[1] + s * src.G_t[2])
        dq_GL = 0.5 * (fr.d_r(src.GL, grid) - GL_t)
        return dq_gUU * dq_gLbL + gLLb * dq_GL

    # ---------------------------------------------------------------
    def step(self, state: FieldState, dt: float) -> FieldState:
        if dt > self.config.cfl * self.grid.dt_max_unit * (1 + 1e-12):
            raise EvolutionError("time step exceeds the CFL limit")
        Y = rk4(self.rhs, state.Y, state.t, dt)
        if not np.all(np.isfinite(Y)):
            raise EvolutionError(f"non-finite state after step at t = {state.t}")
        return FieldState(state.t + dt, Y)


# --------------------------------------------------------------------------
# data and initial state


def gaussian_data(grid: GridSpec, eps: float, R: float, width: float = 1.0):
    """eps exp(-(r/width)^2) cut off smoothly on [R - 1, R]; zero velocity."""
    r = grid.r
    cut = 1.0 - smoothstep(r - (R - 1.0))
    return eps * np.exp(-(r / width) ** 2) * cut, np.zeros(grid.shape)


class InitialData(NamedTuple):
    state: FieldState
    a: ACoeffs
    b: BProfile
    residuals: dict


def initial_data(phi0: np.ndarray, phi1: np.ndarray, config: RunConfig,
                 b: BProfile | None = None, background: Background | None = None) -> InitialData:
    """Scalar data plus g~ = 0 with d_t g~_{0mu} fixed by the gauge condition at t = 0."""
    grid = config.grid
    a = a_from_phi(phi0, phi1, grid)
    b = BProfile.zero() if b is None else b
    state = FieldState.zeros(grid)
    state.Y[PHI] = phi0
    state.Y[PI] = phi1
    evo = Evolution(config, a, b, background=background)
    if evo.constructed:
        bgd = evo.background.at(0.0)
        src = gg.G_source(phi0, phi1, 0.0, grid, evo.h, evo.cutoff, b, config.band_term)
        target = src.G  # G~ vanishes with g~ = 0
        ginv = bgd.ginv
        A = np.empty((3, 3) + grid.shape)
        for mu in range(3):
            X = np.zeros((3, 3, 3) + grid.shape)
            X[0, 0, mu] = X[0, mu, 0] = 1.0
            A[:, mu] = H_linear_operator(ginv, X)
        Am = np.moveaxis(A, (0, 1), (-2, -1))
        y = np.linalg.solve(Am, np.moveaxis(target, 0, -1)[..., None])[..., 0]
        y = np.moveaxis(y, -1, 0)
        y[:, evo.sponge] = 0.0
        for mu in range(3):
            state.Y[GTT.start + SYM_INDEX.index((0, mu))] = y[mu]
    res = constraint_residuals(state, evo)
    return InitialData(state, a, b, {"ham_sup": float(np.abs(res[0]).max()),
                                     "mom_sup": float(np.abs(res[1]).max())})


# --------------------------------------------------------------------------
# constraints


def _inverse2(g):
    d = g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]
    return np.stack([np.stack([g[1, 1], -g[0, 1]]), np.stack([-g[1, 0], g[0, 0]])]) / d


def adm_constraints(g: np.ndarray, g_t: np.ndarray, phi: np.ndarray, phi_t: np.ndarray,
                    grid: GridSpec, outer: str = "extrapolate"):
    """Hamiltonian and momentum residuals of a slice.

    G(e0, e0) - (2 (e0 phi)^2 + N^2 |d phi|^2_g) and
    G(e0, d_j) - 2 e0(phi) d_j phi, with e0 = d_t - beta^i d_i,
    G(e0, e0) = N^2/2 (Rbar - |K|^2 + tau^2), G(e0, d_j) = N (d_j tau - D^i K_ij)
    and K_ij = -(d_t g_ij - D_i beta_j - D_j beta_i) / 2N.
    """
    gam = g[1:, 1:]
    (gx, gy), (gxx, gxy, gyy) = fr.hessian(gam, grid, outer)
    dgam = np.stack([gx, gy])
    ddgam = np.stack([np.stack([gxx, gxy]), np.stack([gxy, gyy])])
    ig = _inverse2(gam)
    from .tensor import christoffel, christoffel_first, d_christoffel
    Gam = christoffel(ig, dgam)
    dGam = d_christoffel(ig, dgam, ddgam)
    tr = np.einsum("aamn...->mn...", dGam)
    dtr = np.einsum("naam...->mn...", dGam)
    con = np.einsum("aab...->b...", Gam)
    Ric = (tr - dtr + np.einsum("b...,bmn...->mn...", con, Gam)
           - np.einsum("anb...,bam...->mn...", Gam, Gam))
    Rbar = np.einsum("ij...,ij...->...", ig, Ric)

    beta_low = g[0, 1:]
    beta = np.einsum("ij...,j...->i...", ig, beta_low)
    N2 = np.einsum("i...,i...->...", beta, beta_low) - g[0, 0]
    if np.any(N2 <= 0):
        raise EvolutionError("lapse is not positive")
    N = np.sqrt(N2)
    bx, by = fr.gradient(beta_low, grid, outer)
    dbeta = np.stack([bx, by])                                   # [k, j] = d_k beta_j
    Dbeta = dbeta - np.einsum("lij...,l...->ij...", Gam, beta_low)
    Kij = -(g_t[1:, 1:] - Dbeta - np.swapaxes(Dbeta, 0, 1)) / (2.0 * N)
    tau = np.einsum("ij...,ij...->...", ig, Kij)
    K2 = np.einsum("ik...,jl...,ij...,kl...->...", ig, ig, Kij, Kij, optimize=True)
    kx, ky = fr.gradient(Kij, grid, outer)
    dK = np.stack([kx, ky])                                      # [k, i, j]
    DK = (dK - np.einsum("lki...,lj...->kij...", Gam, Kij)
          - np.einsum("lkj...,il...->kij...", Gam, Kij))
    divK = np.einsum("ki...,kij...->j...", ig, DK)
    tx, ty = fr.gradient(tau, grid, outer)
    dtau = np.stack([tx, ty])

    px, py = fr.gradient(phi, grid, outer)
    dphi_sp = np.stack([px, py])
    e0phi = phi_t - np.einsum("i...,i...->...", beta, dphi_sp)
    dphi = np.stack([phi_t, px, py])
    ginv = inverse3(g)
    grad2 = np.einsum("ab...,a...,b...->...", ginv, dphi, dphi)

    ham = 0.5 * N2 * (Rbar - K2 + tau ** 2) - (2.0 * e0phi ** 2 + N2 * grad2)
    mom = N * (dtau - divK) - 2.0 * e0phi * dphi_sp
    return ham, mom


def constraint_residuals(state: FieldState, evo: "Evolution"):
    """(ham, mom) of the full metric g = g_b + g~ on the state's slice."""
    bg = evo.background.at(state.t)
    g = bg.g + state.g_tilde
    g_t = bg.dg[0] + state.g_tilde_t
    ham, mom = adm_constraints(g, g_t, state.phi, state.phi_t, evo.grid)
    ham[..., evo.sponge] = 0.0
    mom[..., evo.sponge] = 0.0
    return ham, mom


# --------------------------------------------------------------------------
# runs


@dataclass
class RunResult:
    config: RunConfig
    a: ACoeffs
    b: BProfile
    rows: list = field(default_factory=list)
    history: list = field(default_factory=list)
    state: FieldState | None = None
    initial_residuals: dict = field(default_factory=dict)


def run(config: RunConfig, phi0: np.ndarray | None = None, phi1: np.ndarray | None = None,
        b: BProfile | None = None, monitor: Callable | None = None,
        history_every: float | None = None, T: float | None = None,
        progress: Callable | None = None) -> RunResult:
    """Evolve from scalar data to ``T`` (default config.T_final).

    ``monitor(evo, state)`` returns a dict row recorded every
    ``config.output_every``.  Snapshots (t, Y) are stored every
    ``history_every`` when given.
    """
    grid = config.grid
    if phi0 is None:
        if config.data == "zero" or config.eps == 0:
            phi0, phi1 = np.zeros(grid.shape), np.zeros(grid.shape)
        else:
            phi0, phi1 = gaussian_data(grid, config.eps, config.R, config.data_width)
    phi1 = np.zeros(grid.shape) if phi1 is None else phi1
    init = initial_data(phi0, phi1, config, b)
    evo = Evolution(config, init.a, init.b)
    state = init.state
    T = config.T_final if T is None else T
    dt = config.dt
    nsteps = int(math.ceil(T / dt - 1e-9))
    dt = T / nsteps if nsteps else dt
    out_every = max(1, int(round(config.output_every / dt)))
    hist_every = None if history_every is None else max(1, int(round(history_every / dt)))
    result = RunResult(config, init.a, init.b, initial_residuals=init.residuals)
    for n in range(nsteps + 1):
        last = n == nsteps
        if monitor is not None and (n % out_every == 0 or last):
            result.rows.append(monitor(evo, state))
        if hist_every is not None and (n % hist_every == 0 or last):
            result.history.append((state.t, state.Y.copy()))
        if progress is not None and n % out_every == 0:
            progress(state.t)
        if n == nsteps:
            break
        state = evo.step(state, dt)
    result.state = state
    result.evolution = evo
    return result


def evolve_k(Q: Callable[[float], np.ndarray], grid: GridSpec, T: float, dt: float,
             ginv_fn: Callable[[float], np.ndarray] | None = None,
             H_fn: Callable[[float], np.ndarray] | None = None,
             dissipation: float = 0.0) -> list[tuple[float, AuxK]]:
    """Solve box_g k = Q(t) from zero data; flat metric unless ``ginv_fn`` is given."""
    m = minkowski(grid.shape)

    def f(Y, t):
        ginv = m if ginv_fn is None else ginv_fn(t)
        H = None if H_fn is None else H_fn(t)
        du, hess, dut = wave_derivatives(Y[0], Y[1], grid)
        out = np.stack([Y[1], reduced_wave_apply(ginv, H, du, hess, dut, Q(t))])
        if dissipation > 0:
            out += dissipation * fr.ko_dissipation(Y, grid)
        return out

    Y = np.zeros((2,) + grid.shape)
    t = 0.0
    traj = [(t, AuxK(Y[0].copy(), Y[1].copy()))]
    n = int(math.ceil(T / dt - 1e-9))
    h = T / n
    for _ in range(n):
        Y = rk4(f, Y, t, h)
        t += h
        traj.append((t, AuxK(Y[0].copy(), Y[1].copy())))
    return traj
