"""Flat 2+1 wave solver and numerical checkers for the linear toolbox:
pointwise decay, Klainerman-Sobolev, weighted Hardy and the L-infinity
estimate for the inhomogeneous problem.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numba as nb
import numpy as np

from . import frame as fr
from .frame import ALL_Z, GridSpec, VectorFieldId, _commutator_with_dt, apply_Z
from .stepping import rk4


class SupportViolation(ValueError):
    pass


class ExponentRangeError(ValueError):
    pass


def plus_power(A: np.ndarray, alpha: float) -> np.ndarray:
    """A^{[alpha]_+}: A^max(alpha, 0) for alpha != 0, a logarithm for alpha = 0.

    The logarithmic case uses ln(1 + A) so that the factor stays positive at A = 1.
    """
    if alpha == 0:
        return np.log1p(A)
    return A ** max(alpha, 0.0)


# --------------------------------------------------------------------------
# solver


@dataclass
class FlatTrajectory:
    grid: GridSpec
    times: list = field(default_factory=list)
    phi: list = field(default_factory=list)
    phi_t: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    origin: list = field(default_factory=list)

    def rows(self) -> list[dict]:
        return [{"t": t, "energy": e, "sup_phi": float(np.abs(p).max()), "phi_origin": o}
                for t, e, p, o in zip(self.times, self.energy, self.phi, self.origin)]


def flat_energy(phi: np.ndarray, phi_t: np.ndarray, grid: GridSpec) -> float:
    px, py = fr.gradient(phi, grid)
    return float(fr.integrate(phi_t ** 2 + px ** 2 + py ** 2, grid))


_EXTRAP = np.array([[5.0, -10.0, 10.0, -5.0, 1.0],
                    [15.0, -40.0, 45.0, -24.0, 5.0],
                    [35.0, -105.0, 126.0, -70.0, 15.0]])


@nb.njit(cache=True)
def _radial_part(u, r, dr, ext, out):
    # d_rr u + d_r u / r with the parity fold and outer extrapolation of frame.pad_radial
    nt, n = u.shape
    half = nt // 2
    p = np.empty(n + 6)
    for i in range(nt):
        j = (i + half) % nt
        for k in range(3):
            p[2 - k] = u[j, k]
        for k in range(n):
            p[3 + k] = u[i, k]
        for g in range(3):
            acc = 0.0
            for k in range(5):
                acc += ext[g, k] * u[i, n - 1 - k]
            p[n + 3 + g] = acc
        for k in range(n):
            m2 = p[k + 1]
            m1 = p[k + 2]
            p1 = p[k + 4]
            p2 = p[k + 5]
            ur = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * dr)
            urr = (-m2 + 16.0 * m1 - 30.0 * p[k + 3] + 16.0 * p1 - p2) / (12.0 * dr * dr)
            out[i, k] = urr + ur / r[k]


class FlatLaplacian:
    """Same discretisation as :func:`frame.laplacian`, precompiled for the flat solver."""

    def __init__(self, grid: GridSpec):
        self.grid = grid
        eye = np.eye(grid.n_theta)
        self.D2 = fr.d_thth(eye[:, :, None], grid)[:, :, 0].T.copy()
        self.ir2 = 1.0 / grid.r1d ** 2

    def __call__(self, u: np.ndarray) -> np.ndarray:
        out = np.empty_like(u)
        _radial_part(np.ascontiguousarray(u), self.grid.r1d, self.grid.dr, _EXTRAP, out)
        out += (self.D2 @ u) * self.ir2
        return out


def flat_rhs(grid: GridSpec, source: Callable | None = None, dissipation: float = 0.0,
             frozen: np.ndarray | None = None) -> Callable:
    """d/dt (phi, phi_t) for box phi = source with box = -d_t^2 + Laplacian."""
    lap = FlatLaplacian(grid)

    def f(Y, t):
        out = np.empty_like(Y)
        out[0] = Y[1]
        out[1] = lap(Y[0])
        if source is not None:
            out[1] -= source(t)
        if dissipation > 0:
            out += dissipation * fr.ko_dissipation(Y, grid)
        if frozen is not None:
            out[:, frozen] = 0.0
        return out
    return f


def solve_flat_wave(phi0: np.ndarray, phi1: np.ndarray, grid: GridSpec, T: float,
                    source: Callable[[float], np.ndarray] | None = None,
                    cfl: float = 0.25, dt: float | None = None, record_every: float = 1.0,
                    dissipation: float = 0.0, t0: float = 0.0, check_support: bool = True,
                    keep_fields: bool = True) -> FlatTrajectory:
    """Evolve box phi = source from (phi0, phi1) at t0 to t0 + T with RK4.

    Snapshots are kept every ``record_every`` (rounded to a whole number of steps)
    and always at the final time.
    """
    if check_support:
        outside = grid.r >= grid.r_max - T
        scale = max(np.abs(phi0).max(), np.abs(phi1).max(), 1e-300)
        if np.any(outside) and max(np.abs(phi0[..., outside]).max(),
                                   np.abs(phi1[..., outside]).max()) > 1e-14 * scale:
            raise SupportViolation("data reaches the causally connected outer band r >= r_max - T")
    dt_max = cfl * grid.dt_max_unit
    dt = dt_max if dt is None else min(dt, dt_max)
    n = max(1, int(math.ceil(T / dt - 1e-9)))
    h = T / n
    every = max(1, int(round(record_every / h)))
    f = flat_rhs(grid, source, dissipation)
    Y = np.stack([phi0, phi1]).astype(float)
    traj = FlatTrajectory(grid)
    t = t0

    def record(Y, t):
        traj.times.append(t)
        traj.energy.append(flat_energy(Y[0], Y[1], grid))
        traj.origin.append(float(fr.value_at_origin(Y[0])))
        if keep_fields:
            traj.phi.append(Y[0].copy())
            traj.phi_t.append(Y[1].copy())
        else:
            traj.phi = [Y[0].copy()]
            traj.phi_t = [Y[1].copy()]

    record(Y, t)
    for k in range(1, n + 1):
        Y = rk4(f, Y, t, h)
        t = t0 + k * h
        if k % every == 0 or k == n:
            record(Y, t)
    return traj


# --------------------------------------------------------------------------
# pointwise decay


@dataclass
class DecayWitness:
    mu: float
    M_value: float
    margin_field: np.ndarray | None = None


def decay_constant_M(phi0: np.ndarray, phi1: np.ndarray, grid: GridSpec, mu: float) -> DecayWitness:
    """sup over grid of (1+|y|)^mu |phi0| + (1+|y|)^{mu+1} (|phi1| + |grad phi0|)."""
    if mu <= 0.5:
        raise ExponentRangeError("mu must exceed 1/2")
    px, py = fr.gradient(phi0, grid)
    w = 1.0 + grid.r
    val = w ** mu * np.abs(phi0) + w ** (mu + 1) * (np.abs(phi1) + np.hypot(px, py))
    return DecayWitness(mu, float(val.max()))


def verify_flat_decay(traj: FlatTrajectory, witness: DecayWitness,
                      causal_only: bool = True) -> float:
    """Max over sampled (t, x) of |phi| sqrt(1+t+r) sqrt(1+|t-r|) / ((1+|t-r|)^{[1-mu]_+} M)."""
    grid = traj.grid
    r = grid.r
    worst = 0.0
    last = None
    for t, phi in zip(traj.times, traj.phi):
        A = 1.0 + np.abs(t - r)
        den = plus_power(A, 1.0 - witness.mu) * witness.M_value
        num = np.abs(phi) * np.sqrt(1.0 + t + r) * np.sqrt(A)
        ok = den > 0
        if causal_only:
            ok &= r < grid.r_max - (t - traj.times[0])
        m = np.zeros_like(num)
        m[ok] = num[ok] / den[ok]
        if np.any(num[ok] > 0):
            worst = max(worst, float(m.max()))
        last = m
    witness.margin_field = last
    return worst


# --------------------------------------------------------------------------
# weighted Klainerman-Sobolev


def z_apply_sequence(D: Sequence[np.ndarray], Z: VectorFieldId, t: float,
                     grid: GridSpec) -> list[np.ndarray]:
    """Time-derivative sequence of Z u from D = [u, d_t u, ..., d_t^m u].

    Uses d_t^k Z = Z d_t^k + k [d_t, Z] d_t^{k-1}; the result has one entry fewer.
    """
    out = []
    for k in range(len(D) - 1):
        v = apply_Z(D[k], Z, t, grid, u_t=D[k + 1])
        if k > 0:
            v = v + k * _commutator_with_dt(D[k - 1], D[k], Z, grid, "extrapolate")
        out.append(v)
    return out


def z_derivatives(f: np.ndarray, f_t: np.ndarray, f_tt: np.ndarray, t: float, grid: GridSpec,
                  order: int = 2) -> list[np.ndarray]:
    """All Z^I f with |I| <= order (order <= 2), using supplied time derivatives."""
    out = [f]
    if order == 0:
        return out
    D = [f, f_t, f_tt]
    for Z1 in ALL_Z:
        D1 = z_apply_sequence(D, Z1, t, grid)
        out.append(D1[0])
        if order >= 2:
            for Z2 in ALL_Z:
                out.append(apply_Z(D1[0], Z2, t, grid, u_t=D1[1]))
    return out


def klainerman_sobolev_margin(f: np.ndarray, f_t: np.ndarray, f_tt: np.ndarray, t: float,
                              grid: GridSpec, v: Callable[[np.ndarray], np.ndarray],
                              mask: np.ndarray | None = None) -> float:
    """max |f| v^{1/2}(r - t) sqrt(1+t+r) sqrt(1+|r-t|) / sum_{|I|<=2} ||v^{1/2} Z^I f||."""
    q = grid.r - t
    sv = np.sqrt(v(q))
    zs = z_derivatives(f, f_t, f_tt, t, grid)
    den = sum(math.sqrt(float(fr.integrate(sv ** 2 * z ** 2, grid))) for z in zs)
    num = np.abs(f) * sv * np.sqrt(1.0 + t + grid.r) * np.sqrt(1.0 + np.abs(q))
    if mask is not None:
        num = np.where(mask, num, 0.0)
    if den == 0:
        if np.any(num > 0):
            raise ZeroDivisionError("vanishing Z-norm with nonzero field")
        return 0.0
    return float(num.max() / den)


# --------------------------------------------------------------------------
# weighted Hardy


def hardy_weight(q: np.ndarray, alpha: float, beta: float) -> np.ndarray:
    A = 1.0 + np.abs(q)
    return np.where(q < 0, A ** alpha, A ** beta)


def hardy_margin(f: np.ndarray, grid: GridSpec, t: float, alpha: float, beta: float,
                 rel_tol: float = 1e-12) -> float:
    """||v^{1/2} f / (1+|q|)|| / ||v^{1/2} d_r f||."""
    if not (alpha < 1 and beta > 1):
        raise ExponentRangeError("need alpha < 1 < beta")
    q = grid.r - t
    v = hardy_weight(q, alpha, beta)
    fr_ = fr.d_r(f, grid)
    den = math.sqrt(float(fr.integrate(v * fr_ ** 2, grid)))
    num = math.sqrt(float(fr.integrate(v * f ** 2 / (1.0 + np.abs(q)) ** 2, grid)))
    scale = math.sqrt(float(fr.integrate(v * f ** 2, grid)))
    if den <= rel_tol * max(scale, 1e-300):
        raise ZeroDivisionError("d_r f vanishes: the inequality applies to decaying f only")
    return num / den


# --------------------------------------------------------------------------
# inhomogeneous L-infinity estimate


@dataclass
class InhomWitness:
    mu: float
    nu: float
    M_munu: float


def inhom_constant(F: Callable[[float], np.ndarray], times: Sequence[float], grid: GridSpec,
                   mu: float, nu: float) -> InhomWitness:
    """M_{mu,nu}(F) = sup (1+|y|+s)^mu (1+|s-|y||)^nu |F(y, s)| over grid and sampled times."""
    if not (mu > 1.5 and nu > 1):
        raise ExponentRangeError("need mu > 3/2 and nu > 1")
    r = grid.r
    M = 0.0
    for s in times:
        M = max(M, float(np.max((1 + r + s) ** mu * (1 + np.abs(s - r)) ** nu * np.abs(F(s)))))
    return InhomWitness(mu, nu, M)


def inhom_bound_check(F: Callable[[float], np.ndarray], mu: float, nu: float,
                      traj: FlatTrajectory, witness: InhomWitness | None = None) -> float:
    """max |u| (1+t+r)^{1/2} (1+|t-r|)^{1/2} / ((1+|t-r|)^{[2-mu]_+} M_{mu,nu}(F))."""
    if not (mu > 1.5 and nu > 1):
        raise ExponentRangeError("need mu > 3/2 and nu > 1")
    grid = traj.grid
    if witness is None:
        witness = inhom_constant(F, traj.times, grid, mu, nu)
    r = grid.r
    worst = 0.0
    t0 = traj.times[0]
    for t, u in zip(traj.times, traj.phi):
        A = 1.0 + np.abs(t - r)
        num = np.abs(u) * np.sqrt(1.0 + t + r) * np.sqrt(A)
        ok = r < grid.r_max - (t - t0)
        if not np.any(num[ok] > 0):
            continue
        den = plus_power(A, 2.0 - mu) * witness.M_munu
        worst = max(worst, float(np.max(num[ok] / den[ok])))
    return worst
