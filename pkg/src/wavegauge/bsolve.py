"""Circle solver for b(theta) from a target h, and the hypothesis-margin report.

Given h' the unknown b solves

    2 a(theta + f) / (1+b)^2 + 1/(1+b)^2 - 1 - 2 b'' / (1+b) + b'^2 / (1+b)^2
        = Pi h' + b0 + b1 cos + b2 sin,      1 + f' = 1 / (1+b),

with int b / (1+b) = 0.  With beta = b / (1+b) this becomes, exactly,

    -2 beta'' - 2 beta = (1-beta) P - 2 a(theta+f) (1-beta)^3 + R,
    R = -3 beta^2 + beta^3 + 3 beta'^2 / (1-beta),   f' = -beta,

where P is the right-hand side above.  The operator on the left is diagonal
in Fourier modes and singular on modes 0 and +-1; b0, b1, b2 are fixed each
sweep by requiring those modes of the right-hand side to vanish.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .background import ACoeffs, BProfile


class NonContraction(RuntimeError):
    pass


class BallViolation(RuntimeError):
    pass


# --------------------------------------------------------------------------
# spectral helpers on a uniform theta grid


def _k(n: int) -> np.ndarray:
    return np.fft.fftfreq(n, 1.0 / n)


def spectral_derivative(u: np.ndarray, order: int = 1, axis: int = -1) -> np.ndarray:
    n = u.shape[axis]
    k = _k(n)
    mult = (1j * k) ** order
    if order % 2 == 1 and n % 2 == 0:
        mult[n // 2] = 0.0
    shape = [1] * u.ndim
    shape[axis] = n
    return np.real(np.fft.ifft(np.fft.fft(u, axis=axis) * mult.reshape(shape), axis=axis))


def project_high(u: np.ndarray) -> np.ndarray:
    """Pi: remove Fourier modes 0 and +-1."""
    uh = np.fft.fft(u, axis=-1)
    uh[..., [0, 1, -1]] = 0.0
    return np.real(np.fft.ifft(uh, axis=-1))


def zero_mean_antiderivative(u: np.ndarray) -> np.ndarray:
    """F with F' = u - mean(u) and zero mean."""
    n = u.shape[-1]
    k = _k(n)
    uh = np.fft.fft(u, axis=-1)
    inv = np.zeros(n, dtype=complex)
    nz = k != 0
    inv[nz] = 1.0 / (1j * k[nz])
    if n % 2 == 0:
        inv[n // 2] = 0.0
    return np.real(np.fft.ifft(uh * inv, axis=-1))


def fourier_resample(u: np.ndarray, m: int) -> np.ndarray:
    """Band-limited interpolation of periodic samples onto m >= n points."""
    n = u.shape[-1]
    uh = np.fft.rfft(u, axis=-1)
    if n % 2 == 0:
        uh[..., -1] *= 0.5
    out = np.zeros(u.shape[:-1] + (m // 2 + 1,), dtype=complex)
    out[..., :uh.shape[-1]] = uh
    return np.fft.irfft(out, n=m, axis=-1) * (m / n)


# --------------------------------------------------------------------------
# the defining display


def h_of_b(b: np.ndarray, a: ACoeffs, theta: np.ndarray) -> np.ndarray:
    """Left side of the circle equation evaluated for samples of b."""
    B = 1.0 + b
    bt = spectral_derivative(b, 1)
    btt = spectral_derivative(b, 2)
    f = zero_mean_antiderivative(1.0 / B - 1.0)
    return 2.0 * a.a(theta + f) / B ** 2 + 1.0 / B ** 2 - 1.0 - 2.0 * btt / B + bt ** 2 / B ** 2


@dataclass
class CircleSolveResult:
    theta: np.ndarray
    b: np.ndarray
    b0: float
    b1: float
    b2: float
    residual: float
    iterations: int
    beta: np.ndarray
    f: np.ndarray
    increments: list = field(default_factory=list)

    @property
    def intb(self) -> float:
        return float(abs(np.mean(self.b / (1.0 + self.b))) * 2 * np.pi)

    def rhs(self, h_target: np.ndarray) -> np.ndarray:
        c, s = np.cos(self.theta), np.sin(self.theta)
        return project_high(h_target) + self.b0 + self.b1 * c + self.b2 * s

    def modes(self, n_modes: int) -> tuple[np.ndarray, np.ndarray]:
        """Real Fourier coefficients (cos, sin) of b up to n_modes."""
        n = self.b.size
        bh = np.fft.rfft(self.b) / n
        K = n_modes
        bc = np.zeros(K + 1)
        bs = np.zeros(K + 1)
        m = min(K, bh.size - 1)
        bc[0] = bh[0].real
        bc[1:m + 1] = 2 * bh[1:m + 1].real
        bs[1:m + 1] = -2 * bh[1:m + 1].imag
        return bc, bs


def substitution_residual(res: CircleSolveResult, h_target: np.ndarray, a: ACoeffs,
                          dense: int = 4) -> float:
    """sup |display(b) - (Pi h + b0 + b1 cos + b2 sin)| on a ``dense``-times finer grid."""
    m = dense * res.b.size
    th = 2 * np.pi * np.arange(m) / m
    b = fourier_resample(res.b, m)
    h = fourier_resample(h_target, m)
    lhs = h_of_b(b, a, th)
    rhs = project_high(h) + res.b0 + res.b1 * np.cos(th) + res.b2 * np.sin(th)
    return float(np.max(np.abs(lhs - rhs)))


def solve_b_from_h(h_target: np.ndarray | Callable, a: ACoeffs | None = None,
                   tol: float = 1e-10, max_iter: int = 100, n: int = 64,
                   ball: float = 0.25) -> CircleSolveResult:
    """Fixed-point solve of the circle equation in the beta = b/(1+b) unknown.

    ``h_target`` is either samples on a uniform theta grid or a callable of theta.
    """
    a = ACoeffs() if a is None else a
    if callable(h_target):
        theta = 2 * np.pi * np.arange(n) / n
        h = np.asarray(h_target(theta), dtype=float) * np.ones(n)
    else:
        h = np.asarray(h_target, dtype=float)
        n = h.size
        theta = 2 * np.pi * np.arange(n) / n
    Ph = project_high(h)
    c, s = np.cos(theta), np.sin(theta)
    basis = np.stack([np.ones(n), c, s])
    k = _k(n)
    sym = 2.0 * k ** 2 - 2.0
    sing = np.abs(sym) < 1e-12
    inv = np.zeros(n)
    inv[~sing] = 1.0 / sym[~sing]

    beta = np.zeros(n)
    coeffs = np.zeros(3)
    incs = []
    for it in range(1, max_iter + 1):
        f = zero_mean_antiderivative(-beta)
        bt = spectral_derivative(beta, 1)
        one_m = 1.0 - beta
        R = -3.0 * beta ** 2 + beta ** 3 + 3.0 * bt ** 2 / one_m
        N = one_m * Ph - 2.0 * a.a(theta + f) * one_m ** 3 + R
        # modes 0, +-1 of (1-beta)(b0 + b1 c + b2 s) + N must vanish
        A = np.einsum("in,jn->ij", basis, one_m * basis) / n
        rhs0 = -np.einsum("in,n->i", basis, N) / n
        coeffs = np.linalg.solve(A, rhs0)
        F = N + one_m * (coeffs @ basis)
        new = np.real(np.fft.ifft(np.fft.fft(F) * inv))
        inc = float(np.max(np.abs(new - beta)))
        incs.append(inc)
        beta = new
        if np.max(np.abs(beta)) > ball:
            raise BallViolation(f"|beta| = {np.max(np.abs(beta)):.3e} left the ball {ball}")
        if inc <= tol * 1e-2 or (it > 1 and inc <= 1e-15):
            break
        if it > 3 and incs[-1] > incs[-2] > incs[-3]:
            raise NonContraction("fixed-point increments are growing")
    else:
        raise NonContraction(f"no convergence after {max_iter} sweeps (last increment {incs[-1]:.3e})")

    b = beta / (1.0 - beta)
    f = zero_mean_antiderivative(-beta)
    out = CircleSolveResult(theta, b, *map(float, coeffs), residual=np.inf, iterations=it,
                            beta=beta, f=f, increments=incs)
    out.residual = float(np.max(np.abs(h_of_b(b, a, theta) - out.rhs(h))))
    if out.residual > tol:
        raise NonContraction(f"substitution residual {out.residual:.3e} above tolerance {tol:.1e}")
    return out


def solve_profile(s_grid: np.ndarray, h_values: np.ndarray, a: ACoeffs | None = None,
                  n_modes: int = 8, **kw) -> tuple[BProfile, list[CircleSolveResult]]:
    """Slice-wise solves of h(theta, s_i) (rows of ``h_values``) packed into a BProfile."""
    results = [solve_b_from_h(row, a, **kw) for row in np.atleast_2d(h_values)]
    tabs = [r.modes(n_modes) for r in results]
    bc = np.stack([t[0] for t in tabs])
    bs = np.stack([t[1] for t in tabs])
    return BProfile(np.asarray(s_grid, dtype=float), bc, bs), results


# --------------------------------------------------------------------------
# hypothesis margins


def _hk_norm(u: np.ndarray, k: int) -> np.ndarray:
    """H^k(S^1) norm along the last axis (uniform grid)."""
    n = u.shape[-1]
    tot = np.zeros(u.shape[:-1])
    for j in range(k + 1):
        d = spectral_derivative(u, j) if j else u
        tot = tot + np.sum(d ** 2, axis=-1) * (2 * np.pi / n)
    return np.sqrt(tot)


def _z_family(s: np.ndarray, u: np.ndarray, order: int, s_deriv: Callable) -> list[np.ndarray]:
    """Z^I u for |I| <= order with Z in {d_theta, s d_s}."""
    out = [u]
    level = [u]
    for _ in range(order):
        nxt = []
        for v in level:
            nxt.append(spectral_derivative(v, 1))
            nxt.append(s[:, None] * s_deriv(v))
        out.extend(nxt)
        level = nxt
    return out


def _zmax(s, u, order, s_deriv, k):
    return np.max(np.stack([_hk_norm(v, k) for v in _z_family(s, u, order, s_deriv)]), axis=0)


def _cumint(s: np.ndarray, y: np.ndarray) -> np.ndarray:
    out = np.zeros_like(y)
    out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(s))
    return out


def check_hypotheses_H(s_grid: np.ndarray, b_values: np.ndarray, eps: float, rho: float,
                       sigma: float, N_d: int = 1) -> dict:
    """Max ratios of the finite-s checkable bounds on b to their rates.

    ``b_values[i, j] = b(theta_j, s_i)``; s-derivatives come from a cubic spline in s.
    The Z family is {d_theta, s d_s} up to order ``N_d`` for every Z^{N-k} family.
    The split d_s b = f1 + f2 is not constructed; the combined d_s b is measured
    against the more permissive of the two rates.
    """
    s = np.asarray(s_grid, dtype=float)
    b = np.asarray(b_values, dtype=float)
    if s.size < 4:
        raise ValueError("need at least four s samples")

    def s_deriv(v, m=1):
        return CubicSpline(s, v, axis=0)(s, m)

    e2, e4 = eps ** 2, eps ** 4
    one = 1.0 + s
    bs = s_deriv(b)
    bsss = s_deriv(b, 3)
    zb_h2 = _zmax(s, b, N_d, s_deriv, 2)
    zbs_h1 = _zmax(s, bs, N_d, s_deriv, 1)
    zbs_h2 = _zmax(s, bs, N_d, s_deriv, 2)
    zbsss_l2 = _zmax(s, bsss, N_d, s_deriv, 0)
    zf_l2 = _zmax(s, bs, N_d, s_deriv, 0)
    zf_h1 = zbs_h1
    dzf_h1 = _zmax(s, s_deriv(bs), N_d, s_deriv, 1)

    intb = np.abs(np.mean(b / (1 + b), axis=-1)) * 2 * np.pi
    rep = {
        "intb": float(intb.max()),
        "estb1": float(np.max(zb_h2 / (e2 / one ** 2))),
        "estb2": float(np.max(zb_h2 / e2)),
        "estb3": float(np.max(zbs_h1 / (e2 / one ** (2 - 0.5 * sigma)))),
        "estb4": float(np.max(zb_h2 / (e2 * one ** rho))),
        "estb5": float(np.max(_cumint(s, one * zbs_h2 ** 2) / (e4 * one ** (2 * rho)))),
        "estb5bis": float(np.max(_cumint(s, one ** (1 - 4 * rho) * zbs_h2 ** 2) / e4)),
        "estb5ter": float(np.max(_cumint(s, one ** (3 - sigma) * zbsss_l2 ** 2)
                                 / (e4 * one ** (2 * rho)))),
        "f_pointwise": float(np.max(zf_l2 / (e2 * np.maximum(one ** (0.5 * sigma - 2),
                                                             one ** (-1.5 + rho))))),
        "f_H1_integrated": float(np.max(_cumint(s, one ** 2 * zf_h1 ** 2) / (e4 * one ** (2 * rho)))),
        "ds_f_H1_integrated": float(np.max(_cumint(s, one ** 3 * dzf_h1 ** 2)
                                           / (e4 * one ** (2 * rho)))),
    }
    rep["max_ratio"] = max(v for k, v in rep.items() if k != "intb")
    return rep


def check_hypotheses_profile(b: BProfile, s_grid: np.ndarray, eps: float, rho: float,
                             sigma: float, N_d: int = 1, n_theta: int = 64) -> dict:
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    vals = np.stack([b.b(th, si) for si in s_grid])
    return check_hypotheses_H(s_grid, vals, eps, rho, sigma, N_d)
