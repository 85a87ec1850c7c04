"""Kernels shared by the flat solver and the coupled evolution."""
from __future__ import annotations

from typing import Callable

import numpy as np

from . import frame as fr
from .frame import GridSpec


def rk4(f: Callable[[np.ndarray, float], np.ndarray], y: np.ndarray, t: float,
        dt: float) -> np.ndarray:
    k1 = f(y, t)
    k2 = f(y + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = f(y + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = f(y + dt * k3, t + dt)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def wave_derivatives(u: np.ndarray, u_t: np.ndarray, grid: GridSpec,
                     outer: str = "extrapolate"):
    """Spatial jets needed by the reduced operator.

    Returns du[c] = (u_t, u_x, u_y), the spatial Hessian (uxx, uxy, uyy) and
    the spatial gradient of u_t.  Leading axes of ``u`` are batched.
    """
    (ux, uy), hess = fr.hessian(u, grid, outer)
    utx, uty = fr.gradient(u_t, grid, outer)
    return np.stack([u_t, ux, uy]), hess, (utx, uty)


class LostTimeFunction(ArithmeticError):
    pass


def reduced_wave_apply(ginv: np.ndarray, H: np.ndarray | None, du: np.ndarray, hess,
                       dut, src=0.0) -> np.ndarray:
    """Solve g^{ab} d_a d_b u - H^r d_r u = src for d_t^2 u.

    ``du``, ``hess`` and ``dut`` come from :func:`wave_derivatives`; ``du``
    may carry extra leading axes between the derivative index and the grid.
    """
    g00 = ginv[0, 0]
    if np.any(g00 >= 0):
        raise LostTimeFunction("g^{tt} >= 0: t is no longer a time function")
    uxx, uxy, uyy = hess
    utx, uty = dut
    rest = (2.0 * (ginv[0, 1] * utx + ginv[0, 2] * uty)
            + ginv[1, 1] * uxx + 2.0 * ginv[1, 2] * uxy + ginv[2, 2] * uyy)
    if H is not None:
        Hb = H.reshape(H.shape[:1] + (1,) * (du.ndim - H.ndim) + H.shape[1:])
        rest = rest - np.sum(Hb * du, axis=0)
    return (src - rest) / g00


def box_operator(ginv: np.ndarray, H: np.ndarray | None, u: np.ndarray, u_t: np.ndarray,
                 u_tt: np.ndarray, grid: GridSpec) -> np.ndarray:
    """g^{ab} d_a d_b u - H^r d_r u with a supplied second time derivative."""
    du, (uxx, uxy, uyy), (utx, uty) = wave_derivatives(u, u_t, grid)
    out = (ginv[0, 0] * u_tt + 2.0 * (ginv[0, 1] * utx + ginv[0, 2] * uty)
           + ginv[1, 1] * uxx + 2.0 * ginv[1, 2] * uxy + ginv[2, 2] * uyy)
    if H is not None:
        out = out - np.einsum("r...,r...->...", H, du)
    return out
