"""Polar grid, null frame, discrete operators and the Minkowski vector fields.

Fields live on a cell-centred polar grid with shape ``(..., n_theta, n_r)``;
leading axes carry tensor indices.  Radial derivatives are 4th-order centred
differences, angular derivatives are spectral.  The origin is handled by
parity folding: the ghost value at radius ``-r_j`` and angle ``theta`` is the
value at ``r_j`` and ``theta + pi``, which is exact for Cartesian-component
fields.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, NamedTuple

import numpy as np

NGHOST = 3


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    n_r: int
    n_theta: int
    r_max: float
    origin_treatment: str = "parity_fold"

    def __post_init__(self):
        if self.n_r < 8:
            raise GridError("n_r must be >= 8")
        nt = self.n_theta
        if nt < 8 or nt & (nt - 1):
            raise GridError("n_theta must be a power of two >= 8")
        if not self.r_max > 0:
            raise GridError("r_max must be positive")
        if self.origin_treatment != "parity_fold":
            raise GridError(f"unknown origin treatment {self.origin_treatment!r}")

    @property
    def dr(self) -> float:
        return self.r_max / self.n_r

    @property
    def dtheta(self) -> float:
        return 2.0 * np.pi / self.n_theta

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_theta, self.n_r)

    @cached_property
    def r1d(self) -> np.ndarray:
        return (np.arange(self.n_r) + 0.5) * self.dr

    @cached_property
    def theta1d(self) -> np.ndarray:
        return np.arange(self.n_theta) * self.dtheta

    @cached_property
    def r(self) -> np.ndarray:
        return np.broadcast_to(self.r1d[None, :], self.shape)

    @cached_property
    def theta(self) -> np.ndarray:
        return np.broadcast_to(self.theta1d[:, None], self.shape)

    @cached_property
    def cos(self) -> np.ndarray:
        return np.cos(self.theta)

    @cached_property
    def sin(self) -> np.ndarray:
        return np.sin(self.theta)

    @cached_property
    def x(self) -> np.ndarray:
        return self.r * self.cos

    @cached_property
    def y(self) -> np.ndarray:
        return self.r * self.sin

    @cached_property
    def area(self) -> np.ndarray:
        """Quadrature weights for the flat measure r dr dtheta."""
        return self.r * self.dr * self.dtheta

    @property
    def dt_max_unit(self) -> float:
        """min(dr, r dtheta) at the innermost ring."""
        return min(self.dr, self.r1d[0] * self.dtheta)

    def refine(self, factor: int = 2, angular: bool = False) -> "GridSpec":
        nt = self.n_theta * factor if angular else self.n_theta
        return GridSpec(self.n_r * factor, nt, self.r_max, self.origin_treatment)

    @cached_property
    def _wavenumbers(self) -> np.ndarray:
        return np.fft.rfftfreq(self.n_theta, 1.0 / self.n_theta)

    @cached_property
    def _ik(self) -> np.ndarray:
        k = 1j * self._wavenumbers.astype(complex)
        k[-1] = 0.0  # Nyquist mode has no real first derivative
        return k[:, None]

    @cached_property
    def _mk2(self) -> np.ndarray:
        return (-(self._wavenumbers ** 2))[:, None]

    def sample(self, fn: Callable[..., np.ndarray], t: float = 0.0) -> np.ndarray:
        """Evaluate ``fn(t, x, y)`` on the grid."""
        return np.asarray(fn(t, self.x, self.y), dtype=float) * np.ones(self.shape)


# --------------------------------------------------------------------------
# discrete operators


def pad_radial(u: np.ndarray, grid: GridSpec, outer: str = "extrapolate") -> np.ndarray:
    """Append NGHOST ghost cells on both radial ends.

    Inner ghosts come from the parity fold, outer ghosts from polynomial
    extrapolation (``"extrapolate"``) or zero (``"zero"``).
    """
    g = NGHOST
    half = grid.n_theta // 2
    inner = np.roll(u[..., :g], -half, axis=-2)[..., ::-1]
    if outer == "zero":
        out = np.zeros(u.shape[:-1] + (g,))
    else:
        # degree-4 extrapolation from the last five points
        c = np.array([[5.0, -10.0, 10.0, -5.0, 1.0],
                      [15.0, -40.0, 45.0, -24.0, 5.0],
                      [35.0, -105.0, 126.0, -70.0, 15.0]])
        last = u[..., -1:-6:-1]
        out = np.einsum("gk,...k->...g", c, last)
    return np.concatenate([inner, u, out], axis=-1)


def d_r(u: np.ndarray, grid: GridSpec, outer: str = "extrapolate") -> np.ndarray:
    p = pad_radial(u, grid, outer)
    n, g = grid.n_r, NGHOST
    s = lambda k: p[..., g + k: g + k + n]
    return (s(-2) - 8.0 * s(-1) + 8.0 * s(1) - s(2)) / (12.0 * grid.dr)


def d_rr(u: np.ndarray, grid: GridSpec, outer: str = "extrapolate") -> np.ndarray:
    p = pad_radial(u, grid, outer)
    n, g = grid.n_r, NGHOST
    s = lambda k: p[..., g + k: g + k + n]
    return (-s(-2) + 16.0 * s(-1) - 30.0 * u + 16.0 * s(1) - s(2)) / (12.0 * grid.dr ** 2)


def d_r_both(u: np.ndarray, grid: GridSpec, outer: str = "extrapolate"):
    p = pad_radial(u, grid, outer)
    n, g = grid.n_r, NGHOST
    m2, m1 = p[..., g - 2: g - 2 + n], p[..., g - 1: g - 1 + n]
    p1, p2 = p[..., g + 1: g + 1 + n], p[..., g + 2: g + 2 + n]
    ur = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * grid.dr)
    urr = (-m2 + 16.0 * m1 - 30.0 * u + 16.0 * p1 - p2) / (12.0 * grid.dr ** 2)
    return ur, urr


def ko_dissipation(u: np.ndarray, grid: GridSpec) -> np.ndarray:
    """6th-order Kreiss-Oliger operator, scaled so the caller multiplies by sigma."""
    p = pad_radial(u, grid, "zero")
    n, g = grid.n_r, NGHOST
    s = lambda k: p[..., g + k: g + k + n]
    d6 = s(-3) - 6 * s(-2) + 15 * s(-1) - 20 * u + 15 * s(1) - 6 * s(2) + s(3)
    return d6 / (64.0 * grid.dr)


def d_th(u: np.ndarray, grid: GridSpec) -> np.ndarray:
    return np.fft.irfft(np.fft.rfft(u, axis=-2) * grid._ik, n=grid.n_theta, axis=-2)


def d_thth(u: np.ndarray, grid: GridSpec) -> np.ndarray:
    return np.fft.irfft(np.fft.rfft(u, axis=-2) * grid._mk2, n=grid.n_theta, axis=-2)


def d_th_both(u: np.ndarray, grid: GridSpec):
    uh = np.fft.rfft(u, axis=-2)
    n = grid.n_theta
    return (np.fft.irfft(uh * grid._ik, n=n, axis=-2),
            np.fft.irfft(uh * grid._mk2, n=n, axis=-2))


def gradient(u: np.ndarray, grid: GridSpec, outer: str = "extrapolate"):
    """Cartesian (d_x u, d_y u)."""
    ur = d_r(u, grid, outer)
    ut = d_th(u, grid)
    c, s, r = grid.cos, grid.sin, grid.r
    return c * ur - s * ut / r, s * ur + c * ut / r


def hessian(u: np.ndarray, grid: GridSpec, outer: str = "extrapolate"):
    """First and second Cartesian derivatives ((ux, uy), (uxx, uxy, uyy))."""
    ur, urr = d_r_both(u, grid, outer)
    ut, utt = d_th_both(u, grid)
    urt = d_th(ur, grid)
    c, s, r = grid.cos, grid.sin, grid.r
    cc, ss, cs = c * c, s * s, c * s
    ir, ir2 = 1.0 / r, 1.0 / r ** 2
    ux = c * ur - s * ut * ir
    uy = s * ur + c * ut * ir
    uxx = cc * urr + ss * ur * ir + ss * utt * ir2 - 2 * cs * urt * ir + 2 * cs * ut * ir2
    uyy = ss * urr + cc * ur * ir + cc * utt * ir2 + 2 * cs * urt * ir - 2 * cs * ut * ir2
    uxy = (cs * urr - cs * ur * ir - cs * utt * ir2
           + (cc - ss) * urt * ir - (cc - ss) * ut * ir2)
    return (ux, uy), (uxx, uxy, uyy)


def laplacian(u: np.ndarray, grid: GridSpec, outer: str = "extrapolate") -> np.ndarray:
    ur, urr = d_r_both(u, grid, outer)
    return urr + ur / grid.r + d_thth(u, grid) / grid.r ** 2


def integrate(u: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Flat-measure integral over the disc (midpoint in r, trapezoid in theta).

    The midpoint rule for r*u(r) carries an O(dr^2) error proportional to
    u(0); it is removed with the leading Euler-Maclaurin endpoint correction.
    """
    u0 = (9.0 * u[..., 0] - u[..., 1]) / 8.0
    corr = grid.dr ** 2 / 24.0 * grid.dtheta * np.sum(u0, axis=-1)
    return np.sum(u * grid.area, axis=(-2, -1)) - corr


def value_at_origin(u: np.ndarray) -> np.ndarray:
    """Angular mean extrapolated to r = 0 using evenness in r."""
    return np.mean((9.0 * u[..., 0] - u[..., 1]) / 8.0, axis=-1)


# --------------------------------------------------------------------------
# null coordinates and frame


def to_null_coords(t, x):
    """(s, q, theta) for time ``t`` and 2-vector ``x``; theta = 0 at r = 0."""
    x = np.asarray(x, dtype=float)
    r = np.hypot(x[0], x[1])
    th = np.where(r > 0, np.arctan2(x[1], x[0]), 0.0)
    return t + r, r - t, th


class NullFrameComponents(NamedTuple):
    g_LL: np.ndarray
    g_LLbar: np.ndarray
    g_LU: np.ndarray
    g_LbarLbar: np.ndarray
    g_LbarU: np.ndarray
    g_UU: np.ndarray


def frame_vectors(theta) -> dict[str, np.ndarray]:
    """Contravariant (t, x, y) components of L, Lbar and U."""
    c, s = np.cos(theta), np.sin(theta)
    one, zero = np.ones_like(c), np.zeros_like(c)
    return {
        "L": np.stack([one, c, s]),
        "Lbar": np.stack([one, -c, -s]),
        "U": np.stack([zero, -s, c]),
    }


def contract(g: np.ndarray, v: np.ndarray, w: np.ndarray) -> np.ndarray:
    return np.einsum("ab...,a...,b...->...", g, v, w)


def frame_decompose(metric: np.ndarray, point, min_r: float = 0.0) -> NullFrameComponents:
    """Null-frame components of a (3, 3, ...) metric at ``point = (t, x1, x2)``."""
    metric = np.asarray(metric, dtype=float)
    _, x1, x2 = point
    r = np.hypot(x1, x2)
    if np.any(r <= min_r) or np.any(r == 0):
        raise GridError("frame is undefined at the origin")
    th = np.arctan2(x2, x1)
    f = frame_vectors(th)
    L, Lb, U = f["L"], f["Lbar"], f["U"]
    return NullFrameComponents(
        contract(metric, L, L), contract(metric, L, Lb), contract(metric, L, U),
        contract(metric, Lb, Lb), contract(metric, Lb, U), contract(metric, U, U))


def frame_reconstruct(comp: NullFrameComponents, theta) -> np.ndarray:
    """Inverse of frame_decompose: rebuild Cartesian components."""
    c, s = np.cos(theta), np.sin(theta)
    half = 0.5 * np.ones_like(c)
    # dual covectors: (dt + dr)/2, (dt - dr)/2, r dtheta
    co = {"L": np.stack([half, 0.5 * c, 0.5 * s]),
          "Lbar": np.stack([half, -0.5 * c, -0.5 * s]),
          "U": np.stack([0.0 * c, -s, c])}
    pairs = [("L", "L", comp.g_LL), ("L", "Lbar", comp.g_LLbar), ("L", "U", comp.g_LU),
             ("Lbar", "Lbar", comp.g_LbarLbar), ("Lbar", "U", comp.g_LbarU),
             ("U", "U", comp.g_UU)]
    out = 0.0
    for a, b, v in pairs:
        term = np.einsum("a...,b...->ab...", co[a], co[b]) * v
        if a != b:
            term = term + np.einsum("a...,b...->ab...", co[b], co[a]) * v
        out = out + term
    return out


# --------------------------------------------------------------------------
# Minkowski vector fields


class VectorFieldId(enum.Enum):
    DT = "dt"
    D1 = "d1"
    D2 = "d2"
    OMEGA01 = "omega01"
    OMEGA02 = "omega02"
    OMEGA12 = "omega12"
    S = "S"

    @property
    def needs_time_derivative(self) -> bool:
        return self in (VectorFieldId.DT, VectorFieldId.OMEGA01,
                        VectorFieldId.OMEGA02, VectorFieldId.S)

    @property
    def conformal_factor(self) -> float:
        """C(Z) in [box, Z] = C(Z) box."""
        return 2.0 if self is VectorFieldId.S else 0.0


ALL_Z = tuple(VectorFieldId)


class MissingTimeDerivative(ValueError):
    pass


def apply_Z(u: np.ndarray, Z: VectorFieldId, t: float, grid: GridSpec,
            u_t: np.ndarray | None = None, outer: str = "extrapolate") -> np.ndarray:
    """Apply a Minkowski vector field; ``u_t`` supplies the time derivative.

    Omega_ab = -x_a d_b + x_b d_a with x_0 = -t, so Omega_0i = t d_i + x_i d_t
    and Omega_12 = x_2 d_1 - x_1 d_2 = -d_theta.
    """
    Z = VectorFieldId(Z)
    if Z.needs_time_derivative and u_t is None:
        raise MissingTimeDerivative(f"{Z.name} requires the time derivative field")
    if Z is VectorFieldId.DT:
        return np.array(u_t, dtype=float)
    if Z is VectorFieldId.OMEGA12:
        return -d_th(u, grid)
    if Z is VectorFieldId.S:
        return t * u_t + grid.r * d_r(u, grid, outer)
    ux, uy = gradient(u, grid, outer)
    if Z is VectorFieldId.D1:
        return ux
    if Z is VectorFieldId.D2:
        return uy
    if Z is VectorFieldId.OMEGA01:
        return t * ux + grid.x * u_t
    return t * uy + grid.y * u_t


def _commutator_with_dt(u_t: np.ndarray, u_tt: np.ndarray, Z: VectorFieldId,
                        grid: GridSpec, outer: str) -> np.ndarray:
    """[d_t, Z] applied to u_t: S -> d_t, Omega_0i -> d_i, others 0."""
    if Z is VectorFieldId.S:
        return u_tt
    if Z is VectorFieldId.OMEGA01:
        return gradient(u_t, grid, outer)[0]
    if Z is VectorFieldId.OMEGA02:
        return gradient(u_t, grid, outer)[1]
    return np.zeros_like(u_t)


class PolyGaussian:
    """u = P(t) exp(-|x - x0|^2 / w^2) with cubic P; analytic time derivatives."""

    def __init__(self, coeffs=(1.0, 0.3, -0.2, 0.05), center=(0.7, -0.4), width=1.2):
        self.c = np.asarray(coeffs, dtype=float)
        self.x0 = center
        self.w = width

    def time_derivatives(self, t, x, y, order: int = 3) -> list[np.ndarray]:
        g = np.exp(-((x - self.x0[0]) ** 2 + (y - self.x0[1]) ** 2) / self.w ** 2)
        p = np.polynomial.Polynomial(self.c)
        return [p.deriv(k)(t) * g for k in range(order + 1)]


def commutator_defect(Z: VectorFieldId, test_field, grid: GridSpec, t: float = 0.5,
                      interior: float = 0.6) -> float:
    """max |box(Z u) - Z(box u) - C(Z) box u| over r < interior * r_max.

    ``test_field.time_derivatives(t, x, y)`` returns u, u_t, u_tt, u_ttt.
    """
    Z = VectorFieldId(Z)
    u, u_t, u_tt, u_ttt = test_field.time_derivatives(t, grid.x, grid.y)
    out = "extrapolate"
    box = -u_tt + laplacian(u, grid, out)
    box_t = -u_ttt + laplacian(u_t, grid, out)
    Zu = apply_Z(u, Z, t, grid, u_t)
    Zu_tt = apply_Z(u_tt, Z, t, grid, u_ttt) + 2.0 * _commutator_with_dt(u_t, u_tt, Z, grid, out)
    box_Zu = -Zu_tt + laplacian(Zu, grid, out)
    Z_box = apply_Z(box, Z, t, grid, box_t)
    defect = box_Zu - Z_box - Z.conformal_factor * box
    mask = grid.r < interior * grid.r_max
    return float(np.max(np.abs(defect[mask])))
