"""Property suites and acceptance checks, shared by the CLI and the test-suite.

Each check returns a :class:`CheckResult` carrying the measured quantities, the
threshold it was compared against and a pass flag.  Run-based checks take the
monitor rows (and history) of an evolution so that one run can feed several
criteria.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import background as bg
from . import bsolve as bs
from . import diagnostics as dg
from . import evolve as ev
from . import flatwave as fw
from . import frame as fr
from . import gauge as gg
from . import tensor as tn
from .frame import ALL_Z, GridSpec, PolyGaussian, VectorFieldId


@dataclass
class CheckResult:
    key: str
    name: str
    passed: bool
    values: dict = field(default_factory=dict)
    threshold: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        vals = ", ".join(f"{k}={_fmt(v)}" for k, v in self.values.items())
        return f"{tag} [{self.key}] {self.name}: {vals} (need {self.threshold}; {self.seconds:.1f}s)"

    def to_dict(self) -> dict:
        return {"key": self.key, "name": self.name, "passed": bool(self.passed),
                "values": {k: _plain(v) for k, v in self.values.items()},
                "threshold": self.threshold, "seconds": round(self.seconds, 3)}


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.4g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def _plain(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_plain(x) for x in v]
    return v


def _orders(errs: Sequence[float], factor: float = 2.0) -> list[float]:
    e = np.asarray(errs, dtype=float)
    return [float(x) for x in np.log(e[:-1] / e[1:]) / math.log(factor)]


def _timed(fn):
    def wrapper(*a, **kw):
        t0 = time.perf_counter()
        res = fn(*a, **kw)
        res.seconds = time.perf_counter() - t0
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# --------------------------------------------------------------------------
# flat decay


@_timed
def check_flat_decay(n_r: int = 512, n_theta: int = 32, r_max: float = 128.0,
                     T: float = 100.0, window=(10.0, 100.0), tol: float = 0.1) -> CheckResult:
    """|phi(t, 0)| for compactly concentrated radial velocity data."""
    grid = GridSpec(n_r, n_theta, r_max)
    phi1 = np.exp(-grid.r ** 2)
    traj = fw.solve_flat_wave(np.zeros(grid.shape), phi1, grid, T, record_every=0.5,
                              keep_fields=False)
    t = np.array(traj.times)
    fit = dg.fit_decay(t, np.abs(traj.origin), window)
    ok = abs(fit.exponent + 1.0) <= tol
    return CheckResult("1", "flat decay at the origin", ok,
                       {"exponent": fit.exponent, "stderr": fit.stderr, "samples": fit.n},
                       f"-1.0 +- {tol}")


# --------------------------------------------------------------------------
# background curvature


@_timed
def check_ricci_flat(resolutions=(256, 512, 1024), n_theta: int = 32, r_max: float = 20.0,
                     a=(1e-2, 5e-3, 5e-3), band=(2.0, 18.0), min_order: float = 1.8) -> CheckResult:
    """Convergence of max |Ric(g_a)| to zero under radial refinement."""
    ac = bg.ACoeffs(*a)
    b = bg.BProfile.zero()
    errs = []
    for n in resolutions:
        grid = GridSpec(n, n_theta, r_max)
        R = bg.ricci(bg.background_metric_fn(grid, ac, b, None), 0.0, grid)
        m = (grid.r > band[0]) & (grid.r < band[1])
        errs.append(float(np.abs(R[:, :, m]).max()))
    orders = _orders(errs)
    return CheckResult("2", "Ricci-flat exterior metric", min(orders) >= min_order,
                       {"max_ricci": errs, "orders": orders}, f"order >= {min_order}")


def _localized_b(amp: float = 1e-4, n: int = 64) -> bg.BProfile:
    th = 2 * np.pi * np.arange(n) / n
    return bg.BProfile.from_shape([0.0], amp * (np.cos(2 * th) + 0.5 * np.sin(3 * th)), 6)


@_timed
def check_localized_curvature(n_r: int = 480, n_theta: int = 32, r_max: float = 12.0,
                              R: float = 2.0, t: float = 4.0, amp: float = 1e-4,
                              ratio_max: float = 1e-2, rel_max: float = 0.2,
                              coefficient: float = 4.0) -> CheckResult:
    """Curvature of g_b confined to the cutoff band, and its Lbar-Lbar size there.

    ``coefficient`` multiplies d_q^2(q chi) h / r in the compared prediction.
    """
    grid = GridSpec(n_r, n_theta, r_max)
    a = bg.ACoeffs(1e-2, 5e-3, 5e-3)
    b = _localized_b(amp)
    cut = bg.CutoffSpec(R)
    Ric = bg.ricci(bg.background_metric_fn(grid, a, b, cut), t, grid)
    q = grid.r - t
    comp = bg.frame_components(Ric, grid)
    pred = coefficient * cut.d2q_qchi(q) * bg.h_of(b, a, grid.theta, 2 * t) / grid.r
    lo, hi = R + 0.5, R + 1.0
    inside = (q >= lo) & (q <= hi)
    edge = 4 * grid.dr
    outside = ((q < lo - edge) | (q > hi + edge)) & (grid.r < r_max - 1.0)
    Rn = np.abs(Ric).max(axis=(0, 1))
    ratio = float(Rn[outside].max() / Rn[inside].max())
    rel = float(np.abs(comp.g_LbarLbar - pred)[inside].max() / np.abs(pred[inside]).max())
    ok = ratio <= ratio_max and rel <= rel_max
    return CheckResult("3", "localized background curvature", ok,
                       {"outside_over_inside": ratio, "LbarLbar_relerr": rel,
                        "coefficient": coefficient},
                       f"ratio <= {ratio_max} and relerr <= {rel_max}")


# --------------------------------------------------------------------------
# gauge identity


def random_metric(rng: np.random.Generator, n_bumps: int = 3, amp: float = 0.08) -> Callable:
    """Smooth time-dependent Lorentzian perturbation of Minkowski built from Gaussian bumps."""
    centers = rng.uniform(-2.0, 2.0, (6, n_bumps, 2))
    widths = rng.uniform(0.8, 1.6, (6, n_bumps))
    amps = rng.uniform(-amp, amp, (6, n_bumps))
    rates = rng.uniform(-0.5, 0.5, (6, n_bumps))

    def metric(t, grid):
        g = tn.minkowski(grid.shape)
        for c, (i, j) in enumerate(tn.SYM_INDEX):
            e = 0.0
            for k in range(n_bumps):
                d2 = (grid.x - centers[c, k, 0]) ** 2 + (grid.y - centers[c, k, 1]) ** 2
                e = e + amps[c, k] * (1 + rates[c, k] * t) * np.exp(-d2 / widths[c, k] ** 2)
            g[i, j] += e
            if i != j:
                g[j, i] += e
        return g
    return metric


@_timed
def check_gauge_identity(n_metrics: int = 5, seed: int = 7, resolutions=(64, 128, 256),
                         n_theta: int = 64, r_max: float = 8.0, t: float = 0.3,
                         min_order: float = 2.0) -> CheckResult:
    """Divergence form of H versus its Christoffel contraction on random metrics."""
    rng = np.random.default_rng(seed)
    worst = np.inf
    all_orders = []
    for _ in range(n_metrics):
        metric = random_metric(rng)
        errs = []
        for n in resolutions:
            grid = GridSpec(n, n_theta, r_max)
            jet = bg.metric_jet(lambda s: metric(s, grid), t, grid)
            Hc = gg.christoffel_H(jet)
            Hd = gg.wave_gauge_H_divergence(jet.g, jet.dg[0], grid)
            m = grid.r < 0.65 * r_max
            errs.append(float(np.abs(Hc - Hd)[:, m].max()))
        o = _orders(errs)
        all_orders.append(o)
        worst = min(worst, min(o))
    return CheckResult("4", "gauge divergence identity", worst >= min_order,
                       {"min_order": worst, "orders": [round(min(o), 3) for o in all_orders]},
                       f"order >= {min_order}")


# --------------------------------------------------------------------------
# commutators


EXACT_Z = (VectorFieldId.DT, VectorFieldId.OMEGA12)


@_timed
def check_commutators(resolutions=(80, 160, 320), n_theta: int = 32, r_max: float = 10.0,
                      min_order: float = 1.9, exact_tol: float = 1e-9) -> CheckResult:
    """[box, Z] - C(Z) box on a polynomial-Gaussian test field for all seven Z.

    Z that act exactly on the grid must commute to round-off; the others must
    converge at the order of the radial stencils on the Laplacian's 1/r terms.
    """
    f = PolyGaussian()
    res = {}
    ok = True
    for Z in ALL_Z:
        d = [fr.commutator_defect(Z, f, GridSpec(n, n_theta, r_max)) for n in resolutions]
        if Z in EXACT_Z:
            res[Z.name] = d[-1]
            ok &= d[-1] <= exact_tol
        else:
            o = min(_orders(d))
            res[Z.name] = o
            ok &= o >= min_order
    # C(S) = 2 is the only constant consistent with a vanishing defect
    grid = GridSpec(resolutions[-1], n_theta, r_max)
    u, u_t, u_tt, u_ttt = f.time_derivatives(0.5, grid.x, grid.y)
    box = -u_tt + fr.laplacian(u, grid)
    m = grid.r < 0.6 * r_max
    d_S = fr.commutator_defect(VectorFieldId.S, f, grid)
    c_s = VectorFieldId.S.conformal_factor
    alt = float(np.max(np.abs(c_s * box[m])))
    ok &= c_s == 2.0 and d_S < 1e-3 * alt
    res["C(S)"] = c_s
    res["S_defect_with_C0"] = alt
    return CheckResult("5", "Minkowski commutators", bool(ok), res,
                       f"exact Z <= {exact_tol}, others order >= {min_order}, C(S)=2")


# --------------------------------------------------------------------------
# Minkowski fixed point


@_timed
def check_minkowski_fixed_point(T: float = 100.0, n_r: int = 128, n_theta: int = 8,
                                r_max: float = 64.0, bound: float = 1e-12,
                                gauge_mode: str = "constructed") -> CheckResult:
    """Zero scalar data: every evolved field must stay at zero."""
    cfg = ev.RunConfig(eps=0.0, data="zero", n_r=n_r, n_theta=n_theta, r_max=r_max,
                       T_final=T, output_every=5.0, gauge_mode=gauge_mode)
    worst = {"phi": 0.0, "g_tilde": 0.0, "k": 0.0}

    def mon(evo, st):
        worst["phi"] = max(worst["phi"], float(np.abs(st.Y[ev.PHI]).max()),
                           float(np.abs(st.Y[ev.PI]).max()))
        worst["g_tilde"] = max(worst["g_tilde"], float(np.abs(st.Y[ev.GT]).max()),
                               float(np.abs(st.Y[ev.GTT]).max()))
        worst["k"] = max(worst["k"], float(np.abs(st.Y[ev.K]).max()),
                         float(np.abs(st.Y[ev.KT]).max()))
        return {"t": st.t}

    res = ev.run(cfg, monitor=mon)
    ok = max(worst.values()) <= bound
    vals = dict(worst, t_final=res.state.t)
    return CheckResult("6", "Minkowski fixed point", ok, vals, f"all sup norms <= {bound}")


# --------------------------------------------------------------------------
# run-based criteria


def _series(rows: Sequence[dict], key: str):
    t = np.array([r["t"] for r in rows], dtype=float)
    v = np.array([r[key] for r in rows], dtype=float)
    return t, v


def _value_at(rows, key, t_star):
    t, v = _series(rows, key)
    return float(v[np.argmin(np.abs(t - t_star))])


def check_gauge_mechanism(plain_rows, constructed_rows, window=(5.0, 50.0),
                          plain_min: float = 0.35, constructed_max: float = 0.15) -> CheckResult:
    """Growth exponent of ||d g~_{LbarLbar}|| in the two gauge modes."""
    fp = dg.fit_decay(*_series(plain_rows, "dLbLb_l2"), window)
    fc = dg.fit_decay(*_series(constructed_rows, "dLbLb_l2"), window)
    ok = fp.exponent >= plain_min and fc.exponent <= constructed_max
    return CheckResult("7", "gauge mechanism growth exponents", ok,
                       {"plain_exponent": fp.exponent, "plain_pass": fp.exponent >= plain_min,
                        "constructed_exponent": fc.exponent,
                        "constructed_pass": fc.exponent <= constructed_max,
                        "plain_final": _value_at(plain_rows, "dLbLb_l2", window[1]),
                        "constructed_final": _value_at(constructed_rows, "dLbLb_l2", window[1])},
                       f"plain >= {plain_min}, constructed <= {constructed_max}")


def check_delta_h(rows, window=(5.0, 50.0), max_exponent: float = -0.4) -> CheckResult:
    """Decay of the angular-moment mismatch Delta_h."""
    t, v = _series(rows, "delta_h")
    fit = dg.fit_decay(t, v, window)
    return CheckResult("8", "Delta_h decay", fit.exponent <= max_exponent,
                       {"exponent": fit.exponent, "stderr": fit.stderr,
                        "at_5": _value_at(rows, "delta_h", window[0]),
                        "at_50": _value_at(rows, "delta_h", window[1])},
                       f"exponent <= {max_exponent}")


def check_propagation(rows, t_early: float = 1.0, t_late: float = 50.0,
                      factor: float = 10.0) -> CheckResult:
    """Gauge and constraint residual sup norms at t_late against t_early."""
    vals = {}
    ok = True
    for key in ("gauge_sup", "ham_sup", "mom_sup"):
        e, l = _value_at(rows, key, t_early), _value_at(rows, key, t_late)
        growth = l / e if e > 0 else (0.0 if l == 0 else np.inf)
        vals[key + "_growth"] = growth
        ok &= growth <= factor
    return CheckResult("9", "gauge and constraint propagation", ok, vals, f"growth <= {factor}")


def check_cone(history, evo, tol: float = 1e-6) -> CheckResult:
    """Eikonal level of the scalar support along the run."""
    rep = dg.eikonal_cone_check(history, evo, tol=tol)
    cfg = evo.config
    bound = cfg.R + 0.5 + 2 * cfg.eps * cfg.R
    return CheckResult("10", "cone confinement", rep.max_level <= bound,
                       {"max_level": rep.max_level, "bound": bound, "support_tol": tol},
                       "max level <= R + 1/2 + 2 eps R")


# --------------------------------------------------------------------------
# b solver


@_timed
def check_bsolver(delta: float = 1e-4, modes=(2, 3), res_tol: float = 1e-10,
                  intb_tol: float = 1e-12, rel_tol: float = 1e-6) -> CheckResult:
    """Substitution residual, the integral constraint and linear response of the circle solver."""
    a = bg.ACoeffs(1e-3, 2e-4, -1e-4)
    rng = np.random.default_rng(3)
    n = 64
    th = 2 * np.pi * np.arange(n) / n
    h = 1e-3 * sum(rng.normal() * np.cos(k * th) + rng.normal() * np.sin(k * th)
                   for k in range(2, 7)) + 2e-3 + 1e-4 * np.cos(th)
    res = bs.solve_b_from_h(h, a)
    resid = bs.substitution_residual(res, h, a)
    vals = {"substitution_residual": resid, "intb": res.intb}
    ok = resid <= res_tol and res.intb <= intb_tol
    for k in modes:
        rk = bs.solve_b_from_h(lambda t: delta * np.cos(k * t), bg.ACoeffs(), n=n)
        expected = delta / (2.0 * (k * k - 1.0))
        rel = abs(rk.modes(k + 1)[0][k] / expected - 1.0)
        vals[f"linear_k{k}_relerr"] = rel
        ok &= rel <= rel_tol
    return CheckResult("11", "b solver", bool(ok), vals,
                       f"residual <= {res_tol}, intb <= {intb_tol}, response relerr <= {rel_tol}")


# --------------------------------------------------------------------------
# toolbox margins


def _ks_case(rng):
    coeffs = rng.uniform(-1, 1, 4)
    coeffs[0] = 1.0
    field_ = PolyGaussian(tuple(coeffs), tuple(rng.uniform(-1.5, 1.5, 2)), rng.uniform(0.8, 1.5))
    t = rng.uniform(0.0, 2.0)
    w = dg.WeightSpec()

    def margin(grid, scale):
        f, f_t, f_tt, _ = field_.time_derivatives(t, grid.x, grid.y)
        return fw.klainerman_sobolev_margin(scale * f, scale * f_t, scale * f_tt, t, grid, w)
    return margin


def _hardy_case(rng):
    c = rng.uniform(-1.5, 1.5, 2)
    wdt = rng.uniform(0.8, 1.5)
    t = rng.uniform(0.0, 3.0)
    alpha, beta = rng.uniform(-0.5, 0.9), rng.uniform(1.1, 2.0)

    def margin(grid, scale):
        f = scale * np.exp(-((grid.x - c[0]) ** 2 + (grid.y - c[1]) ** 2) / wdt ** 2)
        return fw.hardy_margin(f, grid, t, alpha, beta)
    return margin


def _linf_case(rng, T: float = 5.0):
    c = rng.uniform(-1.0, 1.0, 2)
    wdt = rng.uniform(0.7, 1.2)
    t0, tw = rng.uniform(0.5, 1.5), rng.uniform(0.3, 0.6)
    mu, nu = rng.uniform(1.6, 2.5), rng.uniform(1.1, 2.0)

    def margin(grid, scale):
        bump = np.exp(-((grid.x - c[0]) ** 2 + (grid.y - c[1]) ** 2) / wdt ** 2)
        F = lambda s: scale * math.exp(-((s - t0) / tw) ** 2) * bump
        z = np.zeros(grid.shape)
        traj = fw.solve_flat_wave(z, z, grid, T, source=F, record_every=0.25)
        return fw.inhom_bound_check(F, mu, nu, traj)
    return margin


@_timed
def check_toolbox(n_cases: int = 20, seed: int = 11, n_r: int = 64, n_theta: int = 16,
                  r_max: float = 14.0, drift_max: float = 0.05,
                  scale_tol: float = 1e-10) -> CheckResult:
    """Klainerman-Sobolev, Hardy and L-infinity margins on randomized cases.

    Cases cycle through the three inequalities.  Each margin must be finite,
    unchanged under amplitude scaling and stable under one radial refinement.
    """
    rng = np.random.default_rng(seed)
    makers = (("ks", _ks_case), ("hardy", _hardy_case), ("linf", _linf_case))
    coarse = GridSpec(n_r, n_theta, r_max)
    fine = coarse.refine(2)
    drift = {k: 0.0 for k, _ in makers}
    scale_err = {k: 0.0 for k, _ in makers}
    finite = True
    for i in range(n_cases):
        kind, make = makers[i % 3]
        m = make(rng)
        m1, m2 = m(coarse, 1.0), m(fine, 1.0)
        ms = [m(coarse, s) for s in (1e-3, 1e3)]
        finite &= all(np.isfinite(x) and x > 0 for x in [m1, m2] + ms)
        drift[kind] = max(drift[kind], abs(m2 / m1 - 1.0))
        scale_err[kind] = max(scale_err[kind], *(abs(x / m1 - 1.0) for x in ms))
    ok = finite and max(drift.values()) < drift_max and max(scale_err.values()) <= scale_tol
    vals = {f"drift_{k}": v for k, v in drift.items()}
    vals.update({f"scale_{k}": v for k, v in scale_err.items()})
    vals["finite"] = bool(finite)
    return CheckResult("12", "toolbox margins", bool(ok), vals,
                       f"finite, scale error <= {scale_tol}, drift < {drift_max}")


SUITES = {
    "ricci": (check_ricci_flat, check_localized_curvature),
    "gauge": (check_gauge_identity,),
    "commutators": (check_commutators,),
    "toolbox": (check_toolbox,),
    "bsolve": (check_bsolver,),
}


def run_suite(name: str) -> list[CheckResult]:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return [fn() for fn in SUITES[name]]
