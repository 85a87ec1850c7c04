"""Command-line entry point: evolve, verify, fit, solve-b, extract-h.

Every command that writes files also writes ``manifest.json`` listing the
configuration, code version and a sha256 checksum per output file.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import os
import platform
import sys
from importlib import metadata
from pathlib import Path

import numpy as np
import yaml

from . import background as bg
from . import bsolve as bs
from . import checks
from . import diagnostics as dg
from . import evolve as ev

CONFIG_EXTRAS = {"snapshot_every": None}


class ConfigFileError(ValueError):
    """Configuration problem located at a file line and field."""


# --------------------------------------------------------------------------
# configuration


def _key_lines(text: str) -> dict:
    node = yaml.compose(text)
    if node is None:
        return {}
    if not isinstance(node, yaml.MappingNode):
        raise ConfigFileError("line 1: configuration must be a mapping of field: value")
    return {k.value: k.start_mark.line + 1 for k, _ in node.value}


def load_config(path: str | os.PathLike, overrides: dict | None = None):
    """Parse a YAML run configuration; returns (RunConfig, extras, raw mapping)."""
    text = Path(path).read_text()
    try:
        lines = _key_lines(text)
        raw = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigFileError(f"{path}: YAML syntax error: {exc}") from None
    names = {f.name for f in dataclasses.fields(ev.RunConfig)}
    for key in raw:
        if key not in names and key not in CONFIG_EXTRAS:
            raise ConfigFileError(f"{path}:{lines.get(key, '?')}: unknown field '{key}'")
    extras = {k: raw.get(k, v) for k, v in CONFIG_EXTRAS.items()}
    params = {k: v for k, v in raw.items() if k in names}
    params.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        cfg = ev.RunConfig(**params)
    except ev.ConfigError as exc:
        msg = str(exc)
        where = [f"{k} (line {lines[k]})" for k in sorted(lines) if k in names and k in msg]
        loc = "; fields: " + ", ".join(where) if where else ""
        raise ConfigFileError(f"{path}: {msg}{loc}") from None
    except TypeError as exc:
        raise ConfigFileError(f"{path}: {exc}") from None
    return cfg, extras, raw


# --------------------------------------------------------------------------
# manifest


def code_version() -> str:
    try:
        ver = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        ver = "unknown"
    h = hashlib.sha256()
    for p in sorted(Path(__file__).parent.glob("*.py")):
        h.update(p.name.encode())
        h.update(p.read_bytes())
    return f"{ver}+src.{h.hexdigest()[:12]}"


def sha256_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclasses.dataclass
class RunManifest:
    command: str
    config: dict
    code_version: str
    grid: dict
    outputs: dict = dataclasses.field(default_factory=dict)
    environment: dict = dataclasses.field(default_factory=dict)

    def add(self, path: Path):
        self.outputs[Path(path).name] = sha256_file(path)

    def write(self, out_dir: Path) -> Path:
        p = Path(out_dir) / "manifest.json"
        p.write_text(json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True) + "\n")
        return p


def _manifest(command: str, cfg: dict, grid: dict | None = None) -> RunManifest:
    env = {"python": platform.python_version(), "numpy": np.__version__}
    return RunManifest(command, cfg, code_version(), grid or {}, environment=env)


def write_csv(path: Path, rows: list[dict]):
    keys = list(rows[0]) if rows else []
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(keys)
        for r in rows:
            w.writerow([repr(float(r[k])) if isinstance(r[k], (float, np.floating)) else r[k]
                        for k in keys])


def read_series(path: str | os.PathLike, column: str | None = None):
    """(t, values) from a CSV with a header, or a two-column whitespace table."""
    text = Path(path).read_text()
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ValueError(f"{path}: empty series")
    if "," in lines[0]:
        rows = list(csv.reader(lines))
        head = rows[0]
        try:
            [float(x) for x in head]
            head, data = None, rows
        except ValueError:
            data = rows[1:]
    else:
        data = [ln.split() for ln in lines]
        head = None
    try:
        arr = np.array([[float(x) for x in r] for r in data])
    except ValueError as exc:
        raise ValueError(f"{path}: cannot parse numbers ({exc})") from None
    if arr.ndim != 2 or arr.shape[1] < 2:
        raise ValueError(f"{path}: need at least two columns")
    if head is not None:
        tcol = head.index("t") if "t" in head else 0
        if column is None:
            vcol = 1 if tcol == 0 else 0
        elif column in head:
            vcol = head.index(column)
        else:
            raise ValueError(f"{path}: no column '{column}' (have {head})")
    else:
        tcol, vcol = 0, 1 if column is None else int(column)
    return arr[:, tcol], arr[:, vcol]


# --------------------------------------------------------------------------
# commands


def _overrides(args) -> dict:
    return {"n_r": args.n_r, "n_theta": args.n_theta, "gauge_mode": args.gauge_mode,
            "T_final": getattr(args, "T", None)}


def cmd_evolve(args) -> int:
    cfg, extras, _ = load_config(args.config, _overrides(args))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    b = None
    if cfg.b_profile:
        b = bg.BProfile.from_text(Path(cfg.b_profile).read_text())
    snap = extras["snapshot_every"]
    progress = (lambda t: print(f"t = {t:.3f}", file=sys.stderr)) if args.verbose else None
    res = ev.run(cfg, b=b, monitor=dg.monitor_row, history_every=snap, progress=progress)
    man = _manifest("evolve", cfg.to_dict(), {"n_r": cfg.n_r, "n_theta": cfg.n_theta,
                                              "r_max": cfg.r_max, "dr": cfg.grid.dr,
                                              "dt": cfg.dt})
    man.config["snapshot_every"] = snap
    man.config["a"] = res.a.to_dict()
    p = out / "diagnostics.csv"
    write_csv(p, res.rows)
    man.add(p)
    p = out / "initial_residuals.json"
    p.write_text(json.dumps({k: float(v) for k, v in res.initial_residuals.items()},
                            indent=2, sort_keys=True) + "\n")
    man.add(p)
    p = out / "b_profile.txt"
    p.write_text(res.b.to_text())
    man.add(p)
    if res.history:
        # plain .npy keeps the bytes independent of wall-clock time
        for name, arr in (("snapshots_t.npy", np.array([h[0] for h in res.history])),
                          ("snapshots_Y.npy", np.stack([h[1] for h in res.history]))):
            np.save(out / name, arr)
            man.add(out / name)
    man.write(out)
    print(f"wrote {len(res.rows)} diagnostics rows to {out}")
    return 0


def cmd_verify(args) -> int:
    results = checks.run_suite(args.suite)
    for r in results:
        print(r.line())
    if args.json:
        Path(args.json).write_text(json.dumps([r.to_dict() for r in results], indent=2) + "\n")
    return 0 if all(r.passed for r in results) else 1


def cmd_fit(args) -> int:
    t, v = read_series(args.series, args.column)
    if args.abs:
        v = np.abs(v)
    window = tuple(args.window) if args.window else None
    fit = dg.fit_decay(t, v, window, min_samples=args.min_samples)
    print(f"exponent = {fit.exponent:.6f} +- {fit.stderr:.6f} (n = {fit.n})")
    return 0


def _read_table(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """s grid and (cos, sin) tables from the Fourier-table text layout."""
    K = None
    rows = []
    for ln, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#") or line.startswith("rows"):
            continue
        if line.startswith("modes"):
            K = int(line.split()[1])
            continue
        vals = [float(x) for x in line.split()]
        if K is None or len(vals) != 2 * K + 2:
            raise ValueError(f"{path}:{ln}: expected a 'modes K' header and 2K+2 numbers per row")
        rows.append(vals)
    if not rows:
        raise ValueError(f"{path}: empty table")
    a = np.array(rows)
    sin = np.concatenate([np.zeros((a.shape[0], 1)), a[:, K + 2:]], axis=1)
    return a[:, 0], a[:, 1:K + 2], sin


def cmd_solve_b(args) -> int:
    s, hc, hs = _read_table(args.h_table)
    n = args.n_theta
    th = 2 * np.pi * np.arange(n) / n
    h = bg._synth(hc[:, None, :], hs[:, None, :], th[None, :])
    a = bg.ACoeffs(args.a0, args.a1, args.a2)
    prof, results = bs.solve_profile(s, h, a, n_modes=args.modes, tol=args.tol)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    p = out / "b_profile.txt"
    p.write_text(prof.to_text())
    rows = [{"s": float(si), "residual": r.residual, "intb": r.intb, "iterations": r.iterations,
             "b0": r.b0, "b1": r.b1, "b2": r.b2} for si, r in zip(s, results)]
    q = out / "solve_report.csv"
    write_csv(q, rows)
    man = _manifest("solve-b", {"h_table": str(args.h_table), "a": a.to_dict(),
                                "n_theta": n, "modes": args.modes, "tol": args.tol})
    man.add(p)
    man.add(q)
    man.write(out)
    worst = max(r.residual for r in results)
    print(f"solved {len(results)} slices; max substitution residual {worst:.3e}")
    return 0


def cmd_extract_h(args) -> int:
    run_dir = Path(args.run)
    man = json.loads((run_dir / "manifest.json").read_text())
    snap = run_dir / "snapshots_Y.npy"
    if not snap.exists():
        raise dg.HistoryError(f"{snap} missing: rerun evolve with snapshot_every set")
    conf = {k: v for k, v in man["config"].items() if k not in CONFIG_EXTRAS and k != "a"}
    cfg = ev.RunConfig.from_dict(conf)
    a = bg.ACoeffs.from_dict(man["config"]["a"])
    b = bg.BProfile.from_text((run_dir / "b_profile.txt").read_text())
    evo = ev.Evolution(cfg, a, b)
    history = list(zip(np.load(run_dir / "snapshots_t.npy").tolist(), np.load(snap)))
    hx = dg.extract_h(history, evo, T=args.T)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    p = out / "h_table.txt"
    p.write_text(hx.to_text(args.modes))
    mis = dg.flux_mismatch(hx, history, evo.grid)
    q = out / "flux_mismatch.csv"
    write_csv(q, [{"s": float(s), "mismatch": float(m)} for s, m in zip(hx.s, mis)])
    m2 = _manifest("extract-h", {"run": str(run_dir), "T": hx.T, "modes": args.modes,
                                 "source_manifest": sha256_file(run_dir / "manifest.json")})
    m2.add(p)
    m2.add(q)
    m2.write(out)
    print(f"extracted h on {hx.s.size} slices into {p}")
    return 0


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wavegauge", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", help="run an evolution from a YAML config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--n-r", type=int, dest="n_r")
    p.add_argument("--n-theta", type=int, dest="n_theta")
    p.add_argument("--gauge-mode", choices=ev.GAUGE_MODES, dest="gauge_mode")
    p.add_argument("--T", type=float)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("verify", help="run a property suite")
    p.add_argument("suite", choices=sorted(checks.SUITES))
    p.add_argument("--json")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("fit", help="fit a power law to a time series")
    p.add_argument("series")
    p.add_argument("--column")
    p.add_argument("--window", type=float, nargs=2, metavar=("T0", "T1"))
    p.add_argument("--abs", action="store_true", help="fit |values|")
    p.add_argument("--min-samples", type=int, default=3, dest="min_samples")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("solve-b", help="solve for b from an h Fourier table")
    p.add_argument("h_table")
    p.add_argument("--out", required=True)
    p.add_argument("--a0", type=float, default=0.0)
    p.add_argument("--a1", type=float, default=0.0)
    p.add_argument("--a2", type=float, default=0.0)
    p.add_argument("--n-theta", type=int, default=64, dest="n_theta")
    p.add_argument("--modes", type=int, default=8)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_solve_b)

    p = sub.add_parser("extract-h", help="extract h from a stored evolve run")
    p.add_argument("--run", required=True, help="output directory of an evolve run")
    p.add_argument("--out", required=True)
    p.add_argument("--T", type=float)
    p.add_argument("--modes", type=int, default=4)
    p.set_defaults(func=cmd_extract_h)
    return ap


def _set_threads():
    n = os.environ.get("WAVEGAUGE_THREADS")
    if n:
        import numba
        numba.set_num_threads(int(n))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _set_threads()
    try:
        return args.func(args)
    except (ValueError, OSError, bs.NonContraction) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
