import csv
import json

import numpy as np
import pytest

from wavegauge import cli
from wavegauge.background import BProfile


def _write(path, text):
    path.write_text(text)
    return str(path)


def _rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


ZERO = "eps: 0.0\nn_r: 64\nn_theta: 8\nr_max: 32.0\nT_final: 1.0\noutput_every: 0.25\n"


def test_evolve_zero_config(tmp_path):
    cfg = _write(tmp_path / "zero.yaml", ZERO)
    assert cli.main(["evolve", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    rows = _rows(tmp_path / "a" / "diagnostics.csv")
    assert len(rows) == 5
    for row in rows:
        assert all(float(v) == 0.0 for k, v in row.items() if k != "t")
    man = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert man["command"] == "evolve"
    assert man["config"]["eps"] == 0.0
    assert {"diagnostics.csv", "initial_residuals.json", "b_profile.txt"} <= set(man["outputs"])
    assert all(len(h) == 64 for h in man["outputs"].values())


def test_evolve_is_deterministic(tmp_path):
    cfg = _write(tmp_path / "small.yaml",
                 "n_r: 64\nn_theta: 8\nr_max: 32.0\nT_final: 1.0\nsnapshot_every: 0.5\n")
    for d in ("a", "b"):
        assert cli.main(["evolve", "--config", cfg, "--out", str(tmp_path / d)]) == 0
    for name in ("diagnostics.csv", "snapshots_Y.npy", "snapshots_t.npy"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_evolve_overrides(tmp_path):
    cfg = _write(tmp_path / "zero.yaml", ZERO)
    assert cli.main(["evolve", "--config", cfg, "--out", str(tmp_path / "o"), "--n-r", "48",
                     "--gauge-mode", "plain_harmonic", "--T", "0.5"]) == 0
    man = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert man["grid"]["n_r"] == 48
    assert man["config"]["gauge_mode"] == "plain_harmonic"
    assert man["config"]["T_final"] == 0.5


def test_bad_ordering_names_fields(tmp_path, capsys):
    cfg = _write(tmp_path / "bad.yaml", "eps: 0.01\nsigma: 0.95\ndelta: 0.9\n")
    assert cli.main(["evolve", "--config", cfg, "--out", str(tmp_path / "x")]) == 2
    err = capsys.readouterr().err
    assert "sigma" in err and "delta" in err
    assert "line 2" in err


def test_unknown_field_line(tmp_path, capsys):
    cfg = _write(tmp_path / "bad.yaml", "eps: 0.01\n\nepsilon: 0.02\n")
    assert cli.main(["evolve", "--config", cfg, "--out", str(tmp_path / "x")]) == 2
    err = capsys.readouterr().err
    assert "bad.yaml:3" in err and "epsilon" in err


def test_fit_exact_and_constant(tmp_path, capsys):
    t = np.linspace(0, 50, 101)
    p = tmp_path / "series.csv"
    with open(p, "w") as fh:
        fh.write("t,v,c\n")
        for ti in t.tolist():
            fh.write(f"{ti!r},{(1 + ti) ** -1.0!r},{2.5!r}\n")
    assert cli.main(["fit", str(p), "--column", "v", "--window", "5", "50"]) == 0
    assert "exponent = -1.000000 +- 0.000000" in capsys.readouterr().out
    assert cli.main(["fit", str(p), "--column", "c"]) == 0
    out = capsys.readouterr().out
    assert "exponent = 0.000000" in out or "exponent = -0.000000" in out


def test_fit_whitespace_columns(tmp_path, capsys):
    t = np.linspace(1, 20, 30)
    lines = [f"{a!r} {b!r}" for a, b in zip(t.tolist(), ((1 + t) ** 0.5).tolist())]
    p = _write(tmp_path / "s.txt", "\n".join(lines))
    assert cli.main(["fit", p]) == 0
    assert "exponent = 0.500000" in capsys.readouterr().out


def test_fit_errors(tmp_path):
    assert cli.main(["fit", str(tmp_path / "missing.csv")]) == 2
    p = _write(tmp_path / "neg.csv", "t,v\n0,1\n1,-1\n2,1\n3,1\n")
    assert cli.main(["fit", p, "--column", "v"]) == 2


def test_solve_b_roundtrip(tmp_path):
    table = "# h table\nmodes 3\nrows 2\n" + "\n".join(
        f"{s!r} 0.0 0.0 {1e-4 / (1 + s)!r} 0.0 0.0 0.0 {2e-5!r}" for s in (0.0, 1.0))
    p = _write(tmp_path / "h.txt", table)
    assert cli.main(["solve-b", p, "--out", str(tmp_path / "b"), "--modes", "8"]) == 0
    prof = BProfile.from_text((tmp_path / "b" / "b_profile.txt").read_text())
    th = 2 * np.pi * np.arange(64) / 64
    b0 = prof.b(th, 0.0)
    # linear response: cos 2 -> 1/6, sin 3 -> 1/16
    np.testing.assert_allclose(b0, 1e-4 / 6 * np.cos(2 * th) + 2e-5 / 16 * np.sin(3 * th), atol=1e-8)
    rep = _rows(tmp_path / "b" / "solve_report.csv")
    assert all(float(r["residual"]) <= 1e-10 for r in rep)


def test_solve_b_bad_table(tmp_path):
    p = _write(tmp_path / "h.txt", "modes 2\n0.0 1 2\n")
    assert cli.main(["solve-b", p, "--out", str(tmp_path / "b")]) == 2


def test_verify_bsolve(tmp_path, capsys):
    js = tmp_path / "v.json"
    assert cli.main(["verify", "bsolve", "--json", str(js)]) == 0
    assert capsys.readouterr().out.startswith("PASS")
    assert all(r["passed"] for r in json.loads(js.read_text()))


def test_extract_h(tmp_path):
    cfg = _write(tmp_path / "run.yaml",
                 "n_r: 96\nn_theta: 8\nr_max: 24.0\nT_final: 2.0\nsnapshot_every: 0.25\n")
    run = tmp_path / "run"
    assert cli.main(["evolve", "--config", cfg, "--out", str(run)]) == 0
    assert cli.main(["extract-h", "--run", str(run), "--out", str(tmp_path / "h")]) == 0
    text = (tmp_path / "h" / "h_table.txt").read_text()
    s, hc, hs = cli._read_table(tmp_path / "h" / "h_table.txt")
    np.testing.assert_allclose(s, 2 * np.load(run / "snapshots_t.npy"), rtol=1e-15)
    assert s[-1] == pytest.approx(4.0)
    assert text.startswith("# h fourier table")
    assert len(_rows(tmp_path / "h" / "flux_mismatch.csv")) == s.size


def test_extract_h_without_snapshots(tmp_path):
    cfg = _write(tmp_path / "zero.yaml", ZERO)
    assert cli.main(["evolve", "--config", cfg, "--out", str(tmp_path / "a")]) == 0
    assert cli.main(["extract-h", "--run", str(tmp_path / "a"), "--out", str(tmp_path / "h")]) == 2
