"""Acceptance criteria 1-12 at their stated tolerances.

Each test records a PASS/FAIL line; the session summary lists all of them.
Criteria 7-10 share two baseline runs (eps = 0.01 Gaussian, t in [0, 50]).
"""
import pytest

from wavegauge import checks, diagnostics as dg, evolve as ev


@pytest.fixture(scope="module")
def constructed_run():
    cfg = ev.RunConfig(gauge_mode="constructed", T_final=50.0)
    return ev.run(cfg, monitor=dg.monitor_row, history_every=0.5)


@pytest.fixture(scope="module")
def plain_run():
    cfg = ev.RunConfig(gauge_mode="plain_harmonic", T_final=50.0)
    return ev.run(cfg, monitor=dg.monitor_row)


def _assert(result):
    assert result.passed, result.line()


def test_criterion_01_flat_decay(record):
    _assert(record(checks.check_flat_decay()))


def test_criterion_02_ricci_flat_exterior(record):
    _assert(record(checks.check_ricci_flat()))


def test_criterion_03_localized_curvature(record):
    _assert(record(checks.check_localized_curvature()))


def test_criterion_04_gauge_identity(record):
    _assert(record(checks.check_gauge_identity()))


def test_criterion_05_commutators(record):
    _assert(record(checks.check_commutators()))


def test_criterion_06_minkowski_fixed_point(record):
    _assert(record(checks.check_minkowski_fixed_point()))


def test_criterion_07_gauge_mechanism(record, plain_run, constructed_run):
    _assert(record(checks.check_gauge_mechanism(plain_run.rows, constructed_run.rows)))


def test_criterion_08_delta_h(record, constructed_run):
    _assert(record(checks.check_delta_h(constructed_run.rows)))


def test_criterion_09_propagation(record, constructed_run):
    _assert(record(checks.check_propagation(constructed_run.rows)))


def test_criterion_10_cone(record, constructed_run):
    _assert(record(checks.check_cone(constructed_run.history, constructed_run.evolution)))


def test_criterion_11_bsolver(record):
    _assert(record(checks.check_bsolver()))


def test_criterion_12_toolbox(record):
    _assert(record(checks.check_toolbox()))
