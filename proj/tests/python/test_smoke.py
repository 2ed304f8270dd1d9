"""Smoke tests for the python bindings: import, a few exact identities, and a
tiny end-to-end sweep. The heavy numerical contracts live in the C++ suites."""

import math

import pytest

import radiff


def test_quadrature_moments():
    q = radiff.build_quadrature(4, 8)
    assert q.ndirs() == 32
    assert abs(q.weight_sum() - 1.0) <= 1e-13
    assert max(abs(c) for c in q.first_moment()) <= 1e-13
    m = q.second_moment()  # row-major 3x3
    for i in range(3):
        for j in range(3):
            target = 1.0 / 3.0 if i == j else 0.0
            assert abs(m[3 * i + j] - target) <= 1e-10


def test_compatible_root_spots():
    assert abs(radiff.compatible_root(2.0) - 1.0) <= 1e-13
    assert abs(radiff.compatible_root(84.0) - 3.0) <= 1e-13
    r = radiff.compatible_root(0.37)
    assert abs(r ** 4 + r - 0.37) <= 1e-13
    with pytest.raises(ValueError):
        radiff.compatible_root(0.0)


def test_relaxation_conserves_invariant():
    fbar, theta = radiff.relaxation_solve(0.3, 1.2, 0.25, 1e-2)
    assert abs((fbar + theta) - 1.5) <= 1e-13
    assert theta > 0.0


def test_layer_picard_decays():
    traj = radiff.layer_picard(1.0, 0.1, 5.0, 1e-3)
    assert abs(traj[0] - 0.1) <= 1e-15
    assert abs(traj[-1]) < 1e-3
    assert all(abs(b) <= abs(a) + 1e-15 for a, b in zip(traj, traj[1:]))


def test_fit_rate_exact_slope():
    pts = [(e, 3.0 * e) for e in (0.4, 0.2, 0.1)]
    fit = radiff.fit_rate(pts)
    assert abs(fit.slope - 1.0) <= 1e-12
    assert abs(math.exp(fit.intercept) - 3.0) <= 1e-12


def test_normalize_config_round_trip():
    text = "[model]\nepsilon = 0.25\n[grid]\nnx = 16\n"
    echo = radiff.normalize_config(text)
    assert "epsilon = 0.25" in echo
    assert "nx = 16" in echo
    assert radiff.normalize_config(echo) == echo
    with pytest.raises(RuntimeError):
        radiff.normalize_config("[model]\nepsilon = 1.5\n")


def test_tiny_sweep():
    radiff.set_threads(2)
    cfg = """
[grid]
nx = 32
[quadrature]
n_polar = 2
n_azimuth = 4
[sweep]
epsilons = 0.4, 0.2
t_eval = 0.05
refinement_check = false
"""
    report = radiff.run_sweep(cfg)
    assert len(report.rows) == 4  # 2 epsilons x 2 composite orders
    assert all(r.err_linf_f > 0.0 for r in report.rows)
    assert not report.degenerate
    assert len(report.rates) == 6  # 3 metrics x 2 orders
    for rate in report.rates:
        assert math.isfinite(rate.slope)
