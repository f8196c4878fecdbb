"""Tests for the constrained-maximization solvers and test functions."""

import math

import numpy as np
import pytest

from mtcrit import (
    GridFunction,
    model_testfun_energy,
    moser_functional,
    solve_subcritical,
    step1_testfun,
)
from mtcrit.domain import DomainModel, Shape
from mtcrit.variational import _load_weights, _make_starts, _project, _stiffness, make_grid


def test_functional_at_zero_is_area(fam0):
    r = make_grid()
    u = GridFunction(r, np.zeros_like(r))
    assert moser_functional(fam0, u) == pytest.approx(math.pi, rel=1e-10)


def test_boundary_value_enforced():
    r = make_grid()
    with pytest.raises(ValueError):
        GridFunction(r, np.ones_like(r))


def test_eigen_start_energy():
    r = make_grid()
    alpha = 4.0 * math.pi
    starts = dict(_make_starts(r, alpha, ("eigen", "flat", "bubble")))
    for name, u0 in starts.items():
        e = GridFunction(r, u0).energy()
        assert e <= alpha * (1.0 + 1e-9), name
    # The eigen start saturates the ball exactly.
    assert GridFunction(r, starts["eigen"]).energy() == pytest.approx(alpha, rel=1e-9)


def test_project_shrinks_energy():
    r = make_grid(400)
    ab = _stiffness(r)
    u = 3.0 * (1.0 - r * r)
    alpha = 1.0
    v = _project(u, ab, alpha)
    assert GridFunction(r, v).energy() == pytest.approx(alpha, rel=1e-12)
    # Already-feasible input is returned unchanged.
    w = _project(v, ab, 10.0)
    assert np.array_equal(w, v)


def test_gradient_consistency(fam0):
    # Directional finite-difference check of the discrete functional.
    r = make_grid(400)
    w = _load_weights(r)
    rng = np.random.default_rng(7)
    u = 0.5 * (1.0 - r * r)
    d = rng.standard_normal(r.size)
    d[-1] = 0.0

    def value(vec):
        return moser_functional(fam0, GridFunction(r, vec))

    from mtcrit.perturbation import eval_psi_N

    _, psi_p = eval_psi_N(fam0, 1, u)
    grad = w * psi_p
    h = 1e-6
    fd = (value(u + h * d) - value(u - h * d)) / (2.0 * h)
    assert fd == pytest.approx(float(np.dot(grad, d)), rel=1e-4)


def test_solve_subcritical_basic(fam0):
    run = solve_subcritical(fam0, 1, 0.9 * 4.0 * math.pi)
    assert run.saturated
    assert run.el_residual < 1e-4
    assert run.J_value > math.pi
    assert run.gamma > 0 and run.lam > 0
    # The maximizer beats every individual start's projected profile.
    assert run.iterations > 0


def test_alpha_validation(fam0):
    with pytest.raises(ValueError):
        solve_subcritical(fam0, 1, 4.0 * math.pi)
    with pytest.raises(ValueError):
        solve_subcritical(fam0, 1, 0.0)


def test_unknown_start(fam0):
    with pytest.raises(ValueError):
        solve_subcritical(fam0, 1, 1.0, starts=("nope",))


def test_lambda_g_zero_family(lambda_g0):
    # For g = 0 the maximizer is the first eigenfunction scaled to the
    # ball boundary: Lambda_0 = 4 pi / lambda_1.
    target = 4.0 * math.pi / 5.783185962946783
    assert lambda_g0["lambda_g"] == pytest.approx(target, rel=0.01)
    assert lambda_g0["lambda_g"] < math.pi * math.e
    assert lambda_g0["gap"] < 0.05


def test_lambda_g_non_disk(fam0):
    rect = DomainModel(shape=Shape.RECTANGLE, width=2.0, height=1.0)
    from mtcrit import lambda_g_report

    with pytest.raises(NotImplementedError):
        lambda_g_report(fam0, rect)


def test_step1_testfun(disk, fam0):
    out = step1_testfun(disk, fam0, 0.005)
    assert out["f_norm_sq"] == 4.0 * math.pi
    e2 = 0.005**2
    expected = 4.0 * math.pi * (math.log1p(1.0 / e2) - 1.0 / (1.0 + e2))
    assert out["norm_sq"] == pytest.approx(expected, rel=1e-14)
    assert out["J"] > math.pi + math.pi * math.e - 0.3
    with pytest.raises(ValueError):
        step1_testfun(disk, fam0, 0.5)
    with pytest.raises(NotImplementedError):
        step1_testfun(disk, fam0, 0.01, z=(0.3, 0.0))


def test_model_testfun_sanity(disk, fam0, data0, profiles):
    out = model_testfun_energy(disk, fam0, data0, profiles, 4.0)
    assert out["norm_sq"] == pytest.approx(4.0 * math.pi, rel=1e-4)
    assert out["S_int"] == pytest.approx(0.5, abs=1e-4)
    assert out["mu"] > 0.0
    # For g = 0 the profile brackets vanish against the stored asymptotes.
    assert abs(out["H_tilde"][0]) < 1e-3
    rel = abs(out["log_inv_mu2_truncated"] - out["log_inv_mu2_closed"])
    assert rel / abs(out["log_inv_mu2_closed"]) < 2e-3


def test_level_trend(fam0):
    # J(alpha) increases in alpha and stays below the concentration bound.
    vals = [solve_subcritical(fam0, 1, f * 4.0 * math.pi, n_grid=800).J_value
            for f in (0.5, 0.7, 0.9)]
    assert vals == sorted(vals)
    assert all(v - math.pi < math.pi * math.e + 0.6 for v in vals)
