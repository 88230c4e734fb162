# tests/test_euler_lagrange.py

import dataclasses
import math

import numpy as np
import pytest

from euler_lagrange import (
    InternalConsistencyError,
    Variation,
    agrawal_candidate,
    agrawal_endpoint_value,
    chebyshev_points,
    differential_form_residual,
    dubois_reymond_eta,
    dubois_reymond_pairing,
    first_variation,
    integral_form_residual,
    unweighted_obstruction,
)
from functionals import (
    AdmissibilityError,
    Trajectory,
    VariationalProblem,
    pin_boundary,
    quadratic_lagrangian,
    weighted_energy_problem,
)
from grid_ops import GridFn
from power_calculus import NonRepresentableError, PowerSum, weighted_inner_product
from special_fn import gamma


def power_trajectory(alpha, terms):
    return Trajectory.from_power_sum(PowerSum.left(0.0, 1.0, terms), alpha)


def test_chebyshev_points():
    points = chebyshev_points(2.0, 4.0, 5)
    assert points[0] == 2.0 and points[-1] == 4.0
    assert np.all(np.diff(points) > 0)
    assert points[2] == pytest.approx(3.0)


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75, 1.0])
def test_residual_constant_at_minimizer(alpha):
    report = integral_form_residual(weighted_energy_problem(alpha), power_trajectory(alpha, [(1.0, alpha)]))
    assert report.constant
    assert report.max_deviation <= 1e-6
    assert report.k_estimate == pytest.approx(2.0 * gamma(alpha + 1.0), rel=1e-9)


def test_residual_not_constant_for_the_line():
    report = integral_form_residual(weighted_energy_problem(0.5), power_trajectory(0.5, [(1.0, 1.0)]))
    assert not report.constant
    assert report.max_deviation >= 0.5


def test_residual_classical_reduction_at_alpha_one():
    # L = v^2 + 4u: y'' = 2, so y = t^2 and the integrated equation gives 4 - 4t + 2y' = 4
    prob = VariationalProblem(0.0, 1.0, 1.0, 0.0, 1.0, quadratic_lagrangian(c_vv=1.0, c_u=4.0))
    report = integral_form_residual(prob, power_trajectory(1.0, [(1.0, 2.0)]))
    assert report.constant
    assert report.k_estimate == pytest.approx(4.0, rel=1e-9)


def test_residual_sample_count_from_environment(monkeypatch):
    monkeypatch.setenv("FRACVAR_RESIDUAL_SAMPLES", "9")
    report = integral_form_residual(weighted_energy_problem(0.5), power_trajectory(0.5, [(1.0, 0.5)]))
    assert len(report.sample_ts) == 9


def test_differential_form_vanishes_at_minimizer():
    values = differential_form_residual(
        weighted_energy_problem(0.5), power_trajectory(0.5, [(1.0, 0.5)]), [0.0, 0.3, 0.9]
    )
    np.testing.assert_allclose(values, 0.0, atol=1e-12)


def test_differential_form_detects_non_stationary_path():
    # caputo derivative c0 * Gamma(1.5) + t leaves -2 Gamma(1.5) after the right derivative
    alpha = 0.5
    c0 = 1.0 - 1.0 / gamma(2.0 + alpha)
    y = power_trajectory(alpha, [(c0, alpha), (1.0 / gamma(2.0 + alpha), 1.0 + alpha)])
    values = differential_form_residual(weighted_energy_problem(alpha), y, [0.1, 0.5, 0.8])
    np.testing.assert_allclose(values, -2.0 * gamma(1.5), rtol=1e-10)


@pytest.mark.parametrize(
    "terms, stationary",
    [
        ([(1.0, 0.5)], True),
        ([(1.0 - 1.0 / gamma(2.5), 0.5), (1.0 / gamma(2.5), 1.5)], False),
    ],
)
def test_differential_and_integral_forms_agree(terms, stationary):
    prob = weighted_energy_problem(0.5)
    y = power_trajectory(0.5, terms)
    values = differential_form_residual(prob, y, [0.1, 0.3, 0.5, 0.7, 0.9])
    vanishes = bool(np.max(np.abs(values)) <= 1e-8)
    assert vanishes is stationary
    assert integral_form_residual(prob, y).constant is stationary


def test_differential_form_limits():
    with pytest.raises(ValueError):
        differential_form_residual(weighted_energy_problem(1.0), power_trajectory(1.0, [(1.0, 1.0)]), [0.5])
    with pytest.raises(NonRepresentableError):
        differential_form_residual(weighted_energy_problem(0.5), power_trajectory(0.5, [(1.0, 1.0)]), [0.5])


def test_variation_must_vanish():
    with pytest.raises(AdmissibilityError):
        Variation(PowerSum.left(0.0, 1.0, [(1.0, 1.0)]), 0.5)


def test_lemma_constant_f_pairs_to_zero():
    alpha = 0.5
    eta = Variation(pin_boundary(PowerSum.left(0.0, 1.0, [(1.0, 2.0), (-3.0, 1.5)]), alpha, 0.0, 0.0), alpha)
    pairing = dubois_reymond_pairing(lambda s: np.full_like(s, 2.5), eta, alpha)
    assert abs(pairing) <= 1e-10


def test_lemma_witness_for_non_constant_f():
    alpha = 0.75
    f = PowerSum.left(0.0, 1.0, [(1.0, 1.0), (0.5, 0.0)])
    eta, k = dubois_reymond_eta(f, alpha)
    assert eta.eta(1.0) == pytest.approx(0.0, abs=1e-12)
    centred = f - PowerSum.constant(0.0, 1.0, k)
    norm = weighted_inner_product(centred, centred, alpha - 1.0, alpha)
    pairing = dubois_reymond_pairing(f, eta, alpha)
    assert pairing > 0.0
    assert pairing == pytest.approx(norm, rel=1e-8)


def test_lemma_witness_on_grid():
    alpha = 0.5
    f = GridFn.sample(lambda s: s, 0.0, 1.0, 512)
    eta, k = dubois_reymond_eta(f, alpha)
    assert eta.eta.values[0] == 0.0
    assert abs(eta.eta.values[-1]) <= 1e-12
    # k is the weighted mean of f: Gamma(alpha + 1) * I^alpha[t](1) = Gamma(1.5) / Gamma(2.5)
    assert k == pytest.approx(gamma(1.5) / gamma(2.5), rel=1e-4)


def test_first_variation_matches_finite_difference():
    alpha = 0.5
    prob = weighted_energy_problem(alpha)
    eta = Variation(pin_boundary(PowerSum.left(0.0, 1.0, [(1.0, 2.0)]), alpha, 0.0, 0.0), alpha)
    at_minimizer = first_variation(prob, power_trajectory(alpha, [(1.0, 0.5)]), eta)
    assert abs(at_minimizer.analytic) <= 1e-10
    off = first_variation(prob, power_trajectory(alpha, [(1.0, 1.0)]), eta)
    assert abs(off.analytic) > 1e-3
    assert off.analytic == pytest.approx(off.finite_difference, rel=1e-6)


def test_first_variation_mismatch_raises():
    alpha = 0.5
    # a wrong partial makes the analytic variation disagree with the functional
    broken = dataclasses.replace(quadratic_lagrangian(c_vv=1.0), d_v=lambda t, u, v: 3.0 * v)
    prob = weighted_energy_problem(alpha).with_lagrangian(broken)
    eta = Variation(pin_boundary(PowerSum.left(0.0, 1.0, [(1.0, 2.0)]), alpha, 0.0, 0.0), alpha)
    with pytest.raises(InternalConsistencyError):
        first_variation(prob, power_trajectory(alpha, [(1.0, 1.0)]), eta, quad_n=64)


def test_agrawal_candidate():
    assert agrawal_candidate(0.5, 0.5) == pytest.approx(2.0 * math.asinh(1.0), rel=1e-10)
    assert agrawal_candidate(0.5, 0.0) == 0.0
    with pytest.raises(ValueError):
        agrawal_candidate(0.5, 1.0)
    assert agrawal_endpoint_value(0.75) == pytest.approx(2.0)
    assert agrawal_endpoint_value(0.5) is None


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_unweighted_problem_has_no_minimizer(alpha):
    report = unweighted_obstruction(alpha)
    assert not report.has_solution
    assert report.k == 0.0
    assert report.solution is None


def test_unweighted_problem_at_alpha_one():
    report = unweighted_obstruction(1.0)
    assert report.has_solution
    assert report.k == 2.0
    assert report.value == pytest.approx(1.0, abs=1e-12)


def test_agrawal_derivative_sample():
    assert unweighted_obstruction(0.75).agrawal_derivative == pytest.approx(3.16227766, rel=1e-8)
