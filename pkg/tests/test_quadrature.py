# tests/test_quadrature.py

import math

import numpy as np
import pytest
import scipy.special

from quadrature import (
    QuadratureDomainError,
    QuadratureEvaluationError,
    build_jacobi_rule,
    default_node_count,
    grading_power,
    integrate,
    kernel_integral,
    partial_kernel_integral,
    weighted_integral,
)
from special_fn import beta, gamma


@pytest.mark.parametrize("n", [1, 3, 8, 16])
@pytest.mark.parametrize("exp_right, exp_left", [(0.0, 0.0), (-0.5, 0.5), (0.3, -0.7), (-0.75, -0.25)])
def test_rule_is_exact_to_degree_2n_minus_1(n, exp_right, exp_left):
    rule = build_jacobi_rule(n, exp_right, exp_left)
    s = 0.5 * (1.0 + rule.nodes)
    for k in range(2 * n):
        exact = 2.0 ** (exp_right + exp_left + 1.0) * scipy.special.beta(exp_left + k + 1.0, exp_right + 1.0)
        assert float(np.dot(rule.weights, s ** k)) == pytest.approx(exact, rel=1e-12)


def test_rule_matches_scipy_roots():
    rule = build_jacobi_rule(12, -0.4, 0.6)
    nodes, weights = scipy.special.roots_jacobi(12, -0.4, 0.6)
    np.testing.assert_allclose(rule.nodes, nodes, atol=1e-13)
    np.testing.assert_allclose(rule.weights, weights, rtol=1e-11)
    assert float(np.sum(rule.weights)) == pytest.approx(rule.total_weight(), rel=1e-13)


def test_rule_is_cached_and_read_only():
    rule = build_jacobi_rule(16, -0.5, 0.0)
    assert build_jacobi_rule(16, -0.5, 0.0) is rule
    with pytest.raises(ValueError):
        rule.nodes[0] = 0.0


def test_rule_domain_errors():
    with pytest.raises(QuadratureDomainError):
        build_jacobi_rule(0, 0.0, 0.0)
    with pytest.raises(QuadratureDomainError):
        build_jacobi_rule(4, -1.0, 0.0)


def test_beta_half_reproduced():
    # integral of t**0.5 * (1 - t)**-0.5 over [0, 1] is B(1.5, 0.5) = pi / 2
    value = integrate(np.sqrt, (0.0, 1.0), right_exp=-0.5, grading=2)
    assert value == pytest.approx(math.pi / 2.0, rel=1e-12)


def test_grading_power():
    assert grading_power(1.0) == 1
    assert grading_power(0.5) == 2
    assert grading_power(0.25) == 4
    assert grading_power(0.3) == 10
    assert grading_power(1.0 / math.pi) == 4


def test_weighted_integral_of_one():
    for alpha in (0.2, 0.5, 0.75, 1.0):
        value = weighted_integral(lambda t: np.ones_like(t), (0.0, 1.0), alpha)
        assert value == pytest.approx(1.0 / gamma(alpha + 1.0), rel=1e-12)


def test_weighted_integral_of_fractional_power():
    alpha = 0.25
    value = weighted_integral(lambda t: t ** 0.25, (0.0, 2.0), alpha)
    exact = 2.0 ** 0.5 * beta(1.25, 0.25) / gamma(0.25)
    assert value == pytest.approx(exact, rel=1e-10)


def test_non_finite_integrand_reports_location():
    with pytest.raises(QuadratureEvaluationError) as excinfo:
        integrate(lambda t: np.where(t > 0.5, np.nan, 1.0), (0.0, 1.0), n=16)
    assert excinfo.value.location > 0.5


def test_kernel_integral_of_one():
    for alpha in (0.25, 0.5, 0.8):
        exact = 0.6 ** (2.0 * alpha - 1.0) * beta(alpha, alpha)
        for grading in (1, grading_power(alpha)):
            value = kernel_integral(lambda s: np.ones_like(s), 0.4, 1.0, alpha, 64, grading)
            assert value == pytest.approx(exact, rel=1e-10)
    assert kernel_integral(lambda s: s, 1.0, 1.0, 0.5, 8) == 0.0


def test_partial_kernel_integral_of_one():
    assert partial_kernel_integral(lambda s: np.ones_like(s), 0.7, 0.4, 16) == pytest.approx(0.7 ** 0.4 / 0.4, rel=1e-12)
    assert partial_kernel_integral(lambda s: s, 0.0, 0.4, 16) == 0.0


def test_node_count_from_environment(monkeypatch):
    monkeypatch.setenv("FRACVAR_QUAD_N", "8")
    assert default_node_count() == 8
    monkeypatch.setenv("FRACVAR_QUAD_N", "bogus")
    assert default_node_count() == 64
    monkeypatch.delenv("FRACVAR_QUAD_N")
    assert default_node_count() == 64


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75, 1.0])
def test_error_does_not_grow_with_node_count(alpha):
    # (1/Gamma(alpha)) * integral of (1 - t)**(alpha - 1) * e**t over [0, 1] is e * P(alpha, 1)
    exact = math.e * scipy.special.gammainc(alpha, 1.0)
    errors = [abs(weighted_integral(np.exp, (0.0, 1.0), alpha, n) - exact) for n in (4, 8, 16, 32, 64)]
    for coarse, fine in zip(errors, errors[1:]):
        assert fine <= coarse + 1e-14
    assert errors[-1] <= 1e-13
