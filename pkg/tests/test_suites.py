# tests/test_suites.py

import pytest

from power_calculus import PowerSum
from suites import CANONICAL_BYPARTS, byparts_sides, run_suite


def assert_all_passed(results):
    failed = [f"{check.name}: {check.detail}" for check in results if not check.passed]
    assert not failed, failed


def test_ops_suite():
    results = run_suite("ops")
    assert {check.name for check in results} == {
        "rl_derivative_inverts_integral",
        "integral_inverts_caputo",
        "integral_semigroup",
        "linearity",
        "alpha_one_is_classical",
        "grid_matches_power_calculus",
        "kernel_transform_bound",
    }
    assert_all_passed(results)


def test_lemma_suite():
    assert_all_passed(run_suite("lemma"))


def test_byparts_suite():
    assert_all_passed(run_suite("byparts"))


def test_canonical_byparts_value():
    sides = byparts_sides(PowerSum.right(0.0, 1.0, [(1.0, 0.0)]), PowerSum.left(0.0, 1.0, [(1.0, 0.0)]), 0.5)
    for value in sides.values():
        assert value == pytest.approx(CANONICAL_BYPARTS, abs=1e-6)


def test_classical_byparts_at_alpha_one():
    # f(b) = 0 and g(a) = 0, so the integral of f g' equals the integral of -f' g
    phi = PowerSum.right(0.0, 1.0, [(1.0, 1.0), (2.0, 0.0)])
    psi = PowerSum.left(0.0, 1.0, [(-1.0, 2.0), (0.5, 0.0)])
    sides = byparts_sides(phi, psi, 1.0)
    assert sides["left"] == pytest.approx(sides["right"], rel=1e-12)
    assert sides["left_quadrature"] == pytest.approx(sides["left"], rel=1e-12)


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_suite("nope")
