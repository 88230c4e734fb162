# tests/test_grid_ops.py

import numpy as np
import pytest

from grid_ops import (
    GridFn,
    GridSizeError,
    KernelDomainError,
    caputo_left_grid,
    kernel_transform,
    kernel_transform_bound,
    rl_left_integral_grid,
    rl_right_integral_grid,
)
from power_calculus import PowerSum, left_caputo_derivative
from special_fn import gamma


def test_grid_validation():
    with pytest.raises(GridSizeError):
        GridFn(0.0, 1.0, np.array([0.0, 1.0]))
    with pytest.raises(GridSizeError):
        GridFn(0.0, 1.0, np.array([0.0, np.inf, 1.0]))
    g = GridFn.sample(lambda t: t, 0.0, 2.0, 4)
    assert g.step == pytest.approx(0.5)
    assert g(1.25) == pytest.approx(1.25)
    with pytest.raises(ValueError):
        g.values[0] = 3.0


def test_grid_arithmetic_requires_same_grid():
    f = GridFn.sample(np.sin, 0.0, 1.0, 8)
    with pytest.raises(GridSizeError):
        f + GridFn.sample(np.sin, 0.0, 1.0, 16)
    np.testing.assert_allclose((2.0 * f - f).values, f.values)


def test_caputo_of_linear_is_exact():
    # the L1 scheme reproduces piecewise-linear data exactly
    alpha = 0.4
    y = GridFn.sample(lambda t: 3.0 * t, 0.0, 1.0, 64)
    out = caputo_left_grid(y, alpha)
    exact = 3.0 * y.nodes ** (1.0 - alpha) / gamma(2.0 - alpha)
    np.testing.assert_allclose(out.values, exact, rtol=1e-12, atol=1e-14)


def test_caputo_at_alpha_one_is_the_derivative():
    y = GridFn.sample(lambda t: t ** 2, 0.0, 1.0, 100)
    out = caputo_left_grid(y, 1.0)
    np.testing.assert_allclose(out.values[1:-1], 2.0 * y.nodes[1:-1], atol=1e-12)


def test_rl_integral_of_linear_is_exact():
    alpha = 0.3
    y = GridFn.sample(lambda t: 1.0 + 2.0 * t, 0.0, 1.0, 50)
    out = rl_left_integral_grid(y, alpha)
    t = y.nodes
    exact = t ** alpha / gamma(alpha + 1.0) + 2.0 * t ** (alpha + 1.0) / gamma(alpha + 2.0)
    np.testing.assert_allclose(out.values, exact, rtol=1e-10, atol=1e-14)


def test_right_integral_mirrors_left():
    alpha = 0.6
    y = GridFn.sample(lambda t: np.ones_like(t), 0.0, 1.0, 40)
    out = rl_right_integral_grid(y, alpha)
    np.testing.assert_allclose(out.values, (1.0 - y.nodes) ** alpha / gamma(alpha + 1.0), rtol=1e-10, atol=1e-14)


def test_caputo_grid_converges_to_exact():
    alpha = 0.5
    p = PowerSum.left(0.0, 1.0, [(1.0, 0.5), (-0.7, 2.0)])
    exact = left_caputo_derivative(p, alpha)
    errors = []
    for size in (128, 256, 512, 1024):
        approx = caputo_left_grid(GridFn.sample(p, 0.0, 1.0, size), alpha)
        interior = approx.nodes >= 0.05
        errors.append(np.max(np.abs(approx.values[interior] - exact(approx.nodes[interior]))))
    assert all(later < earlier for earlier, later in zip(errors, errors[1:]))
    assert errors[-1] < 1e-2


def test_kernel_transform_of_one_meets_bound():
    for alpha in (0.25, 0.5, 0.75, 1.0):
        for t in (0.0, 0.3, 0.9):
            value = kernel_transform(lambda s: np.ones_like(s), alpha, t, 64, interval=(0.0, 1.0))
            bound = kernel_transform_bound(1.0, alpha, t, (0.0, 1.0))
            assert value == pytest.approx(bound, rel=1e-10)


def test_kernel_transform_on_grid_and_at_endpoint():
    h = GridFn.sample(lambda s: np.ones_like(s), 0.0, 1.0, 32)
    assert kernel_transform(h, 0.5, 1.0, 16) == 0.0
    assert kernel_transform(h, 0.5, 0.5, 64) == pytest.approx(
        kernel_transform_bound(1.0, 0.5, 0.5, (0.0, 1.0)), rel=1e-10
    )
    with pytest.raises(KernelDomainError):
        kernel_transform(h, 0.5, 1.5, 16)
    with pytest.raises(KernelDomainError):
        kernel_transform(lambda s: s, 0.5, 0.5, 16)


def test_kernel_transform_stays_below_bound():
    h = PowerSum.left(0.0, 1.0, [(1.0, 2.0), (-0.5, 0.0)])
    sup_h = 0.5
    for alpha in (0.3, 0.5, 0.9):
        for t in np.linspace(0.0, 1.0, 9):
            value = kernel_transform(h, alpha, float(t), 64, interval=(0.0, 1.0))
            assert abs(value) <= kernel_transform_bound(sup_h, alpha, float(t), (0.0, 1.0)) + 1e-12


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_caputo_grid_inverts_integral_grid(alpha):
    y = GridFn.sample(lambda t: 1.0 + t ** 2, 0.0, 1.0, 4096)
    recovered = caputo_left_grid(rl_left_integral_grid(y, alpha), alpha)
    interior = y.nodes >= 0.05
    assert np.max(np.abs(recovered.values[interior] - y.values[interior])) <= 1e-2


@pytest.mark.parametrize("alpha", [0.25, 0.5, 0.75])
def test_kernel_transform_is_holder_continuous(alpha):
    # |h| <= 1 and |h'| <= 3; the constant is fixed for this family
    constant = 4.0
    for points in (33, 65, 129):
        ts = np.linspace(0.0, 1.0, points)
        step = ts[1] - ts[0]
        values = np.array(
            [kernel_transform(lambda s: np.cos(3.0 * s), alpha, float(t), 64, interval=(0.0, 1.0)) for t in ts]
        )
        jump = np.max(np.abs(np.diff(values)))
        assert jump <= constant * step ** min(alpha, 1.0 - alpha)
