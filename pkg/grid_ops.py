# grid_ops.py

import logging
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from power_calculus import FracOrder, as_alpha
from quadrature import grading_power, kernel_integral
from special_fn import gamma

logger = logging.getLogger(__name__)

MIN_INTERVALS = 2


class GridSizeError(ValueError):
    pass


class KernelDomainError(ValueError):
    pass


@dataclass(frozen=True)
class GridFn:
    """Samples at t_i = a + i * (b - a) / N, i = 0..N."""

    a: float
    b: float
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size - 1 < MIN_INTERVALS:
            raise GridSizeError(f"grid needs at least {MIN_INTERVALS} intervals, got {values.size - 1}")
        if not np.all(np.isfinite(values)):
            raise GridSizeError("grid values must be finite")
        if not self.a < self.b:
            raise GridSizeError(f"interval must satisfy a < b, got [{self.a}, {self.b}]")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def sample(cls, f: Callable[[np.ndarray], np.ndarray], a: float, b: float, intervals: int) -> "GridFn":
        nodes = np.linspace(a, b, intervals + 1)
        return cls(float(a), float(b), np.broadcast_to(np.asarray(f(nodes), dtype=float), nodes.shape))

    @property
    def intervals(self) -> int:
        return self.values.size - 1

    @property
    def step(self) -> float:
        return (self.b - self.a) / self.intervals

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.intervals + 1)

    def with_values(self, values: np.ndarray) -> "GridFn":
        return GridFn(self.a, self.b, values)

    def __add__(self, other: "GridFn") -> "GridFn":
        self._same_grid(other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "GridFn") -> "GridFn":
        self._same_grid(other)
        return self.with_values(self.values - other.values)

    def __mul__(self, scalar: float) -> "GridFn":
        if isinstance(scalar, GridFn):
            return NotImplemented
        return self.with_values(self.values * float(scalar))

    __rmul__ = __mul__

    def _same_grid(self, other: "GridFn") -> None:
        if (self.a, self.b, self.intervals) != (other.a, other.b, other.intervals):
            raise GridSizeError("grid functions live on different grids")

    def eval(self, t):
        arr = np.asarray(t, dtype=float)
        out = np.interp(arr, self.nodes, self.values)
        if np.ndim(out) == 0:
            return float(out)
        return out

    __call__ = eval


def _power_increments(k: np.ndarray, power: float) -> np.ndarray:
    # (k + 1)**power - k**power for k >= 1, without cancellation
    return k ** power * np.expm1(power * np.log1p(1.0 / k))


def _l1_weights(count: int, alpha: float) -> np.ndarray:
    weights = np.empty(count)
    weights[0] = 1.0
    if count > 1:
        weights[1:] = _power_increments(np.arange(1, count, dtype=float), 1.0 - alpha)
    return weights


def caputo_left_grid(y: GridFn, alpha: Union[FracOrder, float]) -> GridFn:
    alpha = as_alpha(alpha)
    if alpha == 1.0:
        return y.with_values(np.gradient(y.values, y.step, edge_order=1))
    n = y.intervals
    increments = np.diff(y.values)
    weights = _l1_weights(n, alpha)
    # node 0: the piecewise-linear interpolant's Caputo derivative tends to 0 at a
    out = np.zeros(n + 1)
    out[1:] = np.convolve(weights, increments)[:n]
    out *= y.step ** (-alpha) / gamma(2.0 - alpha)
    return y.with_values(out)


def _trapezoid_weights(count: int, alpha: float) -> np.ndarray:
    # c_0 = 1, c_k = (k + 1)**(alpha + 1) - 2 k**(alpha + 1) + (k - 1)**(alpha + 1)
    power = alpha + 1.0
    weights = np.empty(count)
    weights[0] = 1.0
    if count > 1:
        weights[1] = 2.0 ** power - 2.0
    if count > 2:
        k = np.arange(2, count, dtype=float)
        weights[2:] = k ** power * (np.expm1(power * np.log1p(1.0 / k)) + np.expm1(power * np.log1p(-1.0 / k)))
    return weights


def _start_weights(count: int, alpha: float) -> np.ndarray:
    # a_{n,0} = (n - 1)**(alpha + 1) - (n - alpha - 1) * n**alpha, n = 1..count
    power = alpha + 1.0
    out = np.empty(count)
    out[0] = alpha
    if count > 1:
        n = np.arange(2, count + 1, dtype=float)
        out[1:] = n ** power * (np.expm1(power * np.log1p(-1.0 / n)) + power / n)
    return out


def rl_left_integral_grid(y: GridFn, alpha: Union[FracOrder, float]) -> GridFn:
    alpha = as_alpha(alpha)
    n = y.intervals
    out = np.zeros(n + 1)
    body = np.convolve(_trapezoid_weights(n, alpha), y.values[1:])[:n]
    out[1:] = body + _start_weights(n, alpha) * y.values[0]
    out *= y.step ** alpha / gamma(alpha + 2.0)
    return y.with_values(out)


def rl_right_integral_grid(y: GridFn, alpha: Union[FracOrder, float]) -> GridFn:
    mirrored = rl_left_integral_grid(y.with_values(y.values[::-1]), alpha)
    return y.with_values(mirrored.values[::-1])


def kernel_transform(
    h: Union[GridFn, Callable[[np.ndarray], np.ndarray]],
    alpha: Union[FracOrder, float],
    t: float,
    n: int,
    interval: tuple[float, float] | None = None,
    grading: int | None = None,
) -> float:
    """(b - t)**(1 - alpha) * I_{b-}^alpha[(b - s)**(alpha - 1) h(s)](t)."""
    alpha = as_alpha(alpha)
    if isinstance(h, GridFn):
        a, b = h.a, h.b
    elif interval is not None:
        a, b = interval
    else:
        raise KernelDomainError("an interval is required when h is not a grid function")
    slack = 1e-12 * (b - a)
    if t < a - slack or t > b + slack:
        raise KernelDomainError(f"t={t!r} outside [{a}, {b}]")
    t = min(max(t, a), b)
    if t == b:
        return 0.0
    if grading is None:
        grading = grading_power(alpha)
    integral = kernel_integral(h, t, b, alpha, n, grading)
    return (b - t) ** (1.0 - alpha) * integral / gamma(alpha)


def kernel_transform_bound(sup_h: float, alpha: Union[FracOrder, float], t: float, interval: tuple[float, float]) -> float:
    alpha = as_alpha(alpha)
    return sup_h * gamma(alpha) / gamma(2.0 * alpha) * max(interval[1] - t, 0.0) ** alpha
