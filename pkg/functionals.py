# functionals.py

import dataclasses
import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Union

import numpy as np

from expression import ExprAst, evaluate, parse_expression
from grid_ops import GridFn, caputo_left_grid
from power_calculus import (
    Anchor,
    FracOrder,
    PowerSum,
    as_alpha,
    left_caputo_derivative,
    weighted_inner_product,
)
from quadrature import QuadratureEvaluationError, grading_power, integrate
from special_fn import gamma

logger = logging.getLogger(__name__)

BOUNDARY_TOL = 1e-9
FD_REL_STEP = 1e-6

Path = Union[PowerSum, GridFn]
PointFn = Callable[..., np.ndarray]


class AdmissibilityError(ValueError):
    pass


class IntegrandEvaluationError(ValueError):
    def __init__(self, message: str, location: Optional[float] = None):
        super().__init__(message)
        self.location = location


@dataclass(frozen=True)
class QuadraticForm:
    """c_vv v^2 + c_uu u^2 + c_u u + c_v v + c_0."""

    c_vv: float = 0.0
    c_uu: float = 0.0
    c_u: float = 0.0
    c_v: float = 0.0
    c_0: float = 0.0

    def value(self, t, u, v):
        return self.c_vv * v * v + self.c_uu * u * u + self.c_u * u + self.c_v * v + self.c_0 + 0.0 * t

    def d_u(self, t, u, v):
        return 2.0 * self.c_uu * u + self.c_u + 0.0 * (t + v)

    def d_v(self, t, u, v):
        return 2.0 * self.c_vv * v + self.c_v + 0.0 * (t + u)

    def is_energy(self) -> bool:
        return self.c_vv > 0 and self.c_uu == self.c_u == self.c_v == self.c_0 == 0.0


@dataclass(frozen=True)
class ExpressionForm:
    ast: ExprAst

    def value(self, t, u, v):
        return evaluate(self.ast, t, u, v)

    def d_u(self, t, u, v):
        u = np.asarray(u, dtype=float)
        step = FD_REL_STEP * np.maximum(1.0, np.abs(u))
        return (evaluate(self.ast, t, u + step, v) - evaluate(self.ast, t, u - step, v)) / (2.0 * step)

    def d_v(self, t, u, v):
        v = np.asarray(v, dtype=float)
        step = FD_REL_STEP * np.maximum(1.0, np.abs(v))
        return (evaluate(self.ast, t, u, v + step) - evaluate(self.ast, t, u, v - step)) / (2.0 * step)


@dataclass(frozen=True)
class Lagrangian:
    """L(t, u, v) = gain * (right_end - t)**right_exp * value(t, u, v).

    value, d_u and d_v are the core callables; the power factor is kept apart
    so integrators can fold it into the quadrature weight.
    """

    label: str
    value: PointFn
    d_u: PointFn
    d_v: PointFn
    quadratic: Optional[QuadraticForm] = None
    gain: float = 1.0
    right_exp: float = 0.0
    right_end: Optional[float] = None

    def factor(self, t):
        if self.right_exp == 0.0:
            return self.gain
        return self.gain * np.power(np.maximum(self.right_end - np.asarray(t, dtype=float), 0.0), self.right_exp)

    def __call__(self, t, u, v):
        return self.factor(t) * self.value(t, u, v)

    def partial_u(self, t, u, v):
        return self.factor(t) * self.d_u(t, u, v)

    def partial_v(self, t, u, v):
        return self.factor(t) * self.d_v(t, u, v)


def quadratic_lagrangian(
    c_vv: float = 0.0,
    c_uu: float = 0.0,
    c_u: float = 0.0,
    c_v: float = 0.0,
    c_0: float = 0.0,
    label: Optional[str] = None,
) -> Lagrangian:
    form = QuadraticForm(float(c_vv), float(c_uu), float(c_u), float(c_v), float(c_0))
    if label is None:
        label = f"quadratic(c_vv={c_vv}, c_uu={c_uu}, c_u={c_u}, c_v={c_v}, c_0={c_0})"
    return Lagrangian(label=label, value=form.value, d_u=form.d_u, d_v=form.d_v, quadratic=form)


def expression_lagrangian(src: str) -> Lagrangian:
    form = ExpressionForm(parse_expression(src))
    return Lagrangian(label=f"expr:{src.strip()}", value=form.value, d_u=form.d_u, d_v=form.d_v)


def lagrangian_from_key(key: str, coefficients: Optional[Dict[str, float]] = None) -> Lagrangian:
    key = key.strip()
    if key == "v2":
        return quadratic_lagrangian(c_vv=1.0, label="v2")
    if key == "quadratic":
        return quadratic_lagrangian(**(coefficients or {}))
    if key.startswith("expr:"):
        return expression_lagrangian(key[len("expr:"):])
    raise ValueError(f"unknown lagrangian {key!r}; expected 'v2', 'quadratic' or 'expr:<text>'")


@dataclass(frozen=True)
class VariationalProblem:
    a: float
    b: float
    alpha: float
    y_a: float
    y_b: float
    lagrangian: Lagrangian

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"interval must satisfy a < b, got [{self.a}, {self.b}]")
        object.__setattr__(self, "alpha", as_alpha(self.alpha))

    @property
    def interval(self) -> tuple[float, float]:
        return (self.a, self.b)

    @property
    def order(self) -> FracOrder:
        return FracOrder(alpha=self.alpha)

    def with_lagrangian(self, lagrangian: Lagrangian) -> "VariationalProblem":
        return dataclasses.replace(self, lagrangian=lagrangian)


def weighted_energy_problem(alpha: Union[FracOrder, float]) -> VariationalProblem:
    return VariationalProblem(0.0, 1.0, as_alpha(alpha), 0.0, 1.0, lagrangian_from_key("v2"))


@dataclass(frozen=True)
class Trajectory:
    path: Path
    caputo: Path
    alpha: float

    @classmethod
    def from_power_sum(cls, p: PowerSum, alpha: Union[FracOrder, float]) -> "Trajectory":
        alpha = as_alpha(alpha)
        return cls(p, left_caputo_derivative(p, alpha), alpha)

    @classmethod
    def from_grid(cls, g: GridFn, alpha: Union[FracOrder, float]) -> "Trajectory":
        alpha = as_alpha(alpha)
        return cls(g, caputo_left_grid(g, alpha), alpha)

    @classmethod
    def of(cls, path: Path, alpha: Union[FracOrder, float]) -> "Trajectory":
        if isinstance(path, PowerSum):
            return cls.from_power_sum(path, alpha)
        return cls.from_grid(path, alpha)

    @property
    def is_exact(self) -> bool:
        return isinstance(self.path, PowerSum)

    @property
    def interval(self) -> tuple[float, float]:
        return (self.path.a, self.path.b)

    def value(self, t):
        return self.path(t)

    def derivative(self, t):
        return self.caputo(t)

    def perturbed(self, eta: Path, eps: float) -> "Trajectory":
        """Trajectory of y + eps * eta; a grid on either side puts the result on that grid."""
        if isinstance(self.path, PowerSum) and isinstance(eta, PowerSum):
            return Trajectory.from_power_sum(self.path + eps * eta, self.alpha)
        grid = eta if isinstance(eta, GridFn) else self.path
        own = self.path if isinstance(self.path, GridFn) else grid.with_values(self.path(grid.nodes))
        other = eta if isinstance(eta, GridFn) else grid.with_values(eta(grid.nodes))
        return Trajectory.from_grid(own + eps * other, self.alpha)

    def attach(self, prob: VariationalProblem) -> "Trajectory":
        if abs(self.alpha - prob.alpha) > 1e-15:
            raise AdmissibilityError(f"trajectory order {self.alpha} differs from problem order {prob.alpha}")
        if self.interval != prob.interval:
            raise AdmissibilityError(f"trajectory interval {self.interval} differs from {prob.interval}")
        if isinstance(self.path, PowerSum) and self.path.anchor is not Anchor.LEFT:
            raise AdmissibilityError("trajectories are left-anchored power sums")
        at_a = self.value(prob.a)
        at_b = self.value(prob.b)
        if abs(at_a - prob.y_a) > BOUNDARY_TOL or abs(at_b - prob.y_b) > BOUNDARY_TOL:
            raise AdmissibilityError(
                f"boundary mismatch: y(a)={at_a!r} (want {prob.y_a!r}), y(b)={at_b!r} (want {prob.y_b!r})"
            )
        return self


def _weight_exp(prob: VariationalProblem) -> float:
    lag = prob.lagrangian
    if lag.right_exp != 0.0 and lag.right_end != prob.b:
        raise ValueError(f"lagrangian factor is anchored at {lag.right_end}, problem ends at {prob.b}")
    return prob.alpha - 1.0 + lag.right_exp


def weighted_lagrangian_integral(prob: VariationalProblem, core: PointFn, n: Optional[int] = None) -> float:
    """(1/Gamma(alpha)) * integral of (b - t)**(alpha - 1) * gain * (b - t)**right_exp * core(t)."""
    try:
        value = integrate(core, prob.interval, _weight_exp(prob), n, grading_power(prob.alpha))
    except QuadratureEvaluationError as exc:
        raise IntegrandEvaluationError(f"{prob.lagrangian.label}: {exc}", exc.location) from exc
    return prob.lagrangian.gain * value / gamma(prob.alpha)


def _exact_quadratic(prob: VariationalProblem, y: Trajectory) -> float:
    form = prob.lagrangian.quadratic
    weight = _weight_exp(prob)
    u = y.path
    v = y.caputo
    one = PowerSum.constant(prob.a, prob.b, 1.0)
    pairs = (
        (form.c_vv, v, v),
        (form.c_uu, u, u),
        (form.c_u, u, one),
        (form.c_v, v, one),
        (form.c_0, one, one),
    )
    total = 0.0
    for coeff, p, q in pairs:
        if coeff != 0.0:
            total += coeff * weighted_inner_product(p, q, weight, prob.alpha)
    return prob.lagrangian.gain * total


def evaluate_weighted(prob: VariationalProblem, y: Trajectory, n: Optional[int] = None, method: str = "auto") -> float:
    y = y.attach(prob)
    lag = prob.lagrangian
    if method not in ("auto", "exact", "quadrature"):
        raise ValueError(f"unknown evaluation method {method!r}")
    if method == "exact" or (method == "auto" and lag.quadratic is not None and y.is_exact):
        if lag.quadratic is None or not y.is_exact:
            raise ValueError("exact evaluation needs a quadratic lagrangian and a power-sum trajectory")
        return _exact_quadratic(prob, y)
    value = weighted_lagrangian_integral(prob, lambda t: lag.value(t, y.value(t), y.derivative(t)), n)
    if not np.isfinite(value):
        raise IntegrandEvaluationError(f"{lag.label}: functional value is not finite")
    return value


def rescale_for_unweighted(lagrangian: Lagrangian, prob: VariationalProblem) -> Lagrangian:
    """Gamma(alpha) * (b - t)**(1 - alpha) * L, whose weighted functional is the plain integral of L."""
    if lagrangian.right_exp != 0.0 and lagrangian.right_end != prob.b:
        raise ValueError("cannot rescale a lagrangian anchored at a different endpoint")
    return dataclasses.replace(
        lagrangian,
        label=f"rescaled({lagrangian.label})",
        gain=lagrangian.gain * gamma(prob.alpha),
        right_exp=lagrangian.right_exp + 1.0 - prob.alpha,
        right_end=prob.b,
    )


def evaluate_unweighted(prob: VariationalProblem, y: Trajectory, n: Optional[int] = None, method: str = "auto") -> float:
    rescaled = prob.with_lagrangian(rescale_for_unweighted(prob.lagrangian, prob))
    return evaluate_weighted(rescaled, y, n, method)


def convexity_gap(
    prob: VariationalProblem,
    y_candidate: Trajectory,
    x_competitor: Trajectory,
    n: Optional[int] = None,
) -> float:
    lag = prob.lagrangian
    if lag.quadratic is None or not lag.quadratic.is_energy() or lag.right_exp != 0.0:
        raise ValueError(f"convexity_gap applies to the L = c v^2 family, got {lag.label}")
    y_candidate.attach(prob)
    x_competitor.attach(prob)
    return evaluate_weighted(prob, x_competitor, n) - evaluate_weighted(prob, y_candidate, n)


def pin_boundary(q: PowerSum, alpha: Union[FracOrder, float], y_a: float, y_b: float) -> PowerSum:
    """q - q(a) + y_a + (y_b - y_a - (q(b) - q(a))) * ((t - a) / (b - a))**alpha."""
    alpha = as_alpha(alpha)
    q_a = q(q.a)
    q_b = q(q.b)
    correction = PowerSum.left(
        q.a,
        q.b,
        [(y_a - q_a, 0.0), ((y_b - y_a - (q_b - q_a)) / q.length ** alpha, alpha)],
    )
    return q + correction
