# euler_lagrange.py

import logging
import math
import os
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from functionals import (
    AdmissibilityError,
    Trajectory,
    VariationalProblem,
    evaluate_unweighted,
    evaluate_weighted,
    weighted_energy_problem,
    weighted_lagrangian_integral,
)
from grid_ops import GridFn, caputo_left_grid, kernel_transform, rl_left_integral_grid
from models import FirstVariation, ObstructionReport, ResidualReport
from power_calculus import (
    FracOrder,
    NonRepresentableError,
    PowerSum,
    as_alpha,
    left_caputo_derivative,
    left_frac_integral,
    reanchor,
    right_rl_derivative,
    shift,
)
from quadrature import (
    QuadratureEvaluationError,
    default_node_count,
    partial_kernel_integral,
    weighted_integral,
)
from special_fn import gamma

logger = logging.getLogger(__name__)

DEFAULT_RESIDUAL_SAMPLES = 33
RESIDUAL_REL_TOL = 1e-6
VARIATION_TOL = 1e-10
FD_EPS = 1e-5
FV_RTOL = 1e-6
FV_ATOL = 1e-8
AGRAWAL_SAMPLE_T = 0.99

Path = Union[PowerSum, GridFn]


class InternalConsistencyError(Exception):
    pass


class ResidualEvaluationError(ValueError):
    def __init__(self, message: str, location: float):
        super().__init__(message)
        self.location = location


def default_sample_count() -> int:
    raw = os.getenv("FRACVAR_RESIDUAL_SAMPLES", str(DEFAULT_RESIDUAL_SAMPLES))
    try:
        value = int(raw)
    except ValueError:
        value = 0
    if value < 2:
        logger.warning("Ignoring FRACVAR_RESIDUAL_SAMPLES=%r, expected an integer >= 2", raw)
        return DEFAULT_RESIDUAL_SAMPLES
    return value


@dataclass(frozen=True)
class Variation:
    eta: Path
    alpha: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_alpha(self.alpha))
        at_a = self.eta(self.eta.a)
        at_b = self.eta(self.eta.b)
        if abs(at_a) > VARIATION_TOL or abs(at_b) > VARIATION_TOL:
            raise AdmissibilityError(f"variation must vanish at both ends, got eta(a)={at_a!r}, eta(b)={at_b!r}")

    def caputo(self) -> Path:
        if isinstance(self.eta, PowerSum):
            return left_caputo_derivative(self.eta, self.alpha)
        return caputo_left_grid(self.eta, self.alpha)


def chebyshev_points(a: float, b: float, count: int) -> np.ndarray:
    """Chebyshev extrema on [a, b], ascending, both endpoints included."""
    k = np.arange(count)
    points = 0.5 * (a + b) - 0.5 * (b - a) * np.cos(np.pi * k / (count - 1))
    points[0] = a
    points[-1] = b
    return points


def integral_form_residual(
    prob: VariationalProblem,
    y: Trajectory,
    sample_count: Optional[int] = None,
    quad_n: Optional[int] = None,
) -> ResidualReport:
    y = y.attach(prob)
    lag = prob.lagrangian
    count = sample_count or default_sample_count()
    n = quad_n or default_node_count()

    def h(s):
        return lag.partial_u(s, y.value(s), y.derivative(s))

    ts = chebyshev_points(prob.a, prob.b, count)
    values: List[float] = []
    for t in ts:
        try:
            first = kernel_transform(h, prob.alpha, float(t), n, interval=prob.interval)
        except QuadratureEvaluationError as exc:
            raise ResidualEvaluationError(f"kernel transform at t={t!r}: {exc}", float(t)) from exc
        residual = first + float(lag.partial_v(t, y.value(t), y.derivative(t)))
        if not math.isfinite(residual):
            raise ResidualEvaluationError(f"residual is not finite at t={t!r}", float(t))
        values.append(residual)

    k_estimate = float(np.mean(values))
    max_deviation = float(np.max(np.abs(np.asarray(values) - k_estimate)))
    tolerance = RESIDUAL_REL_TOL * max(1.0, abs(k_estimate))
    logger.debug("Residual for %s: k=%s max_deviation=%s", lag.label, k_estimate, max_deviation)
    return ResidualReport(
        sample_ts=[float(t) for t in ts],
        residual_values=values,
        k_estimate=k_estimate,
        max_deviation=max_deviation,
        tolerance=tolerance,
        constant=max_deviation <= tolerance,
    )


def differential_form_residual(prob: VariationalProblem, y: Trajectory, t_samples: Sequence[float]) -> List[float]:
    if prob.alpha >= 1.0:
        raise ValueError("the differential form holds for alpha < 1 only")
    lag = prob.lagrangian
    if lag.quadratic is None or not y.is_exact:
        raise NonRepresentableError(
            "differential form needs a quadratic lagrangian and a power-sum trajectory; use integral_form_residual"
        )
    if lag.right_exp != 0.0 and lag.right_end != prob.b:
        raise ValueError("lagrangian factor must be anchored at the right endpoint")
    y = y.attach(prob)
    form = lag.quadratic
    v = y.caputo
    core_v = 2.0 * form.c_vv * v + PowerSum.constant(prob.a, prob.b, form.c_v)
    try:
        right = reanchor(core_v)
    except NonRepresentableError as exc:
        raise NonRepresentableError(
            f"h(t) = (b-t)^(alpha-1) L_v is not a finite right power sum ({exc}); use integral_form_residual"
        ) from exc
    h = lag.gain * shift(right, prob.alpha - 1.0 + lag.right_exp)
    dh = right_rl_derivative(h, prob.alpha)

    out = []
    for t in t_samples:
        if not prob.a <= t < prob.b:
            raise ValueError(f"sample t={t!r} outside [{prob.a}, {prob.b})")
        first = (prob.b - t) ** (prob.alpha - 1.0) * float(lag.partial_u(t, y.value(t), y.derivative(t)))
        out.append(first + dh(t))
    return out


def dubois_reymond_eta(f: Path, alpha: Union[FracOrder, float]) -> Tuple[Variation, float]:
    alpha = as_alpha(alpha)
    a, b = f.a, f.b
    if isinstance(f, PowerSum):
        if any(e < 0 for e in f.exponents):
            raise NonRepresentableError("f must be continuous on [a, b] (exponents >= 0)")
        integral = left_frac_integral(f, alpha)
        k = integral(b) * gamma(alpha + 1.0) / (b - a) ** alpha
        eta = integral - PowerSum.left(a, b, [(k / gamma(alpha + 1.0), alpha)])
        return Variation(eta, alpha), k
    integral = rl_left_integral_grid(f, alpha)
    k = float(integral.values[-1]) * gamma(alpha + 1.0) / (b - a) ** alpha
    eta = integral.values - k * (f.nodes - a) ** alpha / gamma(alpha + 1.0)
    return Variation(f.with_values(eta), alpha), k


def dubois_reymond_pairing(
    f: Union[Path, Callable[[np.ndarray], np.ndarray]],
    eta: Variation,
    alpha: Union[FracOrder, float],
    quad_n: Optional[int] = None,
) -> float:
    d_eta = eta.caputo()
    interval = (eta.eta.a, eta.eta.b)
    return weighted_integral(lambda s: f(s) * d_eta(s), interval, alpha, quad_n)


def first_variation(
    prob: VariationalProblem,
    y: Trajectory,
    eta: Variation,
    quad_n: Optional[int] = None,
) -> FirstVariation:
    y = y.attach(prob)
    n = quad_n or default_node_count()
    lag = prob.lagrangian
    plus = evaluate_weighted(prob, y.perturbed(eta.eta, FD_EPS), n)
    minus = evaluate_weighted(prob, y.perturbed(eta.eta, -FD_EPS), n)
    finite_difference = (plus - minus) / (2.0 * FD_EPS)

    d_eta = eta.caputo()

    def core(s):
        u = y.value(s)
        v = y.derivative(s)
        return lag.d_u(s, u, v) * eta.eta(s) + lag.d_v(s, u, v) * d_eta(s)

    analytic = weighted_lagrangian_integral(prob, core, n)
    gap = abs(analytic - finite_difference)
    if gap > max(FV_RTOL * max(abs(analytic), abs(finite_difference)), FV_ATOL):
        raise InternalConsistencyError(
            f"first variation mismatch for {lag.label}: analytic={analytic!r}, "
            f"finite difference={finite_difference!r}"
        )
    return FirstVariation(analytic=analytic, finite_difference=finite_difference)


def agrawal_candidate(alpha: Union[FracOrder, float], t: float, n: Optional[int] = None) -> float:
    """y(t) = integral over [0, t] of (t - s)**(alpha - 1) * (1 - s)**(alpha - 1), for 0 <= t < 1."""
    alpha = as_alpha(alpha)
    if not 0.0 <= t < 1.0:
        raise ValueError(f"t={t!r} outside [0, 1)")
    return partial_kernel_integral(lambda s: (1.0 - s) ** (alpha - 1.0), t, alpha, n or default_node_count())


def agrawal_endpoint_value(alpha: Union[FracOrder, float]) -> Optional[float]:
    """y(1) = 1 / (2 alpha - 1) for alpha > 1/2; None where the integral diverges."""
    alpha = as_alpha(alpha)
    if alpha <= 0.5:
        return None
    return 1.0 / (2.0 * alpha - 1.0)


def unweighted_obstruction(alpha: Union[FracOrder, float]) -> ObstructionReport:
    alpha = as_alpha(alpha)
    # The stationarity condition for Gamma(alpha)(1-t)^(1-alpha) v^2 reads
    # cD^alpha y = k / (2 Gamma(alpha)) * (1-t)^(alpha-1).
    forced = PowerSum.right(0.0, 1.0, [(1.0 / (2.0 * gamma(alpha)), alpha - 1.0)])
    derivation = [
        "stationarity: 2 Gamma(alpha) (1-t)^(1-alpha) cD^alpha y(t) = k on [0, 1]",
        f"so cD^alpha y(t) = k / (2 Gamma(alpha)) * (1-t)^({alpha - 1.0:g})",
    ]
    agrawal = dict(
        agrawal_t=AGRAWAL_SAMPLE_T,
        agrawal_derivative=(1.0 - AGRAWAL_SAMPLE_T) ** (alpha - 1.0),
        agrawal_midpoint_value=agrawal_candidate(alpha, 0.5),
        agrawal_endpoint_value=agrawal_endpoint_value(alpha),
    )

    if min(forced.exponents) < 0:
        derivation += [
            "the right side is unbounded at t=1 unless k = 0; continuity of cD^alpha y forces k = 0",
            "then cD^alpha y = 0, so y(t) = y(0) + I^alpha[0](t) = y(0) is constant",
            "y(0) = 0 and y(1) = 1 cannot both hold: no minimizer in F",
        ]
        logger.info("Unweighted problem at alpha=%s has no minimizer in F", alpha)
        return ObstructionReport(alpha=alpha, has_solution=False, k=0.0, derivation=derivation, **agrawal)

    # alpha = 1: y' = k / 2, y(0) = 0, y(1) = 1
    k = 2.0
    line = Trajectory.from_power_sum(PowerSum.left(0.0, 1.0, [(1.0, 1.0)]), alpha)
    value = evaluate_unweighted(weighted_energy_problem(alpha), line)
    derivation += [
        "at alpha = 1 the factor is 1, so y' = k / 2 is constant",
        "y(0) = 0 and y(1) = 1 give k = 2 and y(t) = t",
    ]
    return ObstructionReport(
        alpha=alpha,
        has_solution=True,
        k=k,
        solution="y(t) = t",
        value=value,
        derivation=derivation,
        **agrawal,
    )
