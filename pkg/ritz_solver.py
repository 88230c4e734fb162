# ritz_solver.py

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import solve
from scipy.optimize import minimize

from euler_lagrange import (
    FV_ATOL,
    InternalConsistencyError,
    Variation,
    first_variation,
    integral_form_residual,
)
from functionals import (
    AdmissibilityError,
    IntegrandEvaluationError,
    Trajectory,
    VariationalProblem,
    convexity_gap,
    evaluate_weighted,
    pin_boundary,
)
from models import CheckResult, MinimizerReport, SolveResult, SolverOptions
from power_calculus import EXPONENT_TOL, PowerSum, left_caputo_derivative, weighted_inner_product
from quadrature import default_node_count

logger = logging.getLogger(__name__)

BASIS_TOL = 1e-10
SIMPLEX_EDGE = 0.1
DEGENERACY_RTOL = 1e-13
LOAD_RTOL = 1e-13
NONCONVEX_RTOL = 1e-12
CONVEXITY_TOL = 1e-9
EXTRA_PANEL_MODES = 2
COMPETITOR_EXPONENTS = ("alpha", "alpha+1", "alpha+2", "1", "2")


class DegeneracyError(ValueError):
    pass


class SearchEvaluationError(ValueError):
    def __init__(self, message: str, coefficients: Sequence[float]):
        super().__init__(message)
        self.coefficients = list(coefficients)


@dataclass(frozen=True)
class RitzBasis:
    boundary_interpolant: PowerSum
    modes: Tuple[PowerSum, ...]
    alpha: float

    def combine(self, coefficients: Sequence[float]) -> PowerSum:
        out = self.boundary_interpolant
        for coeff, mode in zip(coefficients, self.modes):
            out = out + float(coeff) * mode
        return out

    def trajectory(self, coefficients: Sequence[float]) -> Trajectory:
        return Trajectory.from_power_sum(self.combine(coefficients), self.alpha)


def _scaled_power(prob: VariationalProblem, exponent: float) -> Tuple[float, float]:
    # ((t - a) / (b - a))**exponent as a left term
    return (1.0 / (prob.b - prob.a) ** exponent, exponent)


def build_basis(prob: VariationalProblem, m: int) -> RitzBasis:
    if m < 0:
        raise ValueError(f"basis size must be >= 0, got {m}")
    a, b, alpha = prob.a, prob.b, prob.alpha
    base = _scaled_power(prob, alpha)
    interpolant = PowerSum.left(a, b, [(prob.y_a, 0.0), (base[0] * (prob.y_b - prob.y_a), alpha)])
    modes = []
    for k in range(1, m + 1):
        modes.append(PowerSum.left(a, b, [_scaled_power(prob, alpha + k), (-base[0], alpha)]))
    basis = RitzBasis(interpolant, tuple(modes), alpha)
    _check_basis(prob, basis)
    return basis


def _check_basis(prob: VariationalProblem, basis: RitzBasis) -> None:
    ends = (prob.a, prob.b)
    if abs(basis.boundary_interpolant(prob.a) - prob.y_a) > BASIS_TOL or abs(basis.boundary_interpolant(prob.b) - prob.y_b) > BASIS_TOL:
        raise AdmissibilityError("boundary interpolant misses the boundary values")
    for k, mode in enumerate(basis.modes, start=1):
        if any(abs(mode(t)) > BASIS_TOL for t in ends):
            raise AdmissibilityError(f"mode {k} does not vanish at the endpoints")
        if any(e < prob.alpha - EXPONENT_TOL for e in mode.exponents):
            raise AdmissibilityError(f"mode {k} has an exponent below alpha")


def _mode_label(weights: np.ndarray) -> str:
    parts = [f"{w:+.3g}*mode_{k + 1}" for k, w in enumerate(weights) if abs(w) >= 0.1 * np.max(np.abs(weights))]
    return " ".join(parts)


def _normal_equations(prob: VariationalProblem, basis: RitzBasis) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gram matrix, load vector, and a Cauchy-Schwarz bound on each load entry."""
    lag = prob.lagrangian
    form = lag.quadratic
    weight = prob.alpha - 1.0 + lag.right_exp
    alpha = prob.alpha
    one = PowerSum.constant(prob.a, prob.b, 1.0)
    y0 = basis.boundary_interpolant
    dy0 = left_caputo_derivative(y0, alpha)
    modes = basis.modes
    dmodes = [left_caputo_derivative(mode, alpha) for mode in modes]

    def ip(p: PowerSum, q: PowerSum) -> float:
        if p.is_zero() or q.is_zero():
            return 0.0
        return weighted_inner_product(p, q, weight, alpha)

    def norm(p: PowerSum) -> float:
        return float(np.sqrt(max(ip(p, p), 0.0)))

    m = len(modes)
    gram = np.zeros((m, m))
    load = np.zeros(m)
    bound = np.zeros(m)
    for k in range(m):
        for j in range(k, m):
            entry = 0.0
            if form.c_vv != 0.0:
                entry += form.c_vv * ip(dmodes[k], dmodes[j])
            if form.c_uu != 0.0:
                entry += form.c_uu * ip(modes[k], modes[j])
            gram[k, j] = gram[j, k] = lag.gain * entry
        entry = 0.0
        size = 0.0
        if form.c_vv != 0.0:
            entry += form.c_vv * ip(dy0, dmodes[k])
            size += abs(form.c_vv) * norm(dy0) * norm(dmodes[k])
        if form.c_uu != 0.0:
            entry += form.c_uu * ip(y0, modes[k])
            size += abs(form.c_uu) * norm(y0) * norm(modes[k])
        if form.c_u != 0.0:
            entry += 0.5 * form.c_u * ip(modes[k], one)
            size += 0.5 * abs(form.c_u) * norm(modes[k]) * norm(one)
        if form.c_v != 0.0:
            entry += 0.5 * form.c_v * ip(dmodes[k], one)
            size += 0.5 * abs(form.c_v) * norm(dmodes[k]) * norm(one)
        load[k] = lag.gain * entry
        bound[k] = abs(lag.gain) * size
    return gram, load, bound


def _snap_load(load: np.ndarray, bound: np.ndarray) -> np.ndarray:
    # entries within rounding of their bound are zero, e.g. a constant paired with cD^alpha of a mode
    snapped = load.copy()
    snapped[np.abs(load) <= LOAD_RTOL * bound] = 0.0
    return snapped


def _solve_normal_equations(gram: np.ndarray, load: np.ndarray) -> np.ndarray:
    m = load.size
    scale = float(np.max(np.abs(gram))) if m else 0.0
    if scale == 0.0:
        if np.any(load != 0.0):
            raise DegeneracyError(f"functional is linear in the modes along {_mode_label(load)}; no minimum")
        return np.zeros(m)
    eigenvalues, eigenvectors = np.linalg.eigh(gram)
    if eigenvalues[0] < -NONCONVEX_RTOL * eigenvalues[-1]:
        raise DegeneracyError(
            f"indefinite normal equations (eigenvalue {eigenvalues[0]:.3g}) along {_mode_label(eigenvectors[:, 0])}"
        )
    if eigenvalues[0] <= DEGENERACY_RTOL * eigenvalues[-1]:
        raise DegeneracyError(
            f"singular normal equations (eigenvalue {eigenvalues[0]:.3g}) along {_mode_label(eigenvectors[:, 0])}"
        )
    return solve(gram, -load, assume_a="sym")


def _finish(
    prob: VariationalProblem,
    basis: RitzBasis,
    coefficients: Sequence[float],
    value: float,
    iterations: int,
    converged: bool,
    method: str,
    opts: SolverOptions,
) -> SolveResult:
    trajectory = basis.trajectory(coefficients)
    residual = integral_form_residual(prob, trajectory, opts.sample_count, opts.quad_n)
    logger.info(
        "Solved %s with %s: m=%s value=%.12g iterations=%s converged=%s",
        prob.lagrangian.label,
        method,
        len(basis.modes),
        value,
        iterations,
        converged,
    )
    return SolveResult(
        coefficients=[float(c) for c in coefficients],
        trajectory=trajectory,
        value=value,
        residual=residual,
        iterations=iterations,
        converged=converged,
        method=method,
    )


def solve_quadratic(prob: VariationalProblem, m: int, opts: Optional[SolverOptions] = None) -> SolveResult:
    opts = opts or SolverOptions()
    if prob.lagrangian.quadratic is None:
        raise ValueError(f"solve_quadratic needs a quadratic lagrangian, got {prob.lagrangian.label}")
    basis = build_basis(prob, m)
    gram, load, bound = _normal_equations(prob, basis)
    coefficients = _solve_normal_equations(gram, _snap_load(load, bound))
    value = evaluate_weighted(prob, basis.trajectory(coefficients), method="exact")
    return _finish(prob, basis, coefficients, value, 1, True, "quadratic", opts)


def _final_value(prob: VariationalProblem, basis: RitzBasis, coefficients: Sequence[float], opts: SolverOptions) -> float:
    try:
        return evaluate_weighted(prob, basis.trajectory(coefficients), opts.quad_n)
    except IntegrandEvaluationError as exc:
        raise SearchEvaluationError(f"functional failed at c={list(coefficients)}: {exc}", coefficients) from exc


def solve_general(prob: VariationalProblem, m: int, opts: Optional[SolverOptions] = None) -> SolveResult:
    opts = opts or SolverOptions()
    basis = build_basis(prob, m)
    # the search keeps one fixed rule; the reported value uses the adaptive one unless quad_n is set
    n = opts.quad_n or default_node_count()

    def objective(coefficients: np.ndarray) -> float:
        try:
            value = evaluate_weighted(prob, basis.trajectory(coefficients), n)
        except IntegrandEvaluationError as exc:
            raise SearchEvaluationError(f"functional failed at c={list(coefficients)}: {exc}", coefficients) from exc
        if not np.isfinite(value):
            raise SearchEvaluationError(f"functional is not finite at c={list(coefficients)}", coefficients)
        return value

    if m == 0:
        return _finish(prob, basis, [], _final_value(prob, basis, [], opts), 0, True, "general", opts)

    start = np.zeros(m)
    simplex = np.vstack([start, SIMPLEX_EDGE * np.eye(m)])
    result = minimize(
        objective,
        start,
        method="Nelder-Mead",
        options={
            "xatol": opts.x_tol,
            "fatol": opts.f_tol,
            "maxiter": opts.max_iter,
            "maxfev": 50 * opts.max_iter,
            "initial_simplex": simplex,
        },
    )
    if not result.success:
        logger.warning("Nelder-Mead stopped without converging after %s iterations: %s", result.nit, result.message)
    value = _final_value(prob, basis, result.x, opts)
    return _finish(prob, basis, result.x, value, int(result.nit), bool(result.success), "general", opts)


def random_competitor(prob: VariationalProblem, rng: np.random.Generator) -> Trajectory:
    """Admissible power-sum competitor with exponents from {alpha, alpha+1, alpha+2, 1, 2}."""
    alpha = prob.alpha
    pool = {"alpha": alpha, "alpha+1": alpha + 1.0, "alpha+2": alpha + 2.0, "1": 1.0, "2": 2.0}
    count = int(rng.integers(1, len(COMPETITOR_EXPONENTS) + 1))
    chosen = rng.choice(len(COMPETITOR_EXPONENTS), size=count, replace=False)
    raw = PowerSum.left(
        prob.a,
        prob.b,
        [(rng.uniform(-2.0, 2.0), pool[COMPETITOR_EXPONENTS[i]]) for i in chosen],
    )
    return Trajectory.from_power_sum(pin_boundary(raw, alpha, prob.y_a, prob.y_b), alpha)


def variation_panel(prob: VariationalProblem, m: int) -> List[Variation]:
    basis = build_basis(prob, m + EXTRA_PANEL_MODES)
    return [Variation(mode, prob.alpha) for mode in basis.modes]


def verify_minimizer(
    prob: VariationalProblem,
    res: SolveResult,
    trials: int,
    seed: int = 0,
    quad_n: Optional[int] = None,
) -> MinimizerReport:
    checks: List[CheckResult] = []

    residual = integral_form_residual(prob, res.trajectory, quad_n=quad_n)
    checks.append(
        CheckResult(
            name="residual_constancy",
            passed=residual.constant,
            detail=f"k={residual.k_estimate:.10g} max_deviation={residual.max_deviation:.3g} tolerance={residual.tolerance:.3g}",
        )
    )

    worst = 0.0
    passed = True
    detail = ""
    m = len(res.coefficients)
    for k, eta in enumerate(variation_panel(prob, m), start=1):
        try:
            value = first_variation(prob, res.trajectory, eta, quad_n)
        except InternalConsistencyError as exc:
            passed = False
            detail = str(exc)
            break
        worst = max(worst, abs(value.analytic))
        if abs(value.analytic) > FV_ATOL * max(1.0, abs(res.value)):
            passed = False
            detail = f"mode {k}: first variation {value.analytic:.3g}"
    checks.append(CheckResult(name="first_variation", passed=passed, detail=detail or f"max |dJ|={worst:.3g}"))

    lag = prob.lagrangian
    if lag.quadratic is None or not lag.quadratic.is_energy() or lag.right_exp != 0.0:
        checks.append(
            CheckResult(name="convexity", passed=True, exercised=False, detail="not exercised: lagrangian is not c*v^2")
        )
    elif trials == 0:
        checks.append(CheckResult(name="convexity", passed=True, exercised=False, detail="not exercised: trials=0"))
    else:
        rng = np.random.default_rng(seed)
        gaps = [convexity_gap(prob, res.trajectory, random_competitor(prob, rng), quad_n) for _ in range(trials)]
        smallest = min(gaps)
        checks.append(
            CheckResult(
                name="convexity",
                passed=smallest >= -CONVEXITY_TOL,
                detail=f"min gap over {trials} competitors = {smallest:.3g}",
            )
        )
    return MinimizerReport(checks=checks)
