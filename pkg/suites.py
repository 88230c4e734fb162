# suites.py

import logging
from typing import Callable, Dict, List, Sequence

import numpy as np

from euler_lagrange import Variation, dubois_reymond_eta, dubois_reymond_pairing
from functionals import pin_boundary
from grid_ops import (
    GridFn,
    caputo_left_grid,
    kernel_transform,
    kernel_transform_bound,
    rl_left_integral_grid,
)
from models import CheckResult
from power_calculus import (
    Anchor,
    PowerSum,
    left_caputo_derivative,
    left_frac_integral,
    left_rl_derivative,
    product_integral,
    right_frac_integral,
    right_rl_derivative,
    shift,
    weighted_inner_product,
)
from quadrature import grading_power, integrate

logger = logging.getLogger(__name__)

SEED = 20240611
IDENTITY_COUNT = 100
IDENTITY_TOL = 1e-12
ORACLE_COUNT = 20
ORACLE_SIZES = (256, 512, 1024, 2048, 4096)
ORACLE_TOL = 1e-3
ORACLE_INTERIOR = 0.05
ORACLE_ALPHAS = (0.25, 0.5, 0.75)
BOUND_COUNT = 10
LEMMA_FORWARD_COUNT = 50
LEMMA_CONVERSE_COUNT = 20
LEMMA_FORWARD_TOL = 1e-10
LEMMA_CONVERSE_RTOL = 1e-8
LEMMA_ALPHAS = (0.25, 0.5, 0.75, 1.0)
BYPARTS_ALPHAS = (0.25, 0.5, 0.75, 1.0, 0.3, 0.6, 0.9, 0.25, 0.5, 0.75)
BYPARTS_TOL = 1e-6
BYPARTS_QUAD_N = 64
CANONICAL_BYPARTS = 0.7522528

Suite = Callable[[], List[CheckResult]]


def _random_power_sum(
    rng: np.random.Generator,
    exponents: Sequence[float],
    anchor: Anchor = Anchor.LEFT,
    interval: tuple[float, float] = (0.0, 1.0),
) -> PowerSum:
    count = int(rng.integers(1, len(exponents) + 1))
    chosen = rng.choice(len(exponents), size=count, replace=False)
    terms = [(rng.uniform(-2.0, 2.0), exponents[i]) for i in chosen]
    return PowerSum(interval[0], interval[1], anchor, tuple(terms))


def _coefficient_gap(p: PowerSum, q: PowerSum) -> float:
    diff = p - q
    scale = max([1.0] + [abs(c) for c in p.coefficients + q.coefficients])
    if diff.is_zero():
        return 0.0
    return max(abs(c) for c in diff.coefficients) / scale


def _identity_check(name: str, gaps: List[float], tol: float = IDENTITY_TOL) -> CheckResult:
    worst = max(gaps) if gaps else 0.0
    return CheckResult(name=name, passed=worst <= tol, detail=f"{len(gaps)} cases, max coefficient error {worst:.3g}")


def check_integral_then_derivative(rng: np.random.Generator) -> CheckResult:
    gaps = []
    for _ in range(IDENTITY_COUNT):
        alpha = rng.uniform(0.05, 1.0)
        exponents = tuple(rng.uniform(-0.9, 5.0, size=3))
        p = _random_power_sum(rng, exponents)
        gaps.append(_coefficient_gap(left_rl_derivative(left_frac_integral(p, alpha), alpha), p))
    return _identity_check("rl_derivative_inverts_integral", gaps)


def check_caputo_then_integral(rng: np.random.Generator) -> CheckResult:
    gaps = []
    for _ in range(IDENTITY_COUNT):
        alpha = rng.uniform(0.05, 1.0)
        exponents = (0.0,) + tuple(rng.uniform(0.05, 5.0, size=3))
        p = _random_power_sum(rng, exponents)
        expected = p - PowerSum.constant(p.a, p.b, p(p.a))
        gaps.append(_coefficient_gap(left_frac_integral(left_caputo_derivative(p, alpha), alpha), expected))
    return _identity_check("integral_inverts_caputo", gaps)


def check_semigroup(rng: np.random.Generator) -> CheckResult:
    gaps = []
    for _ in range(IDENTITY_COUNT):
        alpha, beta_ = rng.uniform(0.05, 0.5, size=2)
        p = _random_power_sum(rng, tuple(rng.uniform(-0.9, 5.0, size=3)))
        twice = left_frac_integral(left_frac_integral(p, beta_), alpha)
        gaps.append(_coefficient_gap(twice, left_frac_integral(p, alpha + beta_)))
    return _identity_check("integral_semigroup", gaps)


def check_linearity(rng: np.random.Generator) -> CheckResult:
    gaps = []
    for _ in range(IDENTITY_COUNT):
        alpha = rng.uniform(0.05, 1.0)
        pool = tuple(rng.uniform(0.0, 5.0, size=4))
        p = _random_power_sum(rng, pool)
        q = _random_power_sum(rng, pool)
        c = float(rng.uniform(-3.0, 3.0))
        for op in (left_frac_integral, left_caputo_derivative):
            gaps.append(_coefficient_gap(op(c * p + q, alpha), c * op(p, alpha) + op(q, alpha)))
    return _identity_check("linearity", gaps)


def check_classical_reduction(rng: np.random.Generator) -> CheckResult:
    gaps = []
    for _ in range(IDENTITY_COUNT):
        p = _random_power_sum(rng, (0.0,) + tuple(rng.uniform(0.05, 4.0, size=3)))
        derivative = p.with_terms((c * e, e - 1.0) for c, e in p.terms if e != 0.0)
        antiderivative = p.with_terms((c / (e + 1.0), e + 1.0) for c, e in p.terms)
        gaps.append(_coefficient_gap(left_caputo_derivative(p, 1.0), derivative))
        gaps.append(_coefficient_gap(left_frac_integral(p, 1.0), antiderivative))
    return _identity_check("alpha_one_is_classical", gaps)


def _interior_error(approx: GridFn, exact: PowerSum) -> float:
    nodes = approx.nodes
    mask = nodes >= approx.a + ORACLE_INTERIOR * (approx.b - approx.a)
    return float(np.max(np.abs(approx.values[mask] - exact(nodes[mask]))))


def check_grid_oracle(rng: np.random.Generator) -> CheckResult:
    failures = []
    worst_final = 0.0
    for index in range(ORACLE_COUNT):
        alpha = ORACLE_ALPHAS[index % len(ORACLE_ALPHAS)]
        p = _random_power_sum(rng, (0.0, alpha, 2.0 * alpha, 1.0, 2.0))
        pairs = (
            ("caputo", caputo_left_grid, left_caputo_derivative(p, alpha)),
            ("integral", rl_left_integral_grid, left_frac_integral(p, alpha)),
        )
        for label, grid_op, exact in pairs:
            errors = [_interior_error(grid_op(GridFn.sample(p, p.a, p.b, size), alpha), exact) for size in ORACLE_SIZES]
            worst_final = max(worst_final, errors[-1])
            monotone = all(later <= earlier + 1e-12 for earlier, later in zip(errors, errors[1:]))
            if errors[-1] > ORACLE_TOL or not monotone:
                failures.append(f"{label} #{index} alpha={alpha}: errors {['%.2e' % e for e in errors]}")
    detail = "; ".join(failures) if failures else f"{ORACLE_COUNT} functions, max error at N=4096 {worst_final:.3g}"
    return CheckResult(name="grid_matches_power_calculus", passed=not failures, detail=detail)


def check_kernel_bound(rng: np.random.Generator) -> CheckResult:
    failures = []
    for index in range(BOUND_COUNT):
        alpha = ORACLE_ALPHAS[index % len(ORACLE_ALPHAS)]
        h = _random_power_sum(rng, (0.0, alpha, 1.0, 2.0))
        sup_h = float(np.max(np.abs(h(np.linspace(0.0, 1.0, 2001)))))
        for t in (0.0, 0.25, 0.5, 0.9):
            value = kernel_transform(h, alpha, t, 64, interval=(0.0, 1.0))
            bound = kernel_transform_bound(sup_h, alpha, t, (0.0, 1.0))
            if abs(value) > bound * (1.0 + 1e-9) + 1e-12:
                failures.append(f"#{index} t={t}: |{value:.6g}| > {bound:.6g}")
    detail = "; ".join(failures) if failures else f"{BOUND_COUNT} functions within the bound"
    return CheckResult(name="kernel_transform_bound", passed=not failures, detail=detail)


def ops_suite() -> List[CheckResult]:
    rng = np.random.default_rng(SEED)
    return [
        check_integral_then_derivative(rng),
        check_caputo_then_integral(rng),
        check_semigroup(rng),
        check_linearity(rng),
        check_classical_reduction(rng),
        check_grid_oracle(rng),
        check_kernel_bound(rng),
    ]


def _random_variation(rng: np.random.Generator, alpha: float) -> Variation:
    q = PowerSum.left(0.0, 1.0, [])
    while q.is_zero():
        q = _random_power_sum(rng, (alpha, 1.0, 1.0 + alpha, 2.0))
    return Variation(pin_boundary(q, alpha, 0.0, 0.0), alpha)


def check_lemma_forward(rng: np.random.Generator) -> CheckResult:
    worst = 0.0
    for index in range(LEMMA_FORWARD_COUNT):
        alpha = LEMMA_ALPHAS[index % len(LEMMA_ALPHAS)]
        eta = _random_variation(rng, alpha)
        k = float(rng.uniform(-3.0, 3.0))
        pairing = dubois_reymond_pairing(lambda s: np.full_like(np.asarray(s, dtype=float), k), eta, alpha)
        worst = max(worst, abs(pairing))
    return CheckResult(
        name="constant_f_pairs_to_zero",
        passed=worst <= LEMMA_FORWARD_TOL,
        detail=f"{LEMMA_FORWARD_COUNT} variations, max |pairing| {worst:.3g}",
    )


def check_lemma_converse(rng: np.random.Generator) -> CheckResult:
    failures = []
    for index in range(LEMMA_CONVERSE_COUNT):
        alpha = LEMMA_ALPHAS[index % len(LEMMA_ALPHAS)]
        f = PowerSum.left(0.0, 1.0, [])
        while all(e == 0.0 for e in f.exponents):
            f = _random_power_sum(rng, (0.0, alpha, 1.0, 1.0 + alpha, 2.0))
        eta, k = dubois_reymond_eta(f, alpha)
        pairing = dubois_reymond_pairing(f, eta, alpha)
        centred = f - PowerSum.constant(0.0, 1.0, k)
        norm = weighted_inner_product(centred, centred, alpha - 1.0, alpha)
        if not (pairing > 0.0 and abs(pairing - norm) <= LEMMA_CONVERSE_RTOL * norm):
            failures.append(f"#{index} alpha={alpha}: pairing {pairing:.12g} vs norm {norm:.12g}")
    detail = "; ".join(failures) if failures else f"{LEMMA_CONVERSE_COUNT} non-constant f, pairing = ||f - k||^2 > 0"
    return CheckResult(name="nonconstant_f_has_witness", passed=not failures, detail=detail)


def lemma_suite() -> List[CheckResult]:
    rng = np.random.default_rng(SEED + 1)
    return [check_lemma_forward(rng), check_lemma_converse(rng)]


def byparts_sides(phi: PowerSum, psi: PowerSum, alpha: float) -> Dict[str, float]:
    """Both sides of the fractional by-parts formula for f = I_{b-}^alpha phi, g = I_{a+}^alpha psi."""
    f = right_frac_integral(phi, alpha)
    g = left_frac_integral(psi, alpha)
    dg = left_rl_derivative(g, alpha)
    df = right_rl_derivative(f, alpha)
    interval = (phi.a, phi.b)
    f_over_weight = shift(f, -alpha)
    return {
        "left": product_integral(f, dg),
        "right": product_integral(g, df),
        "left_quadrature": integrate(lambda t: f_over_weight(t) * dg(t), interval, alpha, BYPARTS_QUAD_N),
        "right_quadrature": integrate(
            lambda t: g(t) * df(t), interval, 0.0, BYPARTS_QUAD_N, grading_power(alpha)
        ),
    }


def _sides_agree(sides: Dict[str, float]) -> bool:
    values = list(sides.values())
    return max(values) - min(values) <= BYPARTS_TOL


def check_byparts_canonical() -> CheckResult:
    one_right = PowerSum.right(0.0, 1.0, [(1.0, 0.0)])
    one_left = PowerSum.left(0.0, 1.0, [(1.0, 0.0)])
    sides = byparts_sides(one_right, one_left, 0.5)
    passed = _sides_agree(sides) and all(abs(v - CANONICAL_BYPARTS) <= BYPARTS_TOL for v in sides.values())
    detail = ", ".join(f"{key}={value:.10g}" for key, value in sides.items())
    return CheckResult(name="byparts_canonical", passed=passed, detail=detail)


def check_byparts_pairs(rng: np.random.Generator) -> CheckResult:
    failures = []
    for index, alpha in enumerate(BYPARTS_ALPHAS):
        phi = _random_power_sum(rng, (0.0, 1.0, 2.0), Anchor.RIGHT)
        psi = _random_power_sum(rng, (0.0, 1.0, 2.0), Anchor.LEFT)
        sides = byparts_sides(phi, psi, alpha)
        if not _sides_agree(sides):
            kind = "classical " if alpha == 1.0 else ""
            failures.append(f"{kind}pair #{index} alpha={alpha}: {sides}")
    detail = "; ".join(failures) if failures else f"{len(BYPARTS_ALPHAS)} pairs agree to {BYPARTS_TOL:g}"
    return CheckResult(name="byparts_pairs", passed=not failures, detail=detail)


def byparts_suite() -> List[CheckResult]:
    rng = np.random.default_rng(SEED + 2)
    return [check_byparts_canonical(), check_byparts_pairs(rng)]


def all_suite() -> List[CheckResult]:
    return ops_suite() + lemma_suite() + byparts_suite()


SUITES: Dict[str, Suite] = {
    "ops": ops_suite,
    "lemma": lemma_suite,
    "byparts": byparts_suite,
    "all": all_suite,
}


def run_suite(name: str) -> List[CheckResult]:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; expected one of {', '.join(SUITES)}")
    results = SUITES[name]()
    failed = [check.name for check in results if not check.passed]
    if failed:
        logger.warning("Suite %s: %s failed", name, ", ".join(failed))
    return results
