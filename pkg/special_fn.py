# special_fn.py

import logging
import math

logger = logging.getLogger(__name__)

LANCZOS_G = 7
LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
POLE_TOL = 1e-12
HALF_LOG_TWO_PI = 0.5 * math.log(2.0 * math.pi)


class SpecialFunctionDomainError(ValueError):
    pass


def _is_pole(x: float) -> bool:
    return x <= 0 and abs(x - round(x)) <= POLE_TOL


def _lanczos_sum(z: float) -> float:
    # z is the shifted argument x - 1
    total = LANCZOS_COEFFS[0]
    for i in range(1, LANCZOS_G + 2):
        total += LANCZOS_COEFFS[i] / (z + i)
    return total


def gamma(x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise SpecialFunctionDomainError(f"gamma: argument must be finite, got {x!r}")
    if _is_pole(x):
        raise SpecialFunctionDomainError(f"gamma: pole at x={round(x)}")
    if x < 0.5:
        # Reflection: gamma(x) gamma(1 - x) = pi / sin(pi x)
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))
    z = x - 1.0
    t = z + LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * math.exp(-t) * _lanczos_sum(z)


def log_gamma(x: float) -> float:
    x = float(x)
    if not (x > 0) or not math.isfinite(x):
        raise SpecialFunctionDomainError(f"log_gamma: argument must be positive and finite, got {x!r}")
    if x < 0.5:
        return math.log(math.pi / math.sin(math.pi * x)) - log_gamma(1.0 - x)
    z = x - 1.0
    t = z + LANCZOS_G + 0.5
    return HALF_LOG_TWO_PI + (z + 0.5) * math.log(t) - t + math.log(_lanczos_sum(z))


def beta(x: float, y: float) -> float:
    x = float(x)
    y = float(y)
    if not (x > 0) or not (y > 0):
        raise SpecialFunctionDomainError(f"beta: arguments must be positive, got ({x!r}, {y!r})")
    return math.exp(log_gamma(x) + log_gamma(y) - log_gamma(x + y))


def gamma_ratio(num: float, den: float) -> float:
    """Gamma(num) / Gamma(den) for positive arguments, in log space."""
    return math.exp(log_gamma(num) - log_gamma(den))
