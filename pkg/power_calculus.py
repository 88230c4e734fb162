# power_calculus.py

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from special_fn import beta, gamma, gamma_ratio

logger = logging.getLogger(__name__)

EXPONENT_TOL = 1e-12
POLE_TOL = 1e-12
DOMAIN_SLACK = 1e-12

Term = Tuple[float, float]


class NonRepresentableError(ValueError):
    pass


class SingularityError(ValueError):
    pass


class NonIntegrableError(ValueError):
    pass


class Anchor(str, Enum):
    LEFT = "left"
    RIGHT = "right"


class FracOrder(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha: float = Field(gt=0, le=1)


def as_alpha(alpha: Union[FracOrder, float]) -> float:
    if isinstance(alpha, FracOrder):
        return alpha.alpha
    return FracOrder(alpha=float(alpha)).alpha


def _normalize_terms(terms: Iterable[Sequence[float]]) -> Tuple[Term, ...]:
    ordered = sorted(((float(c), float(e)) for c, e in terms), key=lambda term: term[1])
    merged: list[list[float]] = []
    for coeff, exponent in ordered:
        if not math.isfinite(coeff) or not math.isfinite(exponent):
            raise NonRepresentableError(f"non-finite term ({coeff!r}, {exponent!r})")
        if merged and abs(exponent - merged[-1][1]) <= EXPONENT_TOL:
            merged[-1][0] += coeff
        else:
            merged.append([coeff, exponent])
    out = []
    for coeff, exponent in merged:
        if coeff == 0.0:
            continue
        if exponent <= -1:
            raise NonRepresentableError(f"exponent {exponent!r} is not integrable (must exceed -1)")
        out.append((coeff, exponent))
    return tuple(out)


@dataclass(frozen=True)
class PowerSum:
    """Finite sum of c * (t - a)**e (left anchor) or c * (b - t)**e (right anchor) on [a, b]."""

    a: float
    b: float
    anchor: Anchor
    terms: Tuple[Term, ...] = ()

    def __post_init__(self):
        if not (self.a < self.b):
            raise ValueError(f"interval must satisfy a < b, got [{self.a}, {self.b}]")
        object.__setattr__(self, "anchor", Anchor(self.anchor))
        object.__setattr__(self, "terms", _normalize_terms(self.terms))

    @classmethod
    def left(cls, a: float, b: float, terms: Iterable[Sequence[float]] = ()) -> "PowerSum":
        return cls(float(a), float(b), Anchor.LEFT, tuple(terms))

    @classmethod
    def right(cls, a: float, b: float, terms: Iterable[Sequence[float]] = ()) -> "PowerSum":
        return cls(float(a), float(b), Anchor.RIGHT, tuple(terms))

    @classmethod
    def constant(cls, a: float, b: float, value: float, anchor: Anchor = Anchor.LEFT) -> "PowerSum":
        return cls(float(a), float(b), anchor, ((value, 0.0),))

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def exponents(self) -> Tuple[float, ...]:
        return tuple(e for _, e in self.terms)

    @property
    def coefficients(self) -> Tuple[float, ...]:
        return tuple(c for c, _ in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def with_terms(self, terms: Iterable[Sequence[float]]) -> "PowerSum":
        return PowerSum(self.a, self.b, self.anchor, tuple(terms))

    def anchor_value(self) -> float:
        """Value at the anchoring endpoint; requires every exponent >= 0."""
        if any(e < -EXPONENT_TOL for e in self.exponents):
            raise SingularityError("power sum is singular at its anchor")
        return sum(c for c, e in self.terms if abs(e) <= EXPONENT_TOL)

    def _same_space(self, other: "PowerSum") -> None:
        if (self.a, self.b) != (other.a, other.b) or self.anchor != other.anchor:
            raise ValueError(
                f"incompatible power sums: [{self.a}, {self.b}]/{self.anchor.value} "
                f"vs [{other.a}, {other.b}]/{other.anchor.value}"
            )

    def __add__(self, other: "PowerSum") -> "PowerSum":
        self._same_space(other)
        return self.with_terms(self.terms + other.terms)

    def __sub__(self, other: "PowerSum") -> "PowerSum":
        return self + (-other)

    def __neg__(self) -> "PowerSum":
        return self.with_terms((-c, e) for c, e in self.terms)

    def __mul__(self, scalar: float) -> "PowerSum":
        if isinstance(scalar, PowerSum):
            return NotImplemented
        return self.with_terms((c * float(scalar), e) for c, e in self.terms)

    __rmul__ = __mul__

    def eval(self, t):
        arr = np.asarray(t, dtype=float)
        slack = DOMAIN_SLACK * self.length
        if np.any(arr < self.a - slack) or np.any(arr > self.b + slack):
            raise ValueError(f"evaluation point outside [{self.a}, {self.b}]")
        dist = arr - self.a if self.anchor is Anchor.LEFT else self.b - arr
        dist = np.clip(dist, 0.0, None)
        if any(e < 0 for e in self.exponents) and np.any(dist == 0.0):
            endpoint = self.a if self.anchor is Anchor.LEFT else self.b
            raise SingularityError(f"power sum is singular at t={endpoint}")
        total = np.zeros_like(dist)
        for coeff, exponent in self.terms:
            total = total + coeff * np.power(dist, exponent)
        if total.ndim == 0:
            return float(total)
        return total

    __call__ = eval


def _require_anchor(p: PowerSum, anchor: Anchor, op: str) -> None:
    if p.anchor is not anchor:
        raise ValueError(f"{op} expects a {anchor.value}-anchored power sum, got {p.anchor.value}")


def _frac_integral(p: PowerSum, alpha: float) -> PowerSum:
    return p.with_terms((c * gamma_ratio(e + 1.0, e + 1.0 + alpha), e + alpha) for c, e in p.terms)


def _is_annihilated(shifted: float) -> bool:
    return shifted < 0.5 and abs(shifted - round(shifted)) <= POLE_TOL


def _rl_derivative(p: PowerSum, alpha: float, op: str) -> PowerSum:
    out = []
    for coeff, exponent in p.terms:
        shifted = exponent + 1.0 - alpha
        if _is_annihilated(shifted):
            continue
        new_exponent = exponent - alpha
        if new_exponent <= -1:
            raise NonRepresentableError(
                f"{op}: term with exponent {exponent!r} has derivative exponent {new_exponent!r} <= -1"
            )
        out.append((coeff * gamma_ratio(exponent + 1.0, shifted), new_exponent))
    return p.with_terms(out)


def left_frac_integral(p: PowerSum, alpha: Union[FracOrder, float]) -> PowerSum:
    _require_anchor(p, Anchor.LEFT, "left_frac_integral")
    return _frac_integral(p, as_alpha(alpha))


def right_frac_integral(p: PowerSum, alpha: Union[FracOrder, float]) -> PowerSum:
    _require_anchor(p, Anchor.RIGHT, "right_frac_integral")
    return _frac_integral(p, as_alpha(alpha))


def left_rl_derivative(p: PowerSum, alpha: Union[FracOrder, float]) -> PowerSum:
    _require_anchor(p, Anchor.LEFT, "left_rl_derivative")
    return _rl_derivative(p, as_alpha(alpha), "left_rl_derivative")


def right_rl_derivative(p: PowerSum, alpha: Union[FracOrder, float]) -> PowerSum:
    _require_anchor(p, Anchor.RIGHT, "right_rl_derivative")
    return _rl_derivative(p, as_alpha(alpha), "right_rl_derivative")


def left_caputo_derivative(p: PowerSum, alpha: Union[FracOrder, float]) -> PowerSum:
    _require_anchor(p, Anchor.LEFT, "left_caputo_derivative")
    if any(e < -EXPONENT_TOL for e in p.exponents):
        raise NonRepresentableError(
            f"left_caputo_derivative: negative exponent {min(p.exponents)!r}, f(a) is not finite"
        )
    shifted = p.with_terms((c, e) for c, e in p.terms if abs(e) > EXPONENT_TOL)
    return _rl_derivative(shifted, as_alpha(alpha), "left_caputo_derivative")


def _beta_integral(left_exp: float, right_exp: float, length: float) -> float:
    # integral over [a, b] of (t - a)**left_exp * (b - t)**right_exp
    if left_exp <= -1 or right_exp <= -1:
        raise NonIntegrableError(
            f"divergent term (t-a)^{left_exp!r} (b-t)^{right_exp!r}: exponents must exceed -1"
        )
    return length ** (left_exp + right_exp + 1.0) * beta(left_exp + 1.0, right_exp + 1.0)


def product_integral(p: PowerSum, q: PowerSum, weight_exp: float = 0.0) -> float:
    """Exact integral over [a, b] of (b - t)**weight_exp * p(t) * q(t), for any anchors."""
    if (p.a, p.b) != (q.a, q.b):
        raise ValueError("product_integral: power sums live on different intervals")
    if weight_exp <= -1:
        raise NonIntegrableError(f"weight exponent {weight_exp!r} must exceed -1")
    total = 0.0
    for c, e in p.terms:
        for d, f in q.terms:
            if p.anchor is Anchor.LEFT and q.anchor is Anchor.LEFT:
                left_exp, right_exp = e + f, weight_exp
            elif p.anchor is Anchor.RIGHT and q.anchor is Anchor.RIGHT:
                left_exp, right_exp = 0.0, e + f + weight_exp
            elif p.anchor is Anchor.LEFT:
                left_exp, right_exp = e, f + weight_exp
            else:
                left_exp, right_exp = f, e + weight_exp
            total += c * d * _beta_integral(left_exp, right_exp, p.length)
    return total


def weighted_inner_product(
    p: PowerSum,
    q: PowerSum,
    weight_exp: float,
    alpha: Union[FracOrder, float],
) -> float:
    _require_anchor(p, Anchor.LEFT, "weighted_inner_product")
    _require_anchor(q, Anchor.LEFT, "weighted_inner_product")
    return product_integral(p, q, weight_exp) / gamma(as_alpha(alpha))


def shift(p: PowerSum, delta: float) -> PowerSum:
    """Multiply by (distance to the anchor)**delta."""
    return p.with_terms((c, e + delta) for c, e in p.terms)


def reanchor(p: PowerSum) -> PowerSum:
    """Binomial re-expansion into the opposite anchor; exponents must be nonnegative integers."""
    out = []
    for coeff, exponent in p.terms:
        k = round(exponent)
        if k < 0 or abs(exponent - k) > EXPONENT_TOL:
            raise NonRepresentableError(
                f"reanchor: exponent {exponent!r} is not a nonnegative integer"
            )
        for j in range(k + 1):
            out.append((coeff * math.comb(k, j) * p.length ** (k - j) * (-1.0) ** j, float(j)))
    target = Anchor.RIGHT if p.anchor is Anchor.LEFT else Anchor.LEFT
    return PowerSum(p.a, p.b, target, tuple(out))
