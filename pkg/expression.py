# expression.py

import logging
import re
from dataclasses import dataclass, field
from typing import FrozenSet, List, Tuple, Union

import numpy as np

from special_fn import SpecialFunctionDomainError, gamma

logger = logging.getLogger(__name__)

VARIABLES = ("t", "u", "v")
FUNCTIONS = ("gamma", "exp", "ln", "sin", "cos", "abs")
INTEGER_TOL = 1e-12

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<symbol>[-+*/^()]))"
)


class ExpressionSyntaxError(ValueError):
    def __init__(self, message: str, offset: int, expected: FrozenSet[str] = frozenset()):
        detail = f"{message} at offset {offset}"
        if expected:
            detail += f" (expected one of: {', '.join(sorted(expected))})"
        super().__init__(detail)
        self.offset = offset
        self.expected = expected


class ExpressionDomainError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


@dataclass(frozen=True)
class Const:
    value: float
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Var:
    name: str
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Neg:
    operand: "ExprAst"
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "ExprAst"
    right: "ExprAst"
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Call:
    func: str
    arg: "ExprAst"
    offset: int = field(default=0, compare=False)


ExprAst = Union[Const, Var, Neg, BinOp, Call]
Token = Tuple[str, str, int]


def _tokenize(src: str) -> List[Token]:
    tokens: List[Token] = []
    pos = 0
    while pos < len(src):
        if src[pos:].strip() == "":
            break
        match = _TOKEN_RE.match(src, pos)
        if match is None:
            offset = pos + len(src[pos:]) - len(src[pos:].lstrip())
            raise ExpressionSyntaxError(f"unexpected character {src[offset]!r}", offset)
        kind = match.lastgroup
        tokens.append((kind, match.group(kind), match.start(kind)))
        pos = match.end()
    tokens.append(("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.tokens = _tokenize(src)
        self.pos = 0

    def _peek(self) -> Token:
        return self.tokens[self.pos]

    def _advance(self) -> Token:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def _expect(self, symbol: str) -> Token:
        kind, text, offset = self._peek()
        if kind != "symbol" or text != symbol:
            found = text or "end of input"
            raise ExpressionSyntaxError(f"unexpected {found!r}", offset, frozenset({symbol}))
        return self._advance()

    def parse(self) -> ExprAst:
        node = self._expr()
        kind, text, offset = self._peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected {text!r}", offset, frozenset({"+", "-", "*", "/", "^", "end of input"}))
        return node

    def _expr(self) -> ExprAst:
        node = self._term()
        while self._peek()[0] == "symbol" and self._peek()[1] in ("+", "-"):
            _, op, offset = self._advance()
            node = BinOp(op, node, self._term(), offset)
        return node

    def _term(self) -> ExprAst:
        node = self._unary()
        while self._peek()[0] == "symbol" and self._peek()[1] in ("*", "/"):
            _, op, offset = self._advance()
            node = BinOp(op, node, self._unary(), offset)
        return node

    def _unary(self) -> ExprAst:
        kind, text, offset = self._peek()
        if kind == "symbol" and text == "-":
            self._advance()
            return Neg(self._unary(), offset)
        return self._power()

    def _power(self) -> ExprAst:
        base = self._atom()
        kind, text, offset = self._peek()
        if kind == "symbol" and text == "^":
            self._advance()
            return BinOp("^", base, self._unary(), offset)
        return base

    def _atom(self) -> ExprAst:
        kind, text, offset = self._advance()
        if kind == "number":
            return Const(float(text), offset)
        if kind == "ident":
            if text in VARIABLES:
                return Var(text, offset)
            if text in FUNCTIONS:
                self._expect("(")
                arg = self._expr()
                self._expect(")")
                return Call(text, arg, offset)
            raise ExpressionSyntaxError(f"unknown identifier {text!r}", offset, frozenset(VARIABLES + FUNCTIONS))
        if kind == "symbol" and text == "(":
            node = self._expr()
            self._expect(")")
            return node
        found = text or "end of input"
        raise ExpressionSyntaxError(
            f"unexpected {found!r}", offset, frozenset({"number", "(", "-"} | set(VARIABLES) | set(FUNCTIONS))
        )


def parse_expression(src: str) -> ExprAst:
    return _Parser(src).parse()


def to_source(node: ExprAst) -> str:
    if isinstance(node, Const):
        return repr(float(node.value))
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_source(node.operand)})"
    if isinstance(node, BinOp):
        return f"({to_source(node.left)} {node.op} {to_source(node.right)})"
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


def _gamma_elementwise(x: np.ndarray, offset: int) -> np.ndarray:
    try:
        return np.vectorize(gamma, otypes=[float])(x)
    except SpecialFunctionDomainError as exc:
        raise ExpressionDomainError(str(exc), offset) from exc


def _power(base: np.ndarray, exponent: np.ndarray, offset: int) -> np.ndarray:
    base, exponent = np.broadcast_arrays(base, exponent)
    fractional = np.abs(exponent - np.round(exponent)) > INTEGER_TOL
    if np.any((base < 0) & fractional):
        raise ExpressionDomainError("fractional power of a negative base", offset)
    if np.any((base == 0) & (exponent < 0)):
        raise ExpressionDomainError("zero raised to a negative power", offset)
    # integer exponents of negative bases
    return np.where(fractional, np.power(np.abs(base), exponent), np.power(base, np.round(exponent)))


def evaluate(node: ExprAst, t, u, v):
    """Evaluate on scalars or broadcastable arrays."""
    with np.errstate(all="ignore"):
        out = _evaluate(node, np.asarray(t, dtype=float), np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    if np.ndim(out) == 0:
        return float(out)
    return out


def _evaluate(node: ExprAst, t: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    if isinstance(node, Const):
        return np.asarray(node.value)
    if isinstance(node, Var):
        return {"t": t, "u": u, "v": v}[node.name]
    if isinstance(node, Neg):
        return -_evaluate(node.operand, t, u, v)
    if isinstance(node, BinOp):
        left = _evaluate(node.left, t, u, v)
        right = _evaluate(node.right, t, u, v)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if node.op == "/":
            if np.any(right == 0):
                raise ExpressionDomainError("division by zero", node.offset)
            return left / right
        return _power(left, right, node.offset)
    if isinstance(node, Call):
        arg = _evaluate(node.arg, t, u, v)
        if node.func == "ln":
            if np.any(arg <= 0):
                raise ExpressionDomainError("ln of a nonpositive value", node.offset)
            return np.log(arg)
        if node.func == "gamma":
            return _gamma_elementwise(arg, node.offset)
        return {"exp": np.exp, "sin": np.sin, "cos": np.cos, "abs": np.abs}[node.func](arg)
    raise TypeError(f"not an expression node: {node!r}")
