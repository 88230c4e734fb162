# spec_file.py

import logging
import re
from typing import Dict, List, Tuple

from pydantic import ValidationError

from expression import ExpressionSyntaxError
from functionals import VariationalProblem
from models import ProblemSpec, SolveResult

logger = logging.getLogger(__name__)

KEY_RE = re.compile(r"^[A-Za-z_][A-Za-z_0-9]*$")
EXPR_PREFIX = "expr:"
RESULT_KEYS = (
    "alpha",
    "a",
    "b",
    "y_a",
    "y_b",
    "lagrangian",
    "solver",
    "m",
    "converged",
    "iterations",
    "value",
    "coefficients",
    "exponents",
    "trajectory_coefficients",
    "residual_k",
    "residual_max_deviation",
    "residual_tolerance",
    "residual_constant",
)

Position = Tuple[int, int]


class SpecFileError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def _split_interval(value: str, pos: Position) -> Tuple[str, str]:
    parts = [part.strip() for part in value.split(",")]
    if len(parts) != 2 or not all(parts):
        raise SpecFileError(f"interval must be 'a, b', got {value!r}", *pos)
    return parts[0], parts[1]


def parse_spec_text(text: str) -> Tuple[ProblemSpec, Dict[str, Position]]:
    """Parse `key = value` lines into a ProblemSpec; also returns where each value starts."""
    fields: Dict[str, str] = {}
    positions: Dict[str, Position] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        indent = len(line) - len(line.lstrip()) + 1
        if "=" not in line:
            raise SpecFileError("expected 'key = value'", lineno, indent)
        key_part, value_part = line.split("=", 1)
        key = key_part.strip()
        if not KEY_RE.match(key):
            raise SpecFileError(f"invalid key {key!r}", lineno, indent)
        value = value_part.strip()
        value_col = len(key_part) + 2 + len(value_part) - len(value_part.lstrip())
        if not value:
            raise SpecFileError(f"missing value for {key!r}", lineno, value_col)

        names = ("a", "b") if key == "interval" else (key,)
        for name in names:
            if name in fields:
                first = positions[name][0]
                raise SpecFileError(f"duplicate key {name!r} (first set on line {first})", lineno, indent)
        if key == "interval":
            fields["a"], fields["b"] = _split_interval(value, (lineno, value_col))
            positions["a"] = positions["b"] = (lineno, value_col)
        else:
            fields[key] = value
            positions[key] = (lineno, value_col)

    try:
        spec = ProblemSpec(**fields)
    except ValidationError as exc:
        error = exc.errors()[0]
        key = str(error["loc"][0]) if error["loc"] else ""
        line, column = positions.get(key or "a", (1, 1))
        label = f"{key}: " if key else ""
        raise SpecFileError(f"{label}{error['msg']}", line, column) from exc
    return spec, positions


def load_problem(text: str) -> Tuple[ProblemSpec, VariationalProblem]:
    spec, positions = parse_spec_text(text)
    line, column = positions.get("lagrangian", (1, 1))
    try:
        prob = spec.to_problem()
    except ExpressionSyntaxError as exc:
        # offset counts from just after "expr:"
        raise SpecFileError(str(exc), line, column + len(EXPR_PREFIX) + exc.offset) from exc
    except ValueError as exc:
        raise SpecFileError(str(exc), line, column) from exc
    if spec.solver == "quadratic" and prob.lagrangian.quadratic is None:
        raise SpecFileError(
            f"solver 'quadratic' needs a quadratic lagrangian, got {prob.lagrangian.label}; set solver = general",
            line,
            column,
        )
    logger.debug("Loaded problem alpha=%s on [%s, %s] with %s", prob.alpha, prob.a, prob.b, prob.lagrangian.label)
    return spec, prob


def read_spec_file(path: str) -> Tuple[ProblemSpec, VariationalProblem]:
    with open(path, "r", encoding="utf-8") as fh:
        return load_problem(fh.read())


def format_number(x: float) -> str:
    return format(float(x), ".17g")


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_number(value)
    if isinstance(value, (list, tuple)):
        return ", ".join(format_value(item) for item in value)
    return str(value)


def result_record(spec: ProblemSpec, result: SolveResult) -> Dict[str, object]:
    path = result.trajectory.path
    record: Dict[str, object] = {
        "alpha": float(spec.alpha),
        "a": float(spec.a),
        "b": float(spec.b),
        "y_a": float(spec.y_a),
        "y_b": float(spec.y_b),
        "lagrangian": spec.lagrangian,
        "solver": spec.solver,
        "m": spec.m,
        "converged": result.converged,
        "iterations": result.iterations,
        "value": float(result.value),
        "coefficients": [float(c) for c in result.coefficients],
        "exponents": [float(e) for e in path.exponents],
        "trajectory_coefficients": [float(c) for c in path.coefficients],
    }
    residual = result.residual
    if residual is not None:
        record.update(
            residual_k=float(residual.k_estimate),
            residual_max_deviation=float(residual.max_deviation),
            residual_tolerance=float(residual.tolerance),
            residual_constant=residual.constant,
        )
    return record


def render_result(spec: ProblemSpec, result: SolveResult) -> str:
    record = result_record(spec, result)
    lines: List[str] = [f"{key} = {format_value(record[key])}" for key in RESULT_KEYS if key in record]
    return "\n".join(lines) + "\n"


def write_result(path: str, spec: ProblemSpec, result: SolveResult) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_result(spec, result))
