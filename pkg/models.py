# models.py

from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from functionals import Trajectory, VariationalProblem, lagrangian_from_key


class ResidualReport(BaseModel):
    sample_ts: List[float]
    residual_values: List[float]
    k_estimate: float
    max_deviation: float = Field(ge=0)
    tolerance: float
    constant: bool


class FirstVariation(BaseModel):
    analytic: float
    finite_difference: float


class SolverOptions(BaseModel):
    x_tol: float = Field(1e-9, gt=0)
    f_tol: float = Field(1e-12, gt=0)
    max_iter: int = Field(5000, ge=1)
    quad_n: Optional[int] = Field(None, ge=1)
    sample_count: Optional[int] = Field(None, ge=2)


class SolveResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    coefficients: List[float]
    trajectory: Trajectory
    value: float
    residual: Optional[ResidualReport] = None
    iterations: int = 0
    converged: bool = False
    method: str = "quadratic"


class CheckResult(BaseModel):
    name: str
    passed: bool
    exercised: bool = True
    detail: str = ""


class MinimizerReport(BaseModel):
    checks: List[CheckResult]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)


class ObstructionReport(BaseModel):
    alpha: float
    has_solution: bool
    k: float
    solution: Optional[str] = None
    value: Optional[float] = None
    derivation: List[str] = []
    agrawal_t: float = 0.99
    agrawal_derivative: Optional[float] = None
    agrawal_midpoint_value: Optional[float] = None
    agrawal_endpoint_value: Optional[float] = None


class ProblemSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    a: float = 0.0
    b: float = 1.0
    alpha: float = Field(gt=0, le=1)
    y_a: float = 0.0
    y_b: float = 1.0
    lagrangian: str = "v2"
    c_vv: float = 0.0
    c_uu: float = 0.0
    c_u: float = 0.0
    c_v: float = 0.0
    c_0: float = 0.0
    solver: Literal["quadratic", "general"] = "quadratic"
    m: int = Field(3, ge=0)
    quad_n: Optional[int] = Field(None, ge=1)
    max_iter: int = Field(5000, ge=1)

    @model_validator(mode="after")
    def _check_interval(self):
        if not self.a < self.b:
            raise ValueError(f"interval must satisfy a < b, got [{self.a}, {self.b}]")
        return self

    def to_problem(self) -> VariationalProblem:
        coefficients = {"c_vv": self.c_vv, "c_uu": self.c_uu, "c_u": self.c_u, "c_v": self.c_v, "c_0": self.c_0}
        lagrangian = lagrangian_from_key(self.lagrangian, coefficients)
        return VariationalProblem(self.a, self.b, self.alpha, self.y_a, self.y_b, lagrangian)


class SweepRow(BaseModel):
    alpha: float
    value: float
    gamma_alpha_plus_1: float
    abs_error: float
    residual_max_deviation: float
    converged: bool
