"""Pydantic models for options and reports."""

import math
from enum import Enum
from typing import Optional

from pydantic import BaseModel, Field, field_validator, model_validator


class Geometry(str, Enum):
    """Background geometry of a triangle or mesh."""
    EUCLIDEAN = "E"
    HYPERBOLIC = "H"
    SPHERICAL = "S"


class SolveMode(str, Enum):
    """Uniformization solver mode."""
    NEWTON = "newton"
    FLOW = "flow"


class SolveStatus(str, Enum):
    """Outcome of a solve."""
    CONVERGED = "converged"
    DIVERGED = "diverged"
    REGULARITY_LOST = "regularity_lost"


# ===== Options =====

class SolveOptions(BaseModel):
    """Options for the Newton and flow solvers."""
    tol_curvature: float = Field(default=1e-10, gt=0, lt=1e-2)
    max_iterations: int = Field(default=100, gt=0)
    damping: float = Field(default=0.5, gt=0, lt=1)
    min_step: float = Field(default=2.0 ** -20, gt=0)
    regularity_floor: tuple[float, float] = (1e-3, 1e-3)
    mode: SolveMode = SolveMode.NEWTON
    flow_steps: int = Field(default=64, gt=0)

    @field_validator("regularity_floor")
    @classmethod
    def _floor_positive(cls, v: tuple[float, float]) -> tuple[float, float]:
        if v[0] <= 0 or v[1] <= 0:
            raise ValueError("regularity_floor entries must be positive")
        return v


class GeodesicSolverOptions(BaseModel):
    """Options for the polyline geodesic relaxation."""
    segments: int = Field(default=64, gt=1)
    max_segments: int = Field(default=1024, gt=1)
    refine_tol: float = Field(default=1e-10, gt=0)
    max_relaxation_iterations: int = Field(default=30, gt=0)
    tolerance: float = Field(default=1e-12, gt=0)

    @model_validator(mode="after")
    def _segments_ordered(self) -> "GeodesicSolverOptions":
        if self.max_segments < self.segments:
            raise ValueError("max_segments must be at least segments")
        return self


class StudyOptions(BaseModel):
    """Options for convergence studies."""
    slope_threshold: float = 0.9
    flat_tolerance: float = 1e-10
    synthetic_amplitude: float = Field(default=0.1, ge=0)


# ===== Reports =====

class RegularityReport(BaseModel):
    """Angle regularity of a mesh metric."""
    min_angle: float
    max_opposite_angle_sum: float
    worst_face: int
    worst_edge: int

    def is_regular(self, eps1: float, eps2: float) -> bool:
        """True iff every angle is >= eps1 and every opposite sum is <= pi - eps2."""
        return self.min_angle >= eps1 and self.max_opposite_angle_sum <= math.pi - eps2


class SolveReport(BaseModel):
    """Result of a uniformization solve."""
    status: SolveStatus
    geometry: Geometry
    mode: SolveMode
    iterations: int = 0
    residual_history: list[float] = Field(default_factory=list)
    u: list[float] = Field(default_factory=list)
    u_mean_zero: Optional[list[float]] = None
    area: float = 0.0
    area_before_normalization: Optional[float] = None
    regularity: Optional[RegularityReport] = None
    max_flow_speed: Optional[float] = None
    flow_invariant_residuals: list[float] = Field(default_factory=list)

    @property
    def residual(self) -> float:
        """Final |K|inf."""
        return self.residual_history[-1] if self.residual_history else float("nan")


class PerturbationReport(BaseModel):
    """Witness for the triangle perturbation bounds."""
    geometry: Geometry
    delta: float
    angle_dev: float
    area_dev: float
    angle_bound: float
    area_bound: float
    bound_ok: bool


class EllipticEstimateReport(BaseModel):
    """Both sides of the discrete elliptic estimate."""
    lhs: float
    rhs: float
    holds: bool
    shifted: bool = False

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


class IsoperimetricResult(BaseModel):
    """Exact isoperimetric constant and an extremal subset."""
    constant: float
    subset: list[int] = Field(default_factory=list)


class CubicEstimateReport(BaseModel):
    """Cubic-order deviation of conformal distances."""
    distances: list[float] = Field(default_factory=list)
    deviations: list[float] = Field(default_factory=list)
    ratios: list[float] = Field(default_factory=list)
    max_ratio: float = 0.0
    # deviation[i] / deviation[i + 1]; near 8 when the distances halve
    halving_ratios: list[float] = Field(default_factory=list)


class StudyRow(BaseModel):
    """One resolution of a convergence study."""
    resolution: str
    h: float
    error: float
    residual: float
    runtime_ms: float


class StudyResult(BaseModel):
    """Convergence table and fitted slope."""
    surface: str
    rows: list[StudyRow] = Field(default_factory=list)
    slope: Optional[float] = None


class SuiteResult(BaseModel):
    """Pass/fail of one verification suite."""
    name: str
    passed: bool
    instances: int
    worst: float
    detail: str = ""


class VerificationReport(BaseModel):
    """All suite results of one verification run."""
    seed: int
    full: bool = False
    passed: bool
    suites: list[SuiteResult] = Field(default_factory=list)
