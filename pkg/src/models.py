from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Literal, get_args

import numpy as np
from pydantic import BaseModel, Field, field_validator

if TYPE_CHECKING:
    from src.fem.mesh import Mesh
    from src.fem.trace import TraceVector

BoundaryCondition = Literal["cc", "cs", "cf", "ss"]
EndKind = Literal["clamped", "supported", "free"]

BOUNDARY_CONDITIONS: tuple[str, ...] = get_args(BoundaryCondition)

# (left end at x=0, right end at x=1)
END_KINDS: dict[str, tuple[EndKind, EndKind]] = {
    "cc": ("clamped", "clamped"),
    "cs": ("clamped", "supported"),
    "cf": ("clamped", "free"),
    "ss": ("supported", "supported"),
}

CSV_COLUMNS = (
    "level", "n", "dofs", "h",
    "err_u", "err_M", "proj_u", "proj_M", "trace_u", "trace_M", "residual",
)

ERROR_FIELDS = ("err_u", "err_M", "proj_u", "proj_M", "trace_u", "trace_M", "residual")

def validate_bc(bc: str) -> BoundaryCondition:
    tag = bc.strip().lower()
    if tag not in END_KINDS:
        raise ValueError(f"unknown boundary condition {bc!r}, expected one of {', '.join(BOUNDARY_CONDITIONS)}")
    return tag  # type: ignore[return-value]

def validate_thickness(t: float) -> float:
    t = float(t)
    if not (0.0 <= t <= 1.0):
        raise ValueError(f"thickness t={t} outside [0, 1]")
    return t

def dof_count(n: int, p: int) -> int:
    # two L2 fields of degree p per element plus 4n free trace unknowns
    return 2 * n * (p + 1) + 4 * n

@dataclass
class ElementSystem:
    # B: (local trial x local test), rows already reduced by the trace constraint basis
    B: np.ndarray
    G: np.ndarray
    l: np.ndarray

    # global indices of the rows of B
    dofs: np.ndarray

@dataclass
class DpgSolution:
    mesh: Mesh
    p: int
    bc: BoundaryCondition
    t: float

    # per element Legendre coefficients, shape (n, p+1)
    u_coeffs: np.ndarray
    M_coeffs: np.ndarray

    trace: TraceVector

    # full global vector (fields interleaved per element, trace free dofs last)
    x: np.ndarray
    residual: float = 0.0

    @property
    def dofs(self) -> int:
        return int(self.x.size)

@dataclass
class ConvergenceRecord:
    level: int
    n: int
    dofs: int
    h: float

    err_u: float = math.nan
    err_M: float = math.nan
    proj_u: float = math.nan
    proj_M: float = math.nan
    trace_u: float = math.nan
    trace_M: float = math.nan
    residual: float = math.nan

    # study coordinates, not part of the CSV row
    t: float = 0.0
    p: int = 0
    failed: bool = False
    condition: float | None = None

class StudyConfig(BaseModel):
    bc: BoundaryCondition = "cf"
    t: list[float] = Field(default_factory=lambda: [1.0, 1e-3, 1e-6, 0.0], min_length=1)
    p: list[int] = Field(default_factory=lambda: [0, 1, 2], min_length=1)
    n0: int = Field(default=8, ge=1)
    levels: int = Field(default=5, ge=1)
    load: str = "sin"
    out: str = "convergence.csv"

    gnuplot: bool = False
    condition: bool = False

    @field_validator("t")
    @classmethod
    def _check_t(cls, v: list[float]) -> list[float]:
        return [validate_thickness(x) for x in v]

    @field_validator("p")
    @classmethod
    def _check_p(cls, v: list[int]) -> list[int]:
        if any(x < 0 for x in v):
            raise ValueError("polynomial degrees must be nonnegative")
        return v
