"""
Pydantic schemas for epsilon sweeps
"""

from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.schemas.kernel_schema import KernelFamily
from app.schemas.profile_schema import PiecewiseConstantProfile, Window
from app.schemas.velocity_schema import VelocityModel


class SweepConfig(BaseModel):
    """
    Nonlocal runs for a decreasing list of eps against one local reference
    """
    model_config = ConfigDict(frozen=True)

    eps_list: List[float] = Field(default_factory=lambda: [0.2, 0.1, 0.05, 0.025, 0.0125])
    window: Window = Field(default_factory=lambda: Window(lo=-1.0, hi=1.0))
    times: List[float] = Field(default_factory=lambda: [0.5])
    datum: PiecewiseConstantProfile
    velocity: VelocityModel
    kernel: KernelFamily = KernelFamily.EXPONENTIAL
    reference_dx: Optional[float] = Field(None, gt=0, description="Defaults to min(eps_min/8, 1/400)")
    refinement: float = Field(400.0, gt=0)
    cfl: float = Field(0.45, gt=0, lt=1)

    @field_validator("eps_list")
    @classmethod
    def _check_eps(cls, value: List[float]) -> List[float]:
        if not value:
            raise ValueError("eps list is empty")
        if any(e <= 0 for e in value):
            raise ValueError("eps values must be positive")
        if any(b >= a for a, b in zip(value, value[1:])):
            raise ValueError("eps list must be strictly decreasing")
        return value

    @field_validator("times")
    @classmethod
    def _check_times(cls, value: List[float]) -> List[float]:
        if not value or any(t <= 0 for t in value):
            raise ValueError("comparison times must be positive")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("comparison times must be strictly increasing")
        return value

    @property
    def final_time(self) -> float:
        return self.times[-1]

    @property
    def dx(self) -> float:
        if self.reference_dx is not None:
            return self.reference_dx
        return min(min(self.eps_list) / 8.0, 1.0 / 400.0)


class SweepRow(BaseModel):
    eps: float
    t: float
    err_rho: float = Field(..., ge=0)
    err_W: float = Field(..., ge=0)


class SweepTable(BaseModel):
    """
    Errors on the full eps x t grid, sorted by (t, eps)
    """
    rows: List[SweepRow] = Field(default_factory=list)
    theorem_path: str = ""
    exploratory: bool = False
    monotone_rho: Dict[float, bool] = Field(default_factory=dict)
    monotone_W: Dict[float, bool] = Field(default_factory=dict)
    decay_rho: Dict[float, Optional[float]] = Field(default_factory=dict)
    decay_W: Dict[float, Optional[float]] = Field(default_factory=dict)
    reference_errors: Dict[float, float] = Field(
        default_factory=dict, description="L1 gap between the Godunov reference and the exact Riemann solution"
    )

    def at_time(self, t: float) -> List[SweepRow]:
        """Rows at t ordered by decreasing eps"""
        rows = [row for row in self.rows if abs(row.t - t) <= 1e-12 * max(1.0, t)]
        return sorted(rows, key=lambda row: -row.eps)

    @property
    def times(self) -> List[float]:
        return sorted({row.t for row in self.rows})
