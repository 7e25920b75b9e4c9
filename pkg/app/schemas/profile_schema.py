"""
Pydantic schemas for densities
Piecewise-constant profiles and integration windows
"""

from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class Window(BaseModel):
    """
    Compact interval [lo, hi] used for total variation,
    L1 distances and mass
    """
    model_config = ConfigDict(frozen=True)

    lo: float = Field(..., description="Left end of the window")
    hi: float = Field(..., description="Right end of the window")

    @model_validator(mode="after")
    def _check_order(self) -> "Window":
        if not np.isfinite(self.lo) or not np.isfinite(self.hi):
            raise ValueError("window ends must be finite")
        if self.hi - self.lo <= 0:
            raise ValueError(f"window needs lo < hi, got [{self.lo}, {self.hi}]")
        return self

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def __str__(self) -> str:
        return f"[{self.lo:g}, {self.hi:g}]"


class PiecewiseConstantProfile(BaseModel):
    """
    Density with finitely many jumps and constant tails

    Cell i covers [breakpoints[i], breakpoints[i+1]) and holds cell_values[i].
    The profile equals left_state before breakpoints[0] and right_state from
    breakpoints[-1] on (right-continuous everywhere).
    """
    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {
                "breakpoints": [-0.5, 0.5],
                "cell_values": [0.5],
                "left_state": 0.0,
                "right_state": 0.0,
            }
        },
    )

    breakpoints: List[float] = Field(..., min_length=1, description="Strictly increasing positions")
    cell_values: List[float] = Field(default_factory=list, description="One density per cell")
    left_state: float = Field(0.0, ge=0, description="Density for x < breakpoints[0]")
    right_state: float = Field(0.0, ge=0, description="Density for x >= breakpoints[-1]")

    @field_validator("breakpoints")
    @classmethod
    def _check_breakpoints(cls, value: List[float]) -> List[float]:
        arr = np.asarray(value, dtype=float)
        if not np.all(np.isfinite(arr)):
            raise ValueError("breakpoints must be finite")
        if arr.size > 1 and np.any(np.diff(arr) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        return value

    @field_validator("cell_values")
    @classmethod
    def _check_values(cls, value: List[float]) -> List[float]:
        arr = np.asarray(value, dtype=float)
        if arr.size and (not np.all(np.isfinite(arr)) or np.any(arr < 0)):
            raise ValueError("cell values must be finite and nonnegative")
        return value

    @model_validator(mode="after")
    def _check_shape(self) -> "PiecewiseConstantProfile":
        if len(self.cell_values) != len(self.breakpoints) - 1:
            raise ValueError(
                f"{len(self.breakpoints)} breakpoints need {len(self.breakpoints) - 1} "
                f"cell values, got {len(self.cell_values)}"
            )
        if not (np.isfinite(self.left_state) and np.isfinite(self.right_state)):
            raise ValueError("tail states must be finite")
        return self

    @classmethod
    def from_arrays(
        cls,
        breakpoints: np.ndarray,
        cell_values: np.ndarray,
        left_state: float = 0.0,
        right_state: float = 0.0,
    ) -> "PiecewiseConstantProfile":
        """Build from numpy arrays (validated like any other construction)"""
        return cls(
            breakpoints=np.asarray(breakpoints, dtype=float).tolist(),
            cell_values=np.asarray(cell_values, dtype=float).tolist(),
            left_state=float(left_state),
            right_state=float(right_state),
        )

    @classmethod
    def constant(cls, value: float, at: float = 0.0) -> "PiecewiseConstantProfile":
        return cls(breakpoints=[at], cell_values=[], left_state=value, right_state=value)

    @property
    def nodes(self) -> np.ndarray:
        return np.asarray(self.breakpoints, dtype=float)

    @property
    def values(self) -> np.ndarray:
        return np.asarray(self.cell_values, dtype=float)

    @property
    def extended_values(self) -> np.ndarray:
        """[left_state, cell values..., right_state]"""
        return np.concatenate(([self.left_state], self.values, [self.right_state]))

    @property
    def n_cells(self) -> int:
        return len(self.cell_values)

    @property
    def ess_inf(self) -> float:
        return float(self.extended_values.min())

    @property
    def ess_sup(self) -> float:
        return float(self.extended_values.max())

    @property
    def sup_norm(self) -> float:
        return float(np.abs(self.extended_values).max())
