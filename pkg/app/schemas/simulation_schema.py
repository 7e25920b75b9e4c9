"""
Simulation schemas
Run configuration (pydantic) and the value-semantic state, snapshot and
trajectory records shared by both solvers
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.schemas.kernel_schema import KernelSpec
from app.schemas.profile_schema import PiecewiseConstantProfile, Window
from app.schemas.velocity_schema import VelocityModel


class SimConfig(BaseModel):
    """
    Configuration of one nonlocal run
    """
    model_config = ConfigDict(frozen=True)

    kernel: KernelSpec
    velocity: VelocityModel
    final_time: float = Field(..., gt=0, description="T")
    theta: float = Field(0.5, gt=0, le=1, description="Fraction of the smallest closing-cell transit time")
    width_change: float = Field(0.1, gt=0, le=1, description="Max relative cell-width change per step")
    merge_factor: float = Field(1e-6, gt=0, description="Merge below this multiple of the mean initial width")
    split_factor: float = Field(10.0, gt=1, description="Split above this multiple of the mean initial width")
    snapshot_times: List[float] = Field(default_factory=list)
    refinement: float = Field(400.0, gt=0, description="Initial cells per unit length")
    max_backoff: int = Field(20, ge=0)

    @model_validator(mode="after")
    def _check_snapshots(self) -> "SimConfig":
        times = self.snapshot_times
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("snapshot times must be strictly increasing")
        if times and (times[0] < 0 or times[-1] > self.final_time):
            raise ValueError(f"snapshot times must lie in [0, {self.final_time:g}]")
        return self

    @property
    def schedule(self) -> List[float]:
        """Requested snapshot times, defaulting to [0, T]"""
        return list(self.snapshot_times) if self.snapshot_times else [0.0, self.final_time]


class LocalGrid(BaseModel):
    """
    Uniform finite-volume grid for the local solver

    Ghost cells copy the outermost interior values (transmissive boundary).
    """
    model_config = ConfigDict(frozen=True)

    dx: float = Field(..., gt=0)
    window: Window

    @model_validator(mode="after")
    def _check_multiple(self) -> "LocalGrid":
        ratio = self.window.length / self.dx
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ValueError(f"window length {self.window.length:g} is not a multiple of dx={self.dx:g}")
        return self

    @classmethod
    def covering(cls, window: Window, dx: float) -> "LocalGrid":
        """Smallest grid of width dx containing the window, anchored at window.lo"""
        cells = max(1, math.ceil(window.length / dx - 1e-9))
        return cls(dx=dx, window=Window(lo=window.lo, hi=window.lo + cells * dx))

    @property
    def n_cells(self) -> int:
        return int(round(self.window.length / self.dx))

    @property
    def edges(self) -> np.ndarray:
        return self.window.lo + self.dx * np.arange(self.n_cells + 1)

    @property
    def centers(self) -> np.ndarray:
        edges = self.edges
        return 0.5 * (edges[:-1] + edges[1:])


@dataclass(frozen=True)
class SimState:
    """
    Lagrangian state: moving nodes carrying fixed cell masses

    node_w caches W at the nodes for the current geometry.
    """
    t: float
    nodes: np.ndarray
    masses: np.ndarray
    left_state: float
    right_state: float
    velocity: VelocityModel
    kernel: KernelSpec
    node_w: np.ndarray

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def values(self) -> np.ndarray:
        return self.masses / self.widths

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    @property
    def profile(self) -> PiecewiseConstantProfile:
        return PiecewiseConstantProfile.from_arrays(self.nodes, self.values, self.left_state, self.right_state)


@dataclass(frozen=True)
class Snapshot:
    """
    Solution at one requested time

    w is None for local (Godunov) trajectories; g holds V'(W) W dW/dx at
    the nodes (right-sided), g_max its exact sup over the real line.
    """
    t: float
    profile: PiecewiseConstantProfile
    total_mass: float
    w: Optional[object] = None
    w_nodes: Optional[np.ndarray] = None
    dxw_nodes: Optional[np.ndarray] = None
    g_nodes: Optional[np.ndarray] = None
    g_max: Optional[float] = None


@dataclass(frozen=True)
class StepRecord:
    t: float
    dt: float
    min_slope: float
    max_slope: float
    backoffs: int = 0


@dataclass
class Trajectory:
    """
    Snapshots at the requested times plus per-step diagnostics
    """
    solver: str
    initial: PiecewiseConstantProfile
    velocity: VelocityModel
    kernel: Optional[KernelSpec] = None
    snapshots: List[Snapshot] = field(default_factory=list)
    steps: List[StepRecord] = field(default_factory=list)
    initial_mass: float = 0.0

    @property
    def times(self) -> List[float]:
        return [snap.t for snap in self.snapshots]

    def at(self, t: float, tol: float = 1e-12) -> Snapshot:
        for snap in self.snapshots:
            if abs(snap.t - t) <= tol * max(1.0, abs(t)):
                return snap
        raise KeyError(f"no snapshot at t={t:g}")

    @property
    def final(self) -> Snapshot:
        return self.snapshots[-1]

    @property
    def is_nonlocal(self) -> bool:
        return self.solver == "nonlocal"
