"""
Pydantic schemas for run configuration documents and figure recipes
"""

from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field

from app.schemas.kernel_schema import KernelFamily, KernelSpec
from app.schemas.profile_schema import PiecewiseConstantProfile, Window
from app.schemas.simulation_schema import LocalGrid, SimConfig
from app.schemas.sweep_schema import SweepConfig
from app.schemas.velocity_schema import VelocityModel


class SimulationSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    profile: PiecewiseConstantProfile
    velocity: VelocityModel
    kernel: KernelSpec = Field(default_factory=lambda: KernelSpec.exp(0.05))
    final_time: float = Field(1.0, gt=0)
    snapshots: List[float] = Field(default_factory=list)
    theta: float = Field(0.5, gt=0, le=1)
    width_change: float = Field(0.1, gt=0, le=1)
    refinement: float = Field(400.0, gt=0)


class DiagnosticsSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    slack: float = Field(0.05, ge=0)
    window: Window = Field(default_factory=lambda: Window(lo=-1.0, hi=1.0))
    t_min: Optional[float] = Field(None, ge=0)


class SweepSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    eps: List[float] = Field(default_factory=lambda: [0.2, 0.1, 0.05, 0.025, 0.0125])
    times: List[float] = Field(default_factory=lambda: [0.5])
    window: Optional[Window] = None
    reference_dx: Optional[float] = Field(None, gt=0)


class LocalSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dx: float = Field(1.0 / 400.0, gt=0)
    cfl: float = Field(0.45, gt=0, lt=1)
    window: Optional[Window] = None


class OutputSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dir: Optional[str] = None


class RunConfig(BaseModel):
    """
    Everything one CLI invocation needs, validated up front
    """
    simulation: SimulationSection
    diagnostics: DiagnosticsSection = Field(default_factory=DiagnosticsSection)
    sweep: SweepSection = Field(default_factory=SweepSection)
    local: LocalSection = Field(default_factory=LocalSection)
    output: OutputSection = Field(default_factory=OutputSection)
    deterministic: bool = Field(True, description="Runs are seedless; always on")

    def sim_config(self) -> SimConfig:
        sim = self.simulation
        return SimConfig(
            kernel=sim.kernel,
            velocity=sim.velocity,
            final_time=sim.final_time,
            theta=sim.theta,
            width_change=sim.width_change,
            snapshot_times=list(sim.snapshots),
            refinement=sim.refinement,
        )

    def sweep_config(self, eps: Optional[List[float]] = None, kernel: Optional[KernelFamily] = None) -> SweepConfig:
        sim = self.simulation
        return SweepConfig(
            eps_list=list(eps) if eps else list(self.sweep.eps),
            window=self.sweep.window or self.diagnostics.window,
            times=list(self.sweep.times),
            datum=sim.profile,
            velocity=sim.velocity,
            kernel=kernel or sim.kernel.family,
            reference_dx=self.sweep.reference_dx,
            refinement=sim.refinement,
        )

    def local_grid(self) -> LocalGrid:
        window = self.local.window or self.diagnostics.window
        return LocalGrid.covering(window, self.local.dx)

    def snapshot_times(self) -> List[float]:
        sim = self.simulation
        return list(sim.snapshots) if sim.snapshots else [0.0, sim.final_time]


class FigureRecipe(BaseModel):
    """
    One canned reproduction: datum, model, kernels, eps values, time grid
    and the emitted metric
    """
    model_config = ConfigDict(frozen=True)

    figure: int = Field(..., ge=1, le=3)
    datum: PiecewiseConstantProfile
    velocity: VelocityModel = Field(default_factory=VelocityModel.greenshields)
    kernels: List[KernelFamily]
    eps_list: List[float] = Field(default_factory=lambda: [0.2, 0.1, 0.05, 0.025])
    times: List[float]
    metric: str = Field(..., description="neg_min_dxW or tv_W")
    tv_window: Optional[Window] = None
    refinement: float = Field(400.0, gt=0)
