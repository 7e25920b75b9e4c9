"""
Schemas package
"""

from app.schemas.kernel_schema import KernelFamily, KernelSpec
from app.schemas.profile_schema import PiecewiseConstantProfile, Window
from app.schemas.report_schema import BoundsReport, CheckReport, CheckRow, OleinikGReport, OleinikWReport, TVReport
from app.schemas.run_schema import FigureRecipe, RunConfig
from app.schemas.simulation_schema import LocalGrid, SimConfig, SimState, Snapshot, StepRecord, Trajectory
from app.schemas.sweep_schema import SweepConfig, SweepRow, SweepTable
from app.schemas.velocity_schema import AssumptionReport, PiecewisePolynomial, VelocityFamily, VelocityModel

__all__ = [
    'KernelFamily', 'KernelSpec',
    'PiecewiseConstantProfile', 'Window',
    'BoundsReport', 'CheckReport', 'CheckRow', 'OleinikGReport', 'OleinikWReport', 'TVReport',
    'FigureRecipe', 'RunConfig',
    'LocalGrid', 'SimConfig', 'SimState', 'Snapshot', 'StepRecord', 'Trajectory',
    'SweepConfig', 'SweepRow', 'SweepTable',
    'AssumptionReport', 'PiecewisePolynomial', 'VelocityFamily', 'VelocityModel',
]
