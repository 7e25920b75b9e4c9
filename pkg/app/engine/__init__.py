"""
Numerical core
"""

from app.engine.kernel import WField, box_nonlocal, exp_derivative, exp_nonlocal, nonlocal_field
from app.engine.local_solver import FluxFn, godunov_flux, riemann_eval, riemann_profile, simulate_local
from app.engine.nonlocal_solver import admissible_dt, node_velocities, simulate, step
from app.engine.velocity import check_assumptions, eval_d2v, eval_dv, eval_v

__all__ = [
    'WField', 'box_nonlocal', 'exp_derivative', 'exp_nonlocal', 'nonlocal_field',
    'FluxFn', 'godunov_flux', 'riemann_eval', 'riemann_profile', 'simulate_local',
    'admissible_dt', 'node_velocities', 'simulate', 'step',
    'check_assumptions', 'eval_d2v', 'eval_dv', 'eval_v',
]
