"""
Local Solver
Godunov finite-volume reference for rho_t + (rho V(rho))_x = 0 and the
exact Riemann solution for concave fluxes
"""

import logging
import math
import time
from typing import List, Optional, Sequence, Union

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from app.engine.velocity import chebyshev_points, eval_d2v, eval_dv, eval_v, validity_interval
from app.schemas.profile_schema import PiecewiseConstantProfile, Window
from app.schemas.simulation_schema import LocalGrid, Snapshot, Trajectory
from app.schemas.velocity_schema import VelocityFamily, VelocityModel
from app.utils.exceptions import DomainError, NonConcave
from app.utils.profiles import cell_averages, from_uniform_values

logger = logging.getLogger(__name__)

Density = Union[float, np.ndarray]

# Densities below this are treated as vacuum where V is singular at 0
VACUUM = 1e-300


class FluxFn:
    """
    f(rho) = rho V(rho) with f' = V + rho V' and f'' = 2V' + rho V''

    The flux extends continuously to f(0) = 0 for the families whose V is
    singular at 0.
    """

    def __init__(self, model: VelocityModel):
        self.model = model
        self.lo, self.hi, self.lo_open = validity_interval(model, 0)
        self._critical: Optional[float] = None

    def __call__(self, rho: Density) -> Density:
        x = np.asarray(rho, dtype=float)
        if self.lo_open:
            if np.any(x < 0):
                raise DomainError(f"{self.model.describe()}: negative density")
            safe = np.where(x > 0, x, 1.0)
            out = np.where(x > 0, safe * np.asarray(eval_v(self.model, safe)), 0.0)
        else:
            out = x * np.asarray(eval_v(self.model, x))
        return float(out) if out.ndim == 0 else out

    def derivative(self, rho: Density) -> Density:
        x = np.asarray(rho, dtype=float)
        out = np.asarray(eval_v(self.model, x)) + x * np.asarray(eval_dv(self.model, x))
        return float(out) if out.ndim == 0 else out

    def second_derivative(self, rho: Density) -> Density:
        x = np.asarray(rho, dtype=float)
        out = 2.0 * np.asarray(eval_dv(self.model, x)) + x * np.asarray(eval_d2v(self.model, x))
        return float(out) if out.ndim == 0 else out

    @property
    def critical_density(self) -> float:
        """argmax of f, in closed form for the catalog models"""
        if self._critical is None:
            self._critical = self._find_critical()
        return self._critical

    def _find_critical(self) -> float:
        model = self.model
        family = model.family
        rho_max = model.rho_max
        if family == VelocityFamily.GREENSHIELDS:
            return 0.5 * rho_max
        if family == VelocityFamily.UNDERWOOD:
            return rho_max
        if family == VelocityFamily.GEN_GREENSHIELDS:
            return rho_max * (model.n + 1.0) ** (-1.0 / model.n)
        if family == VelocityFamily.GEN_CALIFORNIA and not model.regularized:
            return rho_max * (1.0 - model.alpha) ** (1.0 / model.alpha)
        if family == VelocityFamily.GREENBERG:
            return rho_max / math.e

        if family == VelocityFamily.CUSTOM:
            lo, hi = self.lo, self.hi
        else:
            lo, hi = 0.0, rho_max
        result = minimize_scalar(
            lambda r: -float(self(r)), bounds=(lo, hi), method="bounded", options={"xatol": 1e-12}
        )
        logger.debug(f"Critical density of {model.describe()}: {result.x:.12g}")
        return float(result.x)

    def max_speed(self, m: float, M: float, samples: int = 257) -> float:
        """max |f'| over [m, M]"""
        xi = chebyshev_points(m, M, samples) if M > m else np.array([m])
        speeds = np.abs(np.atleast_1d(self.derivative(xi)))
        if not np.all(np.isfinite(speeds)):
            raise DomainError(f"{self.model.describe()}: unbounded wave speed on [{m:g}, {M:g}]")
        return float(speeds.max())


def godunov_flux(f: FluxFn, a: Density, b: Density) -> Density:
    """
    Godunov flux of a unimodal concave f: min over [a, b] if a <= b,
    max over [b, a] otherwise
    """
    a_arr = np.asarray(a, dtype=float)
    b_arr = np.asarray(b, dtype=float)
    fa = np.asarray(f(a_arr))
    fb = np.asarray(f(b_arr))
    star = f.critical_density
    f_star = float(f(star))

    rising = a_arr <= b_arr
    contains_peak = (b_arr <= star) & (star <= a_arr)
    out = np.where(
        rising,
        np.minimum(fa, fb),
        np.where(contains_peak, f_star, np.maximum(fa, fb)),
    )
    return float(out) if out.ndim == 0 else out


def simulate_local(
    rho0: PiecewiseConstantProfile,
    f: FluxFn,
    grid: LocalGrid,
    T: float,
    cfl: float = 0.45,
    snapshot_times: Optional[Sequence[float]] = None,
) -> Trajectory:
    """
    First-order Godunov scheme on a uniform grid with transmissive ghosts

    dt = cfl dx / max|f'| over the data range, clipped to the snapshot
    schedule. Snapshot mass counts the net outflow through the boundaries.

    Args:
        rho0: Initial density, averaged onto the grid cells
        f: Flux f(rho) = rho V(rho)
        grid: Uniform grid on the computational window
        T: Final time
        cfl: Courant number in (0, 1)
        snapshot_times: Times to record; defaults to 0 and T

    Returns:
        Trajectory whose snapshots carry no W field
    """
    if not 0 < cfl < 1:
        raise ValueError(f"cfl must lie in (0, 1), got {cfl}")
    if T <= 0:
        raise ValueError(f"T must be positive, got {T}")
    schedule: List[float] = list(snapshot_times) if snapshot_times else [0.0, T]
    if any(t < 0 or t > T for t in schedule):
        raise ValueError(f"snapshot times must lie in [0, {T:g}]")

    started = time.perf_counter()
    dx = grid.dx
    u = cell_averages(rho0, grid.edges)
    m, M = rho0.ess_inf, rho0.ess_sup
    dt_max = cfl * dx / max(f.max_speed(m, M), 1e-300)

    traj = Trajectory(solver="local", initial=rho0, velocity=f.model)
    interior = float(u.sum() * dx)
    traj.initial_mass = interior
    outflow = 0.0
    t = 0.0
    steps = 0

    def record(now: float) -> None:
        profile = from_uniform_values(grid.window.lo, grid.window.hi, u, float(u[0]), float(u[-1]))
        traj.snapshots.append(Snapshot(t=now, profile=profile, total_mass=float(u.sum() * dx) + outflow))

    pending = sorted(schedule)
    while pending and pending[0] <= 0.0:
        record(0.0)
        pending.pop(0)

    while pending:
        target = pending[0]
        dt = min(dt_max, target - t)
        padded = np.concatenate(([u[0]], u, [u[-1]]))
        fluxes = np.asarray(godunov_flux(f, padded[:-1], padded[1:]))
        u = u - (dt / dx) * np.diff(fluxes)
        outflow += dt * (fluxes[-1] - fluxes[0])
        steps += 1
        t = target if target - t <= dt_max else t + dt
        while pending and pending[0] <= t:
            record(pending.pop(0))

    logger.info(
        f"Godunov run: {grid.n_cells} cells, dx={dx:g}, {steps} steps to T={T:g} "
        f"({time.perf_counter() - started:.2f}s)"
    )
    return traj


# ===== EXACT RIEMANN SOLUTION =====

def _check_concave(f: FluxFn, lo: float, hi: float, samples: int = 257) -> None:
    start = max(lo, 1e-9) if f.lo_open else lo
    xi = chebyshev_points(start, hi, samples) if hi > start else np.array([hi])
    curvature = np.atleast_1d(f.second_derivative(xi))
    scale = max(1.0, float(np.max(np.abs(curvature))))
    if np.any(curvature > 1e-12 * scale):
        raise NonConcave(
            f"{f.model.describe()}: flux is not concave on [{lo:g}, {hi:g}] "
            f"(f'' ranges over [{curvature.min():.3g}, {curvature.max():.3g}])"
        )


def riemann_eval(f: FluxFn, rho_l: float, rho_r: float, xi: Density) -> Density:
    """
    Self-similar entropy solution at xi = x/t

    Increasing jumps are shocks with the Rankine-Hugoniot speed, decreasing
    jumps open a rarefaction fan solving f'(rho) = xi.
    """
    xs = np.asarray(xi, dtype=float)
    if rho_l == rho_r:
        out = np.full_like(xs, rho_l)
        return float(out) if out.ndim == 0 else out

    lo, hi = min(rho_l, rho_r), max(rho_l, rho_r)
    _check_concave(f, lo, hi)

    if rho_l < rho_r:
        speed = (float(f(rho_r)) - float(f(rho_l))) / (rho_r - rho_l)
        out = np.where(xs < speed, rho_l, rho_r)
        return float(out) if out.ndim == 0 else out

    floor = max(rho_r, 1e-12) if f.lo_open else rho_r
    slow = float(f.derivative(rho_l))
    fast = float(f.derivative(floor))

    def invert(value: float) -> float:
        if value <= slow:
            return rho_l
        if value >= fast:
            return rho_r
        return brentq(lambda r: float(f.derivative(r)) - value, floor, rho_l, xtol=1e-14, rtol=1e-14)

    flat = np.array([invert(v) for v in np.atleast_1d(xs).ravel()])
    out = flat.reshape(xs.shape)
    return float(out) if out.ndim == 0 else out


def riemann_profile(
    f: FluxFn, rho_l: float, rho_r: float, t: float, window: Window, cells: int, at: float = 0.0
) -> PiecewiseConstantProfile:
    """
    Exact Riemann solution at time t sampled at the midpoints of a uniform grid
    """
    if t <= 0:
        return PiecewiseConstantProfile(breakpoints=[at], cell_values=[], left_state=rho_l, right_state=rho_r)
    edges = np.linspace(window.lo, window.hi, cells + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    values = np.atleast_1d(riemann_eval(f, rho_l, rho_r, (mids - at) / t))
    return from_uniform_values(window.lo, window.hi, values, rho_l, rho_r)


def shock_position(profile: PiecewiseConstantProfile, rho_l: float, rho_r: float) -> float:
    """Location where a monotone discrete shock crosses the mean of its states"""
    mid_value = 0.5 * (rho_l + rho_r)
    nodes = profile.nodes
    centers = 0.5 * (nodes[:-1] + nodes[1:])
    values = profile.values
    above = values >= mid_value if rho_r > rho_l else values <= mid_value
    idx = int(np.argmax(above))
    if idx == 0:
        return float(centers[0])
    x0, x1 = centers[idx - 1], centers[idx]
    v0, v1 = values[idx - 1], values[idx]
    if v1 == v0:
        return float(x1)
    return float(x0 + (mid_value - v0) * (x1 - x0) / (v1 - v0))
