"""
Nonlocal Solver
Lagrangian characteristics solver: breakpoints move with speed V(W),
cell masses are carried unchanged and densities follow from cell widths.
"""

import logging
import math
import time
from dataclasses import replace
from typing import Optional, Tuple

import numpy as np

from app.engine.kernel import WField, decay_length, field_from_arrays, node_values, nonlocal_field
from app.engine.velocity import check_assumptions, eval_dv, eval_v
from app.schemas.kernel_schema import KernelFamily
from app.schemas.profile_schema import PiecewiseConstantProfile
from app.schemas.simulation_schema import SimConfig, SimState, Snapshot, StepRecord, Trajectory
from app.utils.exceptions import CellCollapse, DomainError

logger = logging.getLogger(__name__)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class LagrangianSolver:
    """
    Moving-mesh solver for rho_t + (V(W) rho)_x = 0

    Steps use a two-stage midpoint integrator with W recomputed from the
    stage geometry. A step that inverts a cell or leaves the data range is
    rejected and retried with half the time step.
    """

    # Allowed overshoot of the data range before a step is rejected
    RANGE_TOL = 1e-9
    # Slack on the schedule so t + dt lands exactly on a snapshot
    SNAP_TOL = 1e-12

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        self.lower = 0.0
        self.upper = math.inf
        self.merge_width = 0.0
        self.split_width = math.inf

    # ===== SETUP =====

    def refine(self, p: PiecewiseConstantProfile) -> Tuple[np.ndarray, np.ndarray]:
        """
        Subdivide cells to the refinement target and pad the left tail

        The right tail is an exact solution (W equals right_state there), the
        left tail is not when left_state > 0: it is replaced by real cells far
        enough out that W never feels the truncation during the run.
        """
        cfg = self.cfg
        target = 1.0 / cfg.refinement
        nodes = [p.nodes[0]]
        values = []

        if p.left_state > 0 or p.n_cells == 0:
            pad = self._left_pad_length(p)
            start = p.nodes[0] - pad
            pieces = max(1, math.ceil(pad / target))
            nodes = list(np.linspace(start, p.nodes[0], pieces + 1))
            values = [p.left_state] * pieces

        for lo, hi, value in zip(p.nodes[:-1], p.nodes[1:], p.values):
            pieces = max(1, math.ceil((hi - lo) / target - 1e-9))
            nodes.extend(np.linspace(lo, hi, pieces + 1)[1:])
            values.extend([value] * pieces)

        return np.asarray(nodes, dtype=float), np.asarray(values, dtype=float)

    def _left_pad_length(self, p: PiecewiseConstantProfile) -> float:
        cfg = self.cfg
        m, M = p.ess_inf, p.ess_sup
        levels = np.linspace(m, M, 65) if M > m else np.array([m])
        max_dv = float(np.max(np.abs(np.atleast_1d(eval_dv(cfg.velocity, levels)))))
        v = np.atleast_1d(eval_v(cfg.velocity, levels))
        v_range = float(v.max() - v.min())
        travel = (max_dv * M + v_range) * cfg.final_time
        return decay_length(cfg.kernel.eps) + travel + 0.5

    def initial_state(self, p: PiecewiseConstantProfile) -> SimState:
        nodes, values = self.refine(p)
        widths = np.diff(nodes)
        mean_width = float(widths.mean())
        self.merge_width = self.cfg.merge_factor * mean_width
        self.split_width = self.cfg.split_factor * mean_width
        self.lower, self.upper = p.ess_inf, p.ess_sup
        masses = values * widths
        return self._with_geometry(
            SimState(
                t=0.0,
                nodes=nodes,
                masses=masses,
                left_state=p.left_state,
                right_state=p.right_state,
                velocity=self.cfg.velocity,
                kernel=self.cfg.kernel,
                node_w=np.zeros_like(nodes),
            ),
            nodes,
        )

    # ===== STEPPING =====

    @staticmethod
    def _with_geometry(s: SimState, nodes: np.ndarray, t: Optional[float] = None) -> SimState:
        values = s.masses / np.diff(nodes)
        w = node_values(s.kernel, nodes, values, s.left_state, s.right_state)
        return replace(s, nodes=nodes, node_w=w, t=s.t if t is None else t)

    def _check_geometry(self, nodes: np.ndarray, masses: np.ndarray, stage: str) -> None:
        widths = np.diff(nodes)
        if np.any(widths <= 0):
            bad = int(np.argmin(widths))
            raise CellCollapse(f"{stage}: cell {bad} inverted (width {widths[bad]:.3e})")
        values = masses / widths
        tol = self.RANGE_TOL * max(1.0, self.upper)
        if values.min() < self.lower - tol or values.max() > self.upper + tol:
            raise CellCollapse(
                f"{stage}: cell values [{values.min():.12g}, {values.max():.12g}] leave "
                f"[{self.lower:g}, {self.upper:g}]"
            )

    def step(self, s: SimState, dt: float) -> SimState:
        if dt <= 0:
            raise ValueError(f"dt must be positive, got {dt}")
        v0 = node_velocities(s)
        half = s.nodes + 0.5 * dt * v0
        self._check_geometry(half, s.masses, "stage")
        stage = self._with_geometry(s, half)

        v1 = node_velocities(stage)
        nodes = s.nodes + dt * v1
        self._check_geometry(nodes, s.masses, "step")
        return self._with_geometry(s, nodes, t=s.t + dt)

    def admissible_dt(self, s: SimState, horizon: float) -> float:
        cfg = self.cfg
        v = node_velocities(s)
        widths = s.widths
        dv = np.diff(v)
        bound = math.inf

        moving = np.abs(dv) > 0
        if np.any(moving):
            bound = min(bound, float(np.min(cfg.width_change * widths[moving] / np.abs(dv[moving]))))
        closing = dv < 0
        if np.any(closing):
            bound = min(bound, float(np.min(cfg.theta * widths[closing] / -dv[closing])))

        remaining = horizon - s.t
        if remaining > 0:
            return min(bound, remaining)
        return bound if math.isfinite(bound) else cfg.final_time

    # ===== MESH MAINTENANCE =====

    def remesh(self, s: SimState) -> SimState:
        """Merge collapsing cells (mass-conservative), split stretched ones (value-preserving)"""
        nodes = s.nodes
        masses = s.masses
        changed = False

        widths = np.diff(nodes)
        if len(masses) > 1 and np.any(widths < self.merge_width):
            nodes, masses = self._merge(nodes, masses)
            changed = True

        widths = np.diff(nodes)
        wide = np.flatnonzero(widths > self.split_width)
        if wide.size:
            mids = 0.5 * (nodes[wide] + nodes[wide + 1])
            halves = 0.5 * masses[wide]
            masses = masses.copy()
            masses[wide] = halves
            nodes = np.insert(nodes, wide + 1, mids)
            masses = np.insert(masses, wide + 1, halves)
            changed = True

        if not changed:
            return s
        logger.debug(f"Remeshed at t={s.t:.6f}: {len(s.masses)} -> {len(masses)} cells")
        return self._with_geometry(replace(s, masses=masses), nodes)

    def _merge(self, nodes: np.ndarray, masses: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        nodes = nodes.tolist()
        masses = masses.tolist()
        i = 0
        while i < len(masses) and len(masses) > 1:
            width = nodes[i + 1] - nodes[i]
            if width >= self.merge_width:
                i += 1
                continue
            value = masses[i] / width
            left = masses[i - 1] / (nodes[i] - nodes[i - 1]) if i > 0 else None
            right = masses[i + 1] / (nodes[i + 2] - nodes[i + 1]) if i + 1 < len(masses) else None
            if right is None or (left is not None and abs(left - value) <= abs(right - value)):
                masses[i - 1] += masses[i]
                del masses[i]
                del nodes[i]
                i -= 1
            else:
                masses[i + 1] += masses[i]
                del masses[i]
                del nodes[i + 1]
        return np.asarray(nodes), np.asarray(masses)

    # ===== SNAPSHOTS =====

    def snapshot(self, s: SimState) -> Snapshot:
        profile = s.profile
        w = nonlocal_field(profile, s.kernel)
        return Snapshot(
            t=s.t,
            profile=profile,
            total_mass=s.total_mass,
            w=w,
            w_nodes=w.node_values,
            dxw_nodes=w.slope(w.node_positions),
            g_nodes=transport_field(w, s.velocity, w.node_positions),
            g_max=max_transport(w, s.velocity),
        )

    # ===== DRIVER =====

    def run(self, p: PiecewiseConstantProfile) -> Trajectory:
        cfg = self.cfg
        started = time.perf_counter()
        s = self.initial_state(p)
        traj = Trajectory(
            solver="nonlocal",
            initial=p,
            velocity=cfg.velocity,
            kernel=cfg.kernel,
            initial_mass=s.total_mass,
        )
        schedule = cfg.schedule
        logger.info(
            f"Nonlocal run: {cfg.kernel}, {cfg.velocity.describe()}, T={cfg.final_time:g}, "
            f"{len(s.masses)} cells, {len(schedule)} snapshots"
        )

        pending = list(schedule)
        while pending and pending[0] <= s.t + self.SNAP_TOL:
            traj.snapshots.append(self.snapshot(s))
            pending.pop(0)

        while pending:
            target = pending[0]
            dt = self.admissible_dt(s, target)
            s, used, backoffs = self._advance(s, dt, target)
            field = field_of(s)
            traj.steps.append(StepRecord(
                t=s.t, dt=used, min_slope=field.min_slope(), max_slope=field.max_slope(), backoffs=backoffs,
            ))
            s = self.remesh(s)
            while pending and pending[0] <= s.t + self.SNAP_TOL:
                traj.snapshots.append(self.snapshot(s))
                pending.pop(0)

        elapsed = time.perf_counter() - started
        logger.info(
            f"✅ Nonlocal run finished: {len(traj.steps)} steps, {len(s.masses)} cells, "
            f"mass drift {abs(s.total_mass - traj.initial_mass):.2e}, {elapsed:.2f}s"
        )
        return traj

    def _advance(self, s: SimState, dt: float, target: float) -> Tuple[SimState, float, int]:
        for attempt in range(self.cfg.max_backoff + 1):
            try:
                nxt = self.step(s, dt)
            except CellCollapse as e:
                if attempt == self.cfg.max_backoff:
                    raise CellCollapse(f"t={s.t:.6f}: {e} after {attempt} halvings of dt") from e
                logger.warning(f"⚠️ Step rejected at t={s.t:.6f} (dt={dt:.3e}): {e}; halving dt")
                dt *= 0.5
                continue
            if abs(nxt.t - target) <= self.SNAP_TOL * max(1.0, target):
                nxt = replace(nxt, t=target)
            return nxt, dt, attempt
        raise CellCollapse(f"t={s.t:.6f}: no admissible step")


# ===== FUNCTIONAL ENTRY POINTS =====

def field_of(s: SimState) -> WField:
    return field_from_arrays(s.kernel, s.nodes, s.values, s.left_state, s.right_state)


def node_velocities(s: SimState) -> np.ndarray:
    """v_i = V(W(x_i)) at every breakpoint, from the cached W"""
    return np.atleast_1d(eval_v(s.velocity, s.node_w))


def transport_field(w: WField, velocity, x: np.ndarray, left_sided: bool = False) -> np.ndarray:
    """g = V'(W) W dW/dx at x (right-sided unless left_sided)"""
    values = w.evaluate(x)
    slopes = w.slope_left(x) if left_sided else w.slope(x)
    return np.atleast_1d(eval_dv(velocity, values)) * values * slopes


def _piece_maxima(phi, lo: np.ndarray, hi: np.ndarray, samples: int = 16, iterations: int = 64) -> float:
    """
    Max of phi(W, k) over W in (lo[k], hi[k]) for every piece k at once

    A coarse grid picks the best sample of each piece and a golden-section
    search refines it inside the neighbouring grid cells.
    """
    if lo.size == 0:
        return -math.inf
    rows = np.arange(lo.size)
    span = hi - lo
    grid = lo[:, None] + span[:, None] * (np.arange(samples) + 0.5)[None, :] / samples
    sampled = phi(grid, rows[:, None])
    best = sampled.argmax(axis=1)
    centre = grid[rows, best]
    a = np.maximum(centre - span / samples, lo)
    b = np.minimum(centre + span / samples, hi)
    for _ in range(iterations):
        c = b - GOLDEN * (b - a)
        d = a + GOLDEN * (b - a)
        upper = phi(c, rows) < phi(d, rows)
        a = np.where(upper, c, a)
        b = np.where(upper, b, d)
    refined = phi(0.5 * (a + b), rows)
    return float(max(sampled.max(), refined.max()))


def max_transport(w: WField, velocity) -> float:
    """
    Sup of g = V'(W) W dW/dx over the real line

    W is monotone between smoothness breaks and dW/dx there is a function
    of W alone ((W - rho)/eps for the exponential kernel, a constant for
    the box kernel), so g is maximized over W on each piece. One-sided
    values at the breaks close the candidates; g vanishes where W is flat.

    Args:
        w: Nonlocal field of one profile
        velocity: Velocity model V

    Returns:
        sup g, never below 0
    """
    breaks = w.smoothness_breaks()
    right = transport_field(w, velocity, breaks)
    left = transport_field(w, velocity, breaks, left_sided=True)

    if w.family == KernelFamily.EXPONENTIAL:
        lo = np.concatenate(([w.left_state], w.node_values[:-1]))
        hi = w.node_values
        rho = np.concatenate(([w.left_state], w.cell_values))
        eps = w.eps

        def phi(values, k):
            return eval_dv(velocity, values) * values * (values - rho[k]) / eps
    else:
        ends = w.evaluate(breaks)
        lo, hi = ends[:-1], ends[1:]
        slopes = w.slope(0.5 * (breaks[:-1] + breaks[1:])) if len(breaks) > 1 else np.empty(0)

        def phi(values, k):
            return eval_dv(velocity, values) * values * slopes[k]

    lo, hi = np.minimum(lo, hi), np.maximum(lo, hi)
    moving = hi - lo > 1e-14 * np.maximum(1.0, np.abs(hi))
    if moving.any():
        index = np.flatnonzero(moving)
        interior = _piece_maxima(lambda values, k: phi(values, index[k]), lo[moving], hi[moving])
    else:
        interior = -math.inf
    return float(max(0.0, right.max(initial=0.0), left.max(initial=0.0), interior))


def step(s: SimState, dt: float, cfg: SimConfig = None) -> SimState:
    """One midpoint step without remeshing; CellCollapse if dt is too large"""
    solver = LagrangianSolver(cfg or _config_for(s))
    solver.lower, solver.upper = _state_range(s)
    return solver.step(s, dt)


def admissible_dt(s: SimState, cfg: SimConfig) -> float:
    """Largest stable dt, clipped to the next snapshot time after s.t"""
    horizon = next((t for t in cfg.schedule if t > s.t + LagrangianSolver.SNAP_TOL), cfg.final_time)
    return LagrangianSolver(cfg).admissible_dt(s, horizon)


def simulate(rho0: PiecewiseConstantProfile, cfg: SimConfig) -> Trajectory:
    """
    Run the Lagrangian solver over [0, T]

    The velocity must be nonincreasing and twice differentiable on the data
    range; DomainError otherwise.

    Args:
        rho0: Initial density
        cfg: Kernel, velocity, final time, snapshot schedule and refinement

    Returns:
        Trajectory with one snapshot per scheduled time
    """
    report = check_assumptions(cfg.velocity, rho0.ess_inf, rho0.ess_sup)
    if not (report.nonincreasing and report.lipschitz_at_range):
        raise DomainError(
            f"{cfg.velocity.describe()} is not nonincreasing and smooth on "
            f"[{rho0.ess_inf:g}, {rho0.ess_sup:g}]"
        )
    return LagrangianSolver(cfg).run(rho0)


def state_from_profile(p: PiecewiseConstantProfile, cfg: SimConfig) -> SimState:
    """Initial state without refinement or padding, for single-step use"""
    nodes, values = p.nodes, p.values
    state = SimState(
        t=0.0,
        nodes=nodes,
        masses=values * np.diff(nodes),
        left_state=p.left_state,
        right_state=p.right_state,
        velocity=cfg.velocity,
        kernel=cfg.kernel,
        node_w=np.zeros_like(nodes),
    )
    return LagrangianSolver._with_geometry(state, nodes)


def _state_range(s: SimState) -> Tuple[float, float]:
    ext = np.concatenate(([s.left_state], s.values, [s.right_state]))
    return float(ext.min()), float(ext.max())


def _config_for(s: SimState) -> SimConfig:
    return SimConfig(kernel=s.kernel, velocity=s.velocity, final_time=max(1.0, s.t))
