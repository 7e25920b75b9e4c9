"""
Convergence Service
Epsilon sweeps of the nonlocal solver against a fine Godunov reference
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Tuple

import numpy as np

from app.engine.local_solver import FluxFn, riemann_profile, simulate_local
from app.engine.nonlocal_solver import simulate
from app.engine.velocity import check_assumptions
from app.schemas.kernel_schema import KernelFamily, KernelSpec
from app.schemas.profile_schema import PiecewiseConstantProfile, Window
from app.schemas.simulation_schema import LocalGrid, SimConfig, Trajectory
from app.schemas.sweep_schema import SweepConfig, SweepRow, SweepTable
from app.schemas.velocity_schema import AssumptionReport
from app.utils.exceptions import DegenerateFit, MissingAssumption, NonConcave
from app.utils.profiles import from_uniform_values, l1_distance

logger = logging.getLogger(__name__)


def theorem_path(rep: AssumptionReport) -> str:
    """
    Which route certifies the limit: the W bound, or the g bound together
    with a strictly negative V'
    """
    if rep.w_bound_available:
        return f"w_bound({rep.kappa_w_source})"
    if rep.g_bound_available and rep.strictly_decreasing_kappa2 is not None:
        return f"g_bound({rep.kappa_g_source})"
    raise MissingAssumption(
        f"velocity on [{rep.m:g}, {rep.M:g}] satisfies neither the W-bound hypotheses "
        f"nor the g-bound hypotheses with V' <= -kappa2"
    )


class ConvergenceService:
    """
    Runs one nonlocal simulation per eps and compares it, at every
    comparison time, with one shared local reference
    """

    # Ratio between the reference cell width and the W resampling grid
    W_RESAMPLE_FACTOR = 4

    def __init__(self, cfg: SweepConfig, threads: int = 0):
        self.cfg = cfg
        self.threads = max(0, threads)
        self.flux = FluxFn(cfg.velocity)

    # ===== REFERENCE =====

    def reference_grid(self) -> LocalGrid:
        """Comparison window extended by the distance waves travel before T"""
        cfg = self.cfg
        datum = cfg.datum
        speed = self.flux.max_speed(datum.ess_inf, datum.ess_sup)
        pad = speed * cfg.final_time + 4.0 * cfg.dx
        return LocalGrid.covering(Window(lo=cfg.window.lo - pad, hi=cfg.window.hi + pad), cfg.dx)

    def reference(self) -> Trajectory:
        cfg = self.cfg
        grid = self.reference_grid()
        logger.info(f"Reference: Godunov on {grid.window} with dx={grid.dx:g}")
        return simulate_local(cfg.datum, self.flux, grid, cfg.final_time, cfg.cfl, [0.0] + list(cfg.times))

    def riemann_check(self, reference: Trajectory) -> Dict[float, float]:
        """
        L1 gap between the reference and the exact solution, for Riemann data
        """
        datum = self.cfg.datum
        if datum.n_cells != 0:
            return {}
        out = {}
        window = self.cfg.window
        cells = int(math.ceil(window.length / self.cfg.dx)) * 4
        for t in self.cfg.times:
            try:
                exact = riemann_profile(
                    self.flux, datum.left_state, datum.right_state, t, window, cells, at=datum.nodes[0]
                )
            except NonConcave as e:
                logger.info(f"No exact cross-check: {e}")
                return {}
            out[t] = l1_distance(reference.at(t).profile, exact, window)
            logger.info(f"Reference vs exact Riemann solution at t={t:g}: L1 = {out[t]:.3e}")
        return out

    # ===== PER-EPS RUNS =====

    def sim_config(self, eps: float) -> SimConfig:
        cfg = self.cfg
        return SimConfig(
            kernel=KernelSpec(family=cfg.kernel, eps=eps),
            velocity=cfg.velocity,
            final_time=cfg.final_time,
            snapshot_times=list(cfg.times),
            refinement=cfg.refinement,
        )

    def _w_profile(self, traj: Trajectory, t: float) -> PiecewiseConstantProfile:
        """Exact window averages of W on a grid finer than the reference"""
        window = self.cfg.window
        cells = int(math.ceil(window.length * self.W_RESAMPLE_FACTOR / self.cfg.dx))
        edges = np.linspace(window.lo, window.hi, cells + 1)
        snap = traj.at(t)
        averages = snap.w.window_averages(edges)
        return from_uniform_values(window.lo, window.hi, averages, snap.profile.left_state, snap.profile.right_state)

    def run_eps(self, eps: float, reference: Trajectory) -> List[SweepRow]:
        traj = simulate(self.cfg.datum, self.sim_config(eps))
        rows = []
        window = self.cfg.window
        for t in self.cfg.times:
            ref = reference.at(t).profile
            err_rho = l1_distance(traj.at(t).profile, ref, window)
            err_w = l1_distance(self._w_profile(traj, t), ref, window)
            rows.append(SweepRow(eps=eps, t=t, err_rho=err_rho, err_W=err_w))
            logger.info(f"eps={eps:g} t={t:g}: err_rho={err_rho:.4e} err_W={err_w:.4e}")
        return rows

    def run(self) -> SweepTable:
        cfg = self.cfg
        datum = cfg.datum
        rep = check_assumptions(cfg.velocity, datum.ess_inf, datum.ess_sup)
        path = theorem_path(rep)
        logger.info(f"🚀 Sweep over eps={cfg.eps_list} ({path}), times={cfg.times}")

        reference = self.reference()
        if self.threads > 0:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                chunks = list(pool.map(lambda eps: self.run_eps(eps, reference), cfg.eps_list))
        else:
            chunks = [self.run_eps(eps, reference) for eps in cfg.eps_list]

        rows = sorted((row for chunk in chunks for row in chunk), key=lambda row: (row.t, row.eps))
        table = SweepTable(
            rows=rows,
            theorem_path=path,
            exploratory=cfg.kernel == KernelFamily.BOX,
            reference_errors=self.riemann_check(reference),
        )
        for t in cfg.times:
            table.monotone_rho[t], table.monotone_W[t] = monotone_flags(table, t)
            table.decay_rho[t] = _safe_fit(table, t, "err_rho")
            table.decay_W[t] = _safe_fit(table, t, "err_W")
        return table


def monotone_flags(table: SweepTable, t: float) -> Tuple[bool, bool]:
    """Whether err_rho and err_W strictly decrease as eps decreases"""
    rows = table.at_time(t)
    rho = [row.err_rho for row in rows]
    w = [row.err_W for row in rows]
    return (
        all(b < a for a, b in zip(rho, rho[1:])),
        all(b < a for a, b in zip(w, w[1:])),
    )


def run_sweep(cfg: SweepConfig, threads: int = 0) -> SweepTable:
    """Sweep table for cfg; threads > 0 runs the eps values concurrently"""
    return ConvergenceService(cfg, threads).run()


def fit_decay(table: SweepTable, t: float, metric: str = "err_rho") -> float:
    """
    Least-squares slope of log(error) against log(eps) at time t

    Args:
        table: Sweep table with at least three eps values at t
        t: Snapshot time
        metric: "err_rho" or "err_W"

    Returns:
        Fitted exponent; DegenerateFit when a row has zero error
    """
    rows = table.at_time(t)
    if len(rows) < 3:
        raise DegenerateFit(f"need at least 3 eps values at t={t:g}, got {len(rows)}")
    errors = np.array([getattr(row, metric) for row in rows])
    if np.any(errors <= 0):
        raise DegenerateFit(f"{metric} vanishes at t={t:g}; log fit undefined")
    eps = np.array([row.eps for row in rows])
    slope, _ = np.polyfit(np.log(eps), np.log(errors), 1)
    return float(slope)


def _safe_fit(table: SweepTable, t: float, metric: str) -> Optional[float]:
    try:
        return fit_decay(table, t, metric)
    except DegenerateFit as e:
        logger.debug(f"No decay exponent: {e}")
        return None
