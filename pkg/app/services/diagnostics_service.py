"""
Diagnostics Service
Turns the one-sided Lipschitz bounds, the BV bound, the maximum principle
and mass conservation into machine-checkable reports
"""

import logging
from typing import List, Optional

import numpy as np

from app.engine.kernel import WField
from app.engine.velocity import check_assumptions, eval_dv
from app.schemas.profile_schema import PiecewiseConstantProfile, Window
from app.schemas.report_schema import (
    BoundsReport, CheckReport, CheckRow, OleinikGReport, OleinikWReport, TVReport,
)
from app.schemas.simulation_schema import Snapshot, Trajectory
from app.schemas.velocity_schema import AssumptionReport, VelocityModel
from app.utils.exceptions import MissingAssumption
from app.utils.profiles import is_nondecreasing

logger = logging.getLogger(__name__)


def min_difference_quotient(w: WField) -> float:
    """
    Exact infimum of (W(x) - W(y))/(x - y)

    W is Lipschitz, so this is the infimum of its slope: the smallest
    one-sided slope at a smoothness break, or 0 from the flat far tails.
    """
    return w.min_slope()


def _max_cell_width(profile: PiecewiseConstantProfile) -> float:
    return float(np.diff(profile.nodes).max()) if profile.n_cells else 0.0


def w_mesh_margin(snap: Snapshot) -> float:
    """2 (max cell width) (max |dW/dx|)"""
    return 2.0 * _max_cell_width(snap.profile) * snap.w.max_abs_slope()


def g_mesh_margin(snap: Snapshot, model: VelocityModel) -> float:
    """W margin scaled by max |V'(W) W| over the nodes"""
    w_values = snap.w.node_values
    scale = float(np.max(np.abs(np.atleast_1d(eval_dv(model, w_values)) * w_values)))
    return w_mesh_margin(snap) * scale


class DiagnosticsService:
    """
    Checks a trajectory against the bounds it must satisfy

    Snapshots before t_min (default 5% of the last snapshot time) and at
    t = 0 are not checked by the time-weighted bounds.
    """

    DEFAULT_SLACK = 0.05
    T_MIN_FRACTION = 0.05
    VALUE_TOL = 1e-8
    MASS_TOL = 1e-10

    def __init__(self, slack: float = DEFAULT_SLACK, t_min: Optional[float] = None):
        if slack < 0:
            raise ValueError(f"slack must be nonnegative, got {slack}")
        self.slack = slack
        self.t_min = t_min

    def _checked(self, traj: Trajectory) -> List[Snapshot]:
        if not traj.snapshots:
            return []
        t_min = self.t_min if self.t_min is not None else self.T_MIN_FRACTION * traj.snapshots[-1].t
        return [snap for snap in traj.snapshots if snap.t > 0 and snap.t >= t_min - 1e-14]

    @staticmethod
    def _require_nonlocal(traj: Trajectory, check: str) -> None:
        if not traj.is_nonlocal:
            raise ValueError(f"{check} needs a nonlocal trajectory, got '{traj.solver}'")

    # ===== ONE-SIDED BOUNDS =====

    def check_oleinik_w(self, traj: Trajectory, rep: AssumptionReport) -> OleinikWReport:
        self._require_nonlocal(traj, "check_oleinik_w")
        if not rep.w_bound_available:
            raise MissingAssumption(
                f"no W bound on [{rep.m:g}, {rep.M:g}]: neither V' constant nor the convexity condition holds"
            )
        kappa = rep.kappa_w
        report = OleinikWReport(
            name="oleinik_w",
            kappa=kappa,
            kappa_source=rep.kappa_w_source,
            slack=self.slack,
            exploratory=traj.kernel.exploratory,
        )
        for snap in self._checked(traj):
            value = min_difference_quotient(snap.w)
            margin = w_mesh_margin(snap)
            bound = -1.0 / (kappa * snap.t)
            passed = value >= (1.0 + self.slack) * bound - margin
            report.rows.append(CheckRow(t=snap.t, metric="min_dxW", value=value, bound=bound, margin=margin, passed=passed))
        self._log(report)
        return report

    def check_oleinik_g(self, traj: Trajectory, model: VelocityModel, rep: AssumptionReport) -> OleinikGReport:
        self._require_nonlocal(traj, "check_oleinik_g")
        if not rep.g_bound_available:
            raise MissingAssumption(f"no g bound on [{rep.m:g}, {rep.M:g}]: none of the g conditions holds")
        kappa = rep.kappa_g
        sup_rho0 = traj.initial.sup_norm
        report = OleinikGReport(
            name="oleinik_g",
            kappa=kappa,
            kappa_source=rep.kappa_g_source,
            sup_rho0=sup_rho0,
            slack=self.slack,
            exploratory=traj.kernel.exploratory,
        )
        for snap in self._checked(traj):
            value = snap.g_max
            margin = g_mesh_margin(snap, model)
            bound = sup_rho0 / (kappa * snap.t)
            passed = value <= (1.0 + self.slack) * bound + margin
            report.rows.append(CheckRow(t=snap.t, metric="sup_g", value=value, bound=bound, margin=margin, passed=passed))
        self._log(report)
        return report

    # ===== BV BOUND =====

    def check_tv_bound(self, traj: Trajectory, k: Window) -> TVReport:
        self._require_nonlocal(traj, "check_tv_bound")
        snaps = [snap for snap in traj.snapshots if snap.t > 0]
        if not snaps:
            raise ValueError("check_tv_bound needs a snapshot at t > 0")
        report = TVReport(name="tv_w", window=k, slack=self.slack, exploratory=traj.kernel.exploratory)
        for snap in snaps:
            tv = snap.w.total_variation(k)
            bound = 2.0 * (k.length / (2.0 * snap.t) + snap.w.sup_norm(k))
            passed = tv <= (1.0 + self.slack) * bound
            report.rows.append(CheckRow(t=snap.t, metric="tv_W", value=tv, bound=bound, passed=passed))
        self._log(report)
        return report

    # ===== MAXIMUM PRINCIPLE AND MASS =====

    def check_bounds_and_mass(self, traj: Trajectory, rho0: PiecewiseConstantProfile) -> BoundsReport:
        lower, upper = rho0.ess_inf, rho0.ess_sup
        report = BoundsReport(
            name="bounds_mass", lower=lower, upper=upper, value_tol=self.VALUE_TOL, mass_tol=self.MASS_TOL,
        )
        scale = abs(traj.initial_mass) if traj.initial_mass != 0 else 1.0
        drift_max = 0.0
        for snap in traj.snapshots:
            values = snap.profile.extended_values
            low, high = float(values.min()), float(values.max())
            report.rows.append(CheckRow(
                t=snap.t, metric="min_rho", value=low, bound=lower, passed=low >= lower - self.VALUE_TOL,
            ))
            report.rows.append(CheckRow(
                t=snap.t, metric="max_rho", value=high, bound=upper, passed=high <= upper + self.VALUE_TOL,
            ))
            drift = abs(snap.total_mass - traj.initial_mass) / scale
            drift_max = max(drift_max, drift)
            report.rows.append(CheckRow(
                t=snap.t, metric="mass_drift", value=drift, bound=self.MASS_TOL, passed=drift <= self.MASS_TOL,
            ))
        report.max_mass_drift = drift_max
        self._log(report)
        return report

    def check_monotonicity(self, traj: Trajectory) -> CheckReport:
        """Nondecreasing data stay nondecreasing; reports nothing for other data"""
        report = CheckReport(name="monotone")
        if not is_nondecreasing(traj.initial):
            return report
        for snap in traj.snapshots:
            worst = float(np.min(np.diff(snap.profile.extended_values), initial=0.0))
            report.rows.append(CheckRow(
                t=snap.t, metric="min_jump", value=worst, bound=0.0, passed=worst >= -self.VALUE_TOL,
            ))
        self._log(report)
        return report

    # ===== ALL CHECKS =====

    def run_all(self, traj: Trajectory, window: Window) -> List[CheckReport]:
        """
        Every check that applies to the trajectory

        Bounds whose hypotheses fail are skipped with a warning instead of
        raising MissingAssumption.
        """
        reports: List[CheckReport] = [self.check_bounds_and_mass(traj, traj.initial)]
        if not traj.is_nonlocal:
            return reports

        reports.append(self.check_monotonicity(traj))
        rep = check_assumptions(traj.velocity, traj.initial.ess_inf, traj.initial.ess_sup)
        for name, run in (
            ("oleinik_w", lambda: self.check_oleinik_w(traj, rep)),
            ("oleinik_g", lambda: self.check_oleinik_g(traj, traj.velocity, rep)),
        ):
            try:
                reports.append(run())
            except MissingAssumption as e:
                logger.warning(f"⚠️ Skipping {name}: {e}")
        if any(snap.t > 0 for snap in traj.snapshots):
            reports.append(self.check_tv_bound(traj, window))
        return reports

    @staticmethod
    def _log(report: CheckReport) -> None:
        if report.passed:
            logger.info(report.summary())
        else:
            level = logging.INFO if report.exploratory else logging.WARNING
            worst = report.failures()[0]
            logger.log(level, f"{report.summary()}; first at t={worst.t:g}: {worst.value:.6g} vs {worst.bound:.6g}")


# ===== FUNCTIONAL ENTRY POINTS =====

def check_oleinik_w(traj: Trajectory, rep: AssumptionReport, slack: float = DiagnosticsService.DEFAULT_SLACK) -> OleinikWReport:
    return DiagnosticsService(slack).check_oleinik_w(traj, rep)


def check_oleinik_g(
    traj: Trajectory, model: VelocityModel, rep: AssumptionReport, slack: float = DiagnosticsService.DEFAULT_SLACK
) -> OleinikGReport:
    return DiagnosticsService(slack).check_oleinik_g(traj, model, rep)


def check_tv_bound(traj: Trajectory, k: Window, slack: float = DiagnosticsService.DEFAULT_SLACK) -> TVReport:
    return DiagnosticsService(slack).check_tv_bound(traj, k)


def check_bounds_and_mass(traj: Trajectory, rho0: PiecewiseConstantProfile) -> BoundsReport:
    return DiagnosticsService().check_bounds_and_mass(traj, rho0)
