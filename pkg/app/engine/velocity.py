"""
Velocity models
Closed-form V, V', V'' for the traffic catalog and an automated checker
for the hypothesis sets of the Oleinik-type bounds.
"""

import logging
import math
from typing import Tuple, Union

import numpy as np

from app.schemas.velocity_schema import AssumptionReport, VelocityFamily, VelocityModel
from app.utils.exceptions import DomainError

logger = logging.getLogger(__name__)

Density = Union[float, np.ndarray]


# ===== VALIDITY =====

def validity_interval(model: VelocityModel, order: int = 0) -> Tuple[float, float, bool]:
    """
    (lo, hi, lo_open) for evaluating the derivative of the given order

    The regularized California variant is finite at 0, its derivatives are not.
    """
    family = model.family
    if family == VelocityFamily.CUSTOM:
        knots = model.custom.knots
        return knots[0], knots[-1], False
    if family == VelocityFamily.GREENBERG:
        return 0.0, math.inf, True
    if family == VelocityFamily.GEN_CALIFORNIA:
        return 0.0, math.inf, not (model.regularized and order == 0)
    return 0.0, math.inf, False


def _check_domain(model: VelocityModel, xi: np.ndarray, order: int) -> None:
    lo, hi, lo_open = validity_interval(model, order)
    if xi.size == 0:
        return
    low = xi.min()
    if not np.all(np.isfinite(xi)):
        raise DomainError(f"{model.describe()}: non-finite density")
    if low < lo or (lo_open and low <= lo) or xi.max() > hi:
        bracket = "(" if lo_open else "["
        raise DomainError(
            f"{model.describe()}: density {low if low <= lo else xi.max():g} outside "
            f"validity interval {bracket}{lo:g}, {hi:g}]"
        )


def _as_array(xi: Density) -> np.ndarray:
    return np.asarray(xi, dtype=float)


def _unwrap(out: np.ndarray) -> Density:
    return float(out) if out.ndim == 0 else out


def _custom_eval(model: VelocityModel, xi: np.ndarray, table_name: str) -> np.ndarray:
    table = model.custom
    knots = np.asarray(table.knots)
    rows = getattr(table, table_name)
    degree = max(len(row) for row in rows)
    coeffs = np.zeros((len(rows), degree))
    for j, row in enumerate(rows):
        coeffs[j, : len(row)] = row
    piece = np.clip(np.searchsorted(knots, xi, side="right") - 1, 0, len(rows) - 1)
    local = xi - knots[piece]
    out = np.zeros_like(xi)
    for power in range(degree - 1, -1, -1):
        out = out * local + coeffs[piece, power]
    return out


# ===== EVALUATION =====

def eval_v(model: VelocityModel, xi: Density) -> Density:
    """V(xi)"""
    x = _as_array(xi)
    _check_domain(model, x, 0)
    v0, rho = model.v_max, model.rho_max
    family = model.family

    if family == VelocityFamily.GREENSHIELDS:
        out = v0 * (1.0 - x / rho)
    elif family == VelocityFamily.UNDERWOOD:
        out = v0 * np.exp(-x / rho)
    elif family == VelocityFamily.GEN_GREENSHIELDS:
        out = v0 * (1.0 - (x / rho) ** model.n)
    elif family == VelocityFamily.GEN_CALIFORNIA:
        a = model.alpha
        if model.regularized:
            shift = v0 ** a / (v0 ** a + 1.0)
            out = v0 * (1.0 / (x ** a + shift) - rho ** (-a))
        else:
            out = v0 * (x ** (-a) - rho ** (-a))
    elif family == VelocityFamily.GREENBERG:
        out = v0 * np.log(rho / x)
    else:
        out = _custom_eval(model, x, "v")
    return _unwrap(np.asarray(out, dtype=float))


def eval_dv(model: VelocityModel, xi: Density) -> Density:
    """V'(xi)"""
    x = _as_array(xi)
    _check_domain(model, x, 1)
    v0, rho = model.v_max, model.rho_max
    family = model.family

    if family == VelocityFamily.GREENSHIELDS:
        out = np.full_like(x, -v0 / rho)
    elif family == VelocityFamily.UNDERWOOD:
        out = -(v0 / rho) * np.exp(-x / rho)
    elif family == VelocityFamily.GEN_GREENSHIELDS:
        n = model.n
        out = -v0 * n * x ** (n - 1) / rho ** n
    elif family == VelocityFamily.GEN_CALIFORNIA:
        a = model.alpha
        if model.regularized:
            shift = v0 ** a / (v0 ** a + 1.0)
            u = x ** a + shift
            out = -v0 * a * x ** (a - 1.0) / u ** 2
        else:
            out = -v0 * a * x ** (-a - 1.0)
    elif family == VelocityFamily.GREENBERG:
        out = -v0 / x
    else:
        out = _custom_eval(model, x, "dv")
    return _unwrap(np.asarray(out, dtype=float))


def eval_d2v(model: VelocityModel, xi: Density) -> Density:
    """V''(xi)"""
    x = _as_array(xi)
    _check_domain(model, x, 2)
    v0, rho = model.v_max, model.rho_max
    family = model.family

    if family == VelocityFamily.GREENSHIELDS:
        out = np.zeros_like(x)
    elif family == VelocityFamily.UNDERWOOD:
        out = (v0 / rho ** 2) * np.exp(-x / rho)
    elif family == VelocityFamily.GEN_GREENSHIELDS:
        n = model.n
        if n == 1:
            out = np.zeros_like(x)
        else:
            out = -v0 * n * (n - 1) * x ** (n - 2) / rho ** n
    elif family == VelocityFamily.GEN_CALIFORNIA:
        a = model.alpha
        if model.regularized:
            shift = v0 ** a / (v0 ** a + 1.0)
            u = x ** a + shift
            out = -v0 * a * ((a - 1.0) * x ** (a - 2.0) / u ** 2 - 2.0 * a * x ** (2.0 * a - 2.0) / u ** 3)
        else:
            out = v0 * a * (a + 1.0) * x ** (-a - 2.0)
    elif family == VelocityFamily.GREENBERG:
        out = v0 / x ** 2
    else:
        out = _custom_eval(model, x, "d2v")
    return _unwrap(np.asarray(out, dtype=float))


def chebyshev_points(m: float, M: float, samples: int) -> np.ndarray:
    """Chebyshev-Lobatto points of [m, M], endpoints included"""
    k = np.arange(samples)
    points = 0.5 * (m + M) + 0.5 * (M - m) * np.cos(np.pi * k / (samples - 1))
    points[0], points[-1] = M, m
    return np.sort(points)


# ===== ASSUMPTION CHECKER =====

class AssumptionChecker:
    """
    Certifies the pointwise hypotheses of the Oleinik-type bounds by dense
    sampling of [m, M] with a small safety margin
    """

    DEFAULT_SAMPLES = 4097
    MARGIN = 1e-9
    ZERO_H_TOL = 1e-12

    def __init__(self, samples: int = DEFAULT_SAMPLES, margin: float = MARGIN):
        if samples < 2:
            raise ValueError("need at least 2 samples")
        self.samples = samples
        self.margin = margin

    def check(self, model: VelocityModel, m: float, M: float) -> AssumptionReport:
        if m < 0 or M < m:
            raise ValueError(f"need 0 <= m <= M, got m={m}, M={M}")

        xi = chebyshev_points(m, M, self.samples)
        v = np.atleast_1d(eval_v(model, xi))
        dv = np.atleast_1d(eval_dv(model, xi))
        d2v = np.atleast_1d(eval_d2v(model, xi))

        finite = bool(np.all(np.isfinite(v)) and np.all(np.isfinite(dv)) and np.all(np.isfinite(d2v)))
        scale = max(1.0, float(np.max(np.abs(dv))) * max(1.0, M), float(np.max(np.abs(d2v * xi))))
        tol = self.margin * scale

        report = {
            "m": m,
            "M": M,
            "samples": self.samples,
            "nonincreasing": bool(np.all(dv <= tol)),
            "lipschitz_at_range": finite,
        }

        q = dv + d2v * xi
        sup_dv = float(dv.max())

        if sup_dv < -tol:
            report["strictly_decreasing_kappa2"] = -sup_dv

        # V' = -delta
        if float(dv.max() - dv.min()) <= tol and sup_dv < -tol:
            report["linear"] = True
            report["delta"] = -float(dv.mean())

        # 0 <= V' + V'' xi <= kappa1, V' <= -kappa2
        if float(q.min()) >= -tol and sup_dv < -tol:
            kappa1 = max(float(q.max()), self.margin)
            kappa2 = -sup_dv
            if kappa2 - kappa1 > tol:
                report["conv_more"] = True
                report["conv_kappa1"] = kappa1
                report["conv_kappa2"] = kappa2

        # 0 <= (-V' - V'' xi)(M - m) <= -V' xi
        lhs = -q * (M - m)
        if float(lhs.min()) >= -tol and bool(np.all(lhs <= -dv * xi + tol)):
            report["ob2"] = True

        # -V' <= V'' xi <= -(2 - kappa1) V'
        if sup_dv < -tol and bool(np.all(-dv <= d2v * xi + tol)):
            ratio = d2v * xi / (-dv)
            kappa1 = 2.0 - float(ratio.max())
            if kappa1 > self.margin:
                report["ob3"] = True
                report["ob3_kappa1"] = kappa1

        if float(np.max(np.abs(q))) <= self.ZERO_H_TOL * max(1.0, float(np.max(np.abs(dv)))):
            report["greenberg_zero_h"] = True

        self._select_constants(report)
        result = AssumptionReport(**report)
        logger.debug(f"Assumptions for {model.describe()}: {result.summary()}")
        return result

    @staticmethod
    def _select_constants(report: dict) -> None:
        """Pick the tightest admissible kappa for each bound"""
        if not (report["nonincreasing"] and report["lipschitz_at_range"]):
            return

        w_candidates = []
        if report.get("linear"):
            w_candidates.append((report["delta"], "delta"))
        if report.get("conv_more"):
            w_candidates.append((report["conv_kappa2"] - report["conv_kappa1"], "kappa2-kappa1"))
        if w_candidates:
            report["kappa_w"], report["kappa_w_source"] = max(w_candidates)

        g_candidates = []
        if report.get("ob2"):
            g_candidates.append((1.0, "ob2"))
        if report.get("ob3"):
            g_candidates.append((report["ob3_kappa1"], "ob3"))
        if report.get("greenberg_zero_h"):
            g_candidates.append((1.0, "greenberg"))
        if g_candidates:
            report["kappa_g"], report["kappa_g_source"] = max(g_candidates)


def check_assumptions(
    model: VelocityModel,
    m: float,
    M: float,
    samples: int = AssumptionChecker.DEFAULT_SAMPLES,
) -> AssumptionReport:
    """
    Functional entry point for AssumptionChecker.check

    Args:
        model: Velocity model
        m: Lower end of the data range
        M: Upper end of the data range
        samples: Grid size for the sampled conditions

    Returns:
        AssumptionReport with every flag and the derived constants
    """
    return AssumptionChecker(samples=samples).check(model, m, M)


def ob2_threshold(model: VelocityModel, M: float, samples: int = 1025, tol: float = 1e-10) -> float:
    """
    Smallest ratio m/M for which condition ob2 holds on [m, M], by bisection

    Relies on ob2 being monotone in the range: it holds for every ratio
    above the threshold.
    """
    checker = AssumptionChecker(samples=samples)
    lo_open = validity_interval(model, 2)[2]
    lo = 1e-9 if lo_open else 0.0
    hi = 1.0

    if checker.check(model, lo * M, M).ob2:
        return lo

    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if checker.check(model, mid * M, M).ob2:
            hi = mid
        else:
            lo = mid
    logger.info(f"ob2 threshold for {model.describe()} at M={M:g}: m/M = {hi:.8f}")
    return hi
