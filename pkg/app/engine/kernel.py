"""
Nonlocal term
Exact evaluation of W = rho * eta_eps and its slope for piecewise-constant
densities, for the exponential and the box kernel.

Exponential kernel, within cell i (value rho_i, ending at x_{i+1}):
    W(x) = e^{(x - x_{i+1})/eps} W(x_{i+1}) + rho_i (1 - e^{(x - x_{i+1})/eps})
seeded with W(x_N) = right_state, and dW/dx = (W - rho)/eps.

Box kernel: W(x) = (R(x + eps) - R(x))/eps with R the primitive of rho, so W
is piecewise linear with kinks at x_i and x_i - eps.
"""

import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from app.schemas.kernel_schema import KernelFamily, KernelSpec
from app.schemas.profile_schema import PiecewiseConstantProfile, Window
from app.utils.exceptions import KernelMismatch
from app.utils.profiles import primitive_arrays

logger = logging.getLogger(__name__)


# ===== ARRAY-LEVEL KERNELS (used by the solver on raw meshes) =====

def exp_node_values(nodes: np.ndarray, values: np.ndarray, right_state: float, eps: float) -> np.ndarray:
    """
    W at every node by the right-to-left recurrence, O(N)
    """
    n_nodes = len(nodes)
    decay = np.exp(-np.diff(nodes) / eps).tolist()
    vals = values.tolist()
    out = [0.0] * n_nodes
    w = float(right_state)
    out[-1] = w
    for i in range(n_nodes - 2, -1, -1):
        a = decay[i]
        w = a * w + (1.0 - a) * vals[i]
        out[i] = w
    return np.asarray(out)


def window_end_cells(nodes: np.ndarray, shifted: np.ndarray) -> np.ndarray:
    """
    searchsorted(nodes, shifted, side="right") for sorted shifted, by a
    single merge sweep, O(N)
    """
    xs = nodes.tolist()
    n = len(xs)
    out = [0] * len(shifted)
    j = 0
    for k, y in enumerate(shifted.tolist()):
        while j < n and xs[j] <= y:
            j += 1
        out[k] = j
    return np.asarray(out, dtype=np.intp)


def box_node_values(
    nodes: np.ndarray, values: np.ndarray, left_state: float, right_state: float, eps: float
) -> np.ndarray:
    """W at every node from the primitive of rho"""
    ahead_x = nodes + eps
    ahead = primitive_arrays(
        nodes, values, left_state, right_state, ahead_x, idx=window_end_cells(nodes, ahead_x)
    )
    here = primitive_arrays(
        nodes, values, left_state, right_state, nodes, idx=np.arange(1, len(nodes) + 1)
    )
    return (ahead - here) / eps


def node_values(
    kernel: KernelSpec, nodes: np.ndarray, values: np.ndarray, left_state: float, right_state: float
) -> np.ndarray:
    if kernel.family == KernelFamily.EXPONENTIAL:
        return exp_node_values(nodes, values, right_state, kernel.eps)
    return box_node_values(nodes, values, left_state, right_state, kernel.eps)


def _double_primitive(
    nodes: np.ndarray, values: np.ndarray, left_state: float, right_state: float, x: np.ndarray
) -> np.ndarray:
    """
    S(x) = integral of R from nodes[0] to x, exact (R is piecewise linear)
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    widths = np.diff(nodes)
    cum_r = np.concatenate(([0.0], np.cumsum(values * widths)))
    cum_s = np.concatenate(([0.0], np.cumsum(cum_r[:-1] * widths + 0.5 * values * widths ** 2)))
    idx = np.searchsorted(nodes, x, side="right")
    out = np.empty_like(x)

    left = idx == 0
    d = x[left] - nodes[0]
    out[left] = 0.5 * left_state * d ** 2

    right = idx == len(nodes)
    d = x[right] - nodes[-1]
    out[right] = cum_s[-1] + cum_r[-1] * d + 0.5 * right_state * d ** 2

    inner = ~(left | right)
    cell = idx[inner] - 1
    d = x[inner] - nodes[cell]
    out[inner] = cum_s[cell] + cum_r[cell] * d + 0.5 * values[cell] * d ** 2
    return out


# ===== FIELD =====

@dataclass(frozen=True)
class WField:
    """
    Nonlocal term of one profile under one kernel

    node_positions are the profile breakpoints and node_values W there; the
    cell values and tail states allow exact evaluation of W anywhere.
    """
    kernel: KernelSpec
    node_positions: np.ndarray
    node_values: np.ndarray
    cell_values: np.ndarray
    left_state: float
    right_state: float

    @property
    def eps(self) -> float:
        return self.kernel.eps

    @property
    def family(self) -> KernelFamily:
        return self.kernel.family

    @property
    def extended_values(self) -> np.ndarray:
        return np.concatenate(([self.left_state], self.cell_values, [self.right_state]))

    # ----- evaluation -----

    def evaluate(self, x) -> np.ndarray:
        """W(x), exact"""
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        if self.family == KernelFamily.BOX:
            args = (self.node_positions, self.cell_values, self.left_state, self.right_state)
            return (primitive_arrays(*args, xs + self.eps) - primitive_arrays(*args, xs)) / self.eps

        nodes, w = self.node_positions, self.node_values
        idx = np.searchsorted(nodes, xs, side="right")
        out = np.empty_like(xs)

        left = idx == 0
        a = np.exp((xs[left] - nodes[0]) / self.eps)
        out[left] = a * w[0] + (1.0 - a) * self.left_state

        right = idx == len(nodes)
        out[right] = self.right_state

        inner = ~(left | right)
        cell = idx[inner] - 1
        a = np.exp((xs[inner] - nodes[cell + 1]) / self.eps)
        out[inner] = a * w[cell + 1] + (1.0 - a) * self.cell_values[cell]
        return out

    def slope(self, x) -> np.ndarray:
        """Right-sided dW/dx at x, exact"""
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        ext = self.extended_values
        nodes = self.node_positions
        rho_here = ext[np.searchsorted(nodes, xs, side="right")]
        if self.family == KernelFamily.EXPONENTIAL:
            return (self.evaluate(xs) - rho_here) / self.eps
        rho_ahead = ext[np.searchsorted(nodes, xs + self.eps, side="right")]
        return (rho_ahead - rho_here) / self.eps

    def slope_left(self, x) -> np.ndarray:
        """Left-sided dW/dx at x, exact"""
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        ext = self.extended_values
        nodes = self.node_positions
        rho_before = ext[np.searchsorted(nodes, xs, side="left")]
        if self.family == KernelFamily.EXPONENTIAL:
            return (self.evaluate(xs) - rho_before) / self.eps
        rho_ahead = ext[np.searchsorted(nodes, xs + self.eps, side="left")]
        return (rho_ahead - rho_before) / self.eps

    def smoothness_breaks(self) -> np.ndarray:
        """Points where W may lose differentiability; W is monotone between them"""
        if self.family == KernelFamily.EXPONENTIAL:
            return self.node_positions
        return np.unique(np.concatenate((self.node_positions, self.node_positions - self.eps)))

    def one_sided_slopes(self) -> Tuple[np.ndarray, np.ndarray]:
        """(left, right) slopes at every smoothness break"""
        breaks = self.smoothness_breaks()
        return self.slope_left(breaks), self.slope(breaks)

    def min_slope(self) -> float:
        """
        Infimum of dW/dx over the real line

        Slopes are monotone inside cells and decay to 0 in the far tails,
        so the infimum is a one-sided value at a break, or 0.
        """
        left, right = self.one_sided_slopes()
        return float(min(0.0, left.min(initial=0.0), right.min(initial=0.0)))

    def max_slope(self) -> float:
        left, right = self.one_sided_slopes()
        return float(max(0.0, left.max(initial=0.0), right.max(initial=0.0)))

    def max_abs_slope(self) -> float:
        return max(-self.min_slope(), self.max_slope())

    # ----- window functionals -----

    def _window_points(self, window: Window) -> np.ndarray:
        breaks = self.smoothness_breaks()
        inside = breaks[(breaks > window.lo) & (breaks < window.hi)]
        return np.concatenate(([window.lo], inside, [window.hi]))

    def total_variation(self, window: Window) -> float:
        """
        Exact TV of W on the window: W is continuous and monotone between
        smoothness breaks, so TV is the sum of |increments| over them
        """
        values = self.evaluate(self._window_points(window))
        return float(np.abs(np.diff(values)).sum())

    def sup_norm(self, window: Window) -> float:
        return float(np.abs(self.evaluate(self._window_points(window))).max())

    def window_averages(self, edges: np.ndarray) -> np.ndarray:
        """
        Exact averages of W over consecutive intervals of edges
        """
        edges = np.asarray(edges, dtype=float)
        args = (self.node_positions, self.cell_values, self.left_state, self.right_state)
        if self.family == KernelFamily.EXPONENTIAL:
            # integral of W = integral of rho + eps (W(b) - W(a))
            integral_rho = np.diff(primitive_arrays(*args, edges))
            integral = integral_rho + self.eps * np.diff(self.evaluate(edges))
        else:
            shifted = _double_primitive(*args, edges + self.eps)
            plain = _double_primitive(*args, edges)
            integral = np.diff(shifted - plain) / self.eps
        return integral / np.diff(edges)

    def window_average(self, a: float, b: float) -> float:
        return float(self.window_averages(np.array([a, b]))[0])


def field_from_arrays(
    kernel: KernelSpec, nodes: np.ndarray, values: np.ndarray, left_state: float, right_state: float
) -> WField:
    """WField straight from mesh arrays, without building a profile"""
    nodes = np.asarray(nodes, dtype=float)
    values = np.asarray(values, dtype=float)
    return WField(
        kernel=kernel,
        node_positions=nodes,
        node_values=node_values(kernel, nodes, values, left_state, right_state),
        cell_values=values,
        left_state=float(left_state),
        right_state=float(right_state),
    )


def _field(p: PiecewiseConstantProfile, kernel: KernelSpec, values: np.ndarray) -> WField:
    return WField(
        kernel=kernel,
        node_positions=p.nodes,
        node_values=values,
        cell_values=p.values,
        left_state=p.left_state,
        right_state=p.right_state,
    )


def exp_nonlocal(p: PiecewiseConstantProfile, eps: float) -> WField:
    """
    W for the exponential kernel, exact and O(N)
    """
    kernel = KernelSpec.exp(eps)
    values = exp_node_values(p.nodes, p.values, p.right_state, eps)
    return _field(p, kernel, values)


def box_nonlocal(p: PiecewiseConstantProfile, eps: float) -> WField:
    """
    W for the box kernel: (1/eps) times the integral of rho over (x, x + eps)
    """
    kernel = KernelSpec.box(eps)
    values = box_node_values(p.nodes, p.values, p.left_state, p.right_state, eps)
    return _field(p, kernel, values)


def nonlocal_field(p: PiecewiseConstantProfile, kernel: KernelSpec) -> WField:
    if kernel.family == KernelFamily.EXPONENTIAL:
        return exp_nonlocal(p, kernel.eps)
    return box_nonlocal(p, kernel.eps)


def exp_derivative(w: WField) -> np.ndarray:
    """
    dW/dx at every node from W' = (W - rho)/eps, with rho(x+) at jumps
    """
    if w.family != KernelFamily.EXPONENTIAL:
        raise KernelMismatch(f"exp_derivative needs the exponential kernel, got {w.kernel}")
    rho_right = w.extended_values[1:]
    return (w.node_values - rho_right) / w.eps


def node_slopes(w: WField) -> np.ndarray:
    """Right-sided slopes at the profile nodes, for either kernel"""
    if w.family == KernelFamily.EXPONENTIAL:
        return exp_derivative(w)
    return w.slope(w.node_positions)


def decay_length(eps: float, digits: float = 40.0) -> float:
    """Distance after which exp(-d/eps) drops below e^-digits"""
    return digits * eps if math.isfinite(eps) else math.inf
