"""
Profile primitives
Evaluation, total variation, L1 distances and mass of piecewise-constant
densities, plus the named presets used by the figure recipes.

All integrals are exact: they are sums over the merged breakpoint set,
never quadrature.
"""

from typing import Optional, Sequence, Union

import numpy as np

from app.schemas.profile_schema import PiecewiseConstantProfile, Window

ArrayLike = Union[float, Sequence[float], np.ndarray]


def eval_profile(p: PiecewiseConstantProfile, x: ArrayLike) -> Union[float, np.ndarray]:
    """
    Evaluate the profile at x (scalar or array)

    Right-continuous: at a breakpoint the value of the cell to its right
    (or right_state after the last breakpoint) is returned.
    """
    xs = np.asarray(x, dtype=float)
    idx = np.searchsorted(p.nodes, xs, side="right")
    out = p.extended_values[idx]
    if out.ndim == 0:
        return float(out)
    return out


def _merged_edges(window: Window, *profiles: PiecewiseConstantProfile) -> np.ndarray:
    """Window ends plus every breakpoint strictly inside the window"""
    pieces = [np.array([window.lo, window.hi])]
    for p in profiles:
        nodes = p.nodes
        pieces.append(nodes[(nodes > window.lo) & (nodes < window.hi)])
    return np.unique(np.concatenate(pieces))


def total_variation(p: PiecewiseConstantProfile, k: Window) -> float:
    """
    Sum of absolute jumps at breakpoints strictly inside k
    """
    nodes = p.nodes
    jumps = np.abs(np.diff(p.extended_values))
    inside = (nodes > k.lo) & (nodes < k.hi)
    return float(jumps[inside].sum())


def l1_distance(a: PiecewiseConstantProfile, b: PiecewiseConstantProfile, k: Window) -> float:
    """
    Exact integral of |a - b| over k
    """
    edges = _merged_edges(k, a, b)
    mids = 0.5 * (edges[:-1] + edges[1:])
    widths = np.diff(edges)
    diff = np.abs(eval_profile(a, mids) - eval_profile(b, mids))
    return float(np.dot(diff, widths))


def mass(p: PiecewiseConstantProfile, k: Window) -> float:
    """
    Exact integral of p over k
    """
    edges = _merged_edges(k, p)
    mids = 0.5 * (edges[:-1] + edges[1:])
    return float(np.dot(eval_profile(p, mids), np.diff(edges)))


def cell_averages(p: PiecewiseConstantProfile, edges: np.ndarray) -> np.ndarray:
    """
    Exact averages of p over consecutive intervals [edges[j], edges[j+1]]
    """
    edges = np.asarray(edges, dtype=float)
    values = primitive(p, edges)
    return np.diff(values) / np.diff(edges)


def primitive(p: PiecewiseConstantProfile, x: np.ndarray) -> np.ndarray:
    """
    R(x) = integral of p from breakpoints[0] to x (negative to the left)
    """
    return primitive_arrays(p.nodes, p.values, p.left_state, p.right_state, x)


def primitive_arrays(
    nodes: np.ndarray,
    values: np.ndarray,
    left_state: float,
    right_state: float,
    x: np.ndarray,
    idx: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Array form of primitive, for callers that hold raw mesh arrays

    idx, when given, must equal searchsorted(nodes, x, side="right").
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    cumulative = np.concatenate(([0.0], np.cumsum(values * np.diff(nodes))))
    if idx is None:
        idx = np.searchsorted(nodes, x, side="right")
    out = np.empty_like(x, dtype=float)

    left = idx == 0
    out[left] = left_state * (x[left] - nodes[0])

    right = idx == len(nodes)
    out[right] = cumulative[-1] + right_state * (x[right] - nodes[-1])

    inner = ~(left | right)
    cell = idx[inner] - 1
    out[inner] = cumulative[cell] + values[cell] * (x[inner] - nodes[cell])
    return out


def sample_function(func, lo: float, hi: float, cells: int, left: float = 0.0, right: float = 0.0) -> PiecewiseConstantProfile:
    """
    Piecewise-constant sampling of a function at cell midpoints of a uniform grid
    """
    edges = np.linspace(lo, hi, cells + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    values = np.asarray(func(mids), dtype=float)
    return PiecewiseConstantProfile.from_arrays(edges, values, left, right)


def from_uniform_values(lo: float, hi: float, values: np.ndarray, left: float, right: float) -> PiecewiseConstantProfile:
    edges = np.linspace(lo, hi, len(values) + 1)
    return PiecewiseConstantProfile.from_arrays(edges, values, left, right)


# ===== PRESETS =====

def steps(points: Sequence[float], left: float = 0.0, right: float = 0.0) -> PiecewiseConstantProfile:
    """
    Literal form x0, v0, x1, v1, ..., xN (alternating positions and values)
    """
    if len(points) % 2 == 0:
        raise ValueError("steps() needs x0, v0, x1, ..., xN: an odd number of entries")
    return PiecewiseConstantProfile(
        breakpoints=list(points[0::2]),
        cell_values=list(points[1::2]),
        left_state=left,
        right_state=right,
    )


def fig1_profile() -> PiecewiseConstantProfile:
    """rho_0 = 0.5 on (-0.5, 0.5), zero elsewhere"""
    return PiecewiseConstantProfile(breakpoints=[-0.5, 0.5], cell_values=[0.5])


def fig2_profile(cells: int = 1000) -> PiecewiseConstantProfile:
    """Triangle (1 - 2|x|) on (-0.5, 0.5), sampled at cell midpoints"""
    return sample_function(lambda x: 1.0 - 2.0 * np.abs(x), -0.5, 0.5, cells)


def fig3_profile(n_max: int = 50) -> PiecewiseConstantProfile:
    """
    Unit blocks accumulating at the origin, truncated at n_max

    Block n occupies (1/(n+1), 1/(n+1) + 1/(2n(n+1))), i.e. the left half of
    (1/(n+1), 1/n). The printed interval is typographically ambiguous; this is
    the reading used throughout. Total variation is 2 * n_max.
    """
    if n_max < 1:
        raise ValueError("n_max must be a positive integer")
    breakpoints = []
    values = []
    for n in range(n_max, 0, -1):
        start = 1.0 / (n + 1)
        stop = start + 1.0 / (2 * n * (n + 1))
        if breakpoints:
            values.append(0.0)
        breakpoints.extend([start, stop])
        values.append(1.0)
    return PiecewiseConstantProfile(breakpoints=breakpoints, cell_values=values)


def riemann_profile_datum(left: float, right: float, at: float = 0.0) -> PiecewiseConstantProfile:
    """Single jump from left to right at x = at"""
    return PiecewiseConstantProfile(breakpoints=[at], cell_values=[], left_state=left, right_state=right)


def is_nondecreasing(p: PiecewiseConstantProfile, tol: float = 0.0) -> bool:
    return bool(np.all(np.diff(p.extended_values) >= -tol))
