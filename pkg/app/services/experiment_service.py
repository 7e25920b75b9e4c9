"""
Experiment Service
Canned reproductions: slope envelopes for the step and triangle data, and
the TV of W for the datum with unbounded variation
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Tuple

import pandas as pd

from app.engine.nonlocal_solver import simulate
from app.schemas.kernel_schema import KernelFamily, KernelSpec
from app.schemas.profile_schema import Window
from app.schemas.run_schema import FigureRecipe
from app.schemas.simulation_schema import SimConfig, Trajectory
from app.services.output_service import FIGURE_COLUMNS, write_frame, write_manifest
from app.utils.profiles import fig1_profile, fig2_profile, fig3_profile

logger = logging.getLogger(__name__)

# t = 0.02 k up to T = 1
TIME_GRID = [round(0.02 * k, 10) for k in range(51)]
DEFAULT_EPS = [0.2, 0.1, 0.05, 0.025]


def figure_recipe(
    figure: int,
    eps_list: Optional[List[float]] = None,
    refinement: float = 400.0,
    fig2_cells: int = 1000,
    fig3_nmax: int = 50,
) -> FigureRecipe:
    """Recipe for figure 1, 2 or 3 (Greenshields(1, 1) throughout)"""
    eps_list = list(eps_list) if eps_list else list(DEFAULT_EPS)
    if figure == 1:
        return FigureRecipe(
            figure=1, datum=fig1_profile(), kernels=[KernelFamily.EXPONENTIAL, KernelFamily.BOX],
            eps_list=eps_list, times=TIME_GRID, metric="neg_min_dxW", refinement=refinement,
        )
    if figure == 2:
        return FigureRecipe(
            figure=2, datum=fig2_profile(fig2_cells), kernels=[KernelFamily.EXPONENTIAL, KernelFamily.BOX],
            eps_list=eps_list, times=TIME_GRID, metric="neg_min_dxW", refinement=refinement,
        )
    if figure == 3:
        return FigureRecipe(
            figure=3, datum=fig3_profile(fig3_nmax), kernels=[KernelFamily.EXPONENTIAL],
            eps_list=eps_list, times=TIME_GRID, metric="tv_W",
            tv_window=Window(lo=-0.5, hi=1.5), refinement=refinement,
        )
    raise ValueError(f"unknown figure {figure}; expected 1, 2 or 3")


class ExperimentService:
    """
    Runs every (kernel, eps) pair of a recipe and tabulates the emitted
    metric against its bound
    """

    def __init__(self, recipe: FigureRecipe, threads: int = 0):
        self.recipe = recipe
        self.threads = max(0, threads)

    def _run(self, kernel: KernelFamily, eps: float) -> Trajectory:
        recipe = self.recipe
        cfg = SimConfig(
            kernel=KernelSpec(family=kernel, eps=eps),
            velocity=recipe.velocity,
            final_time=recipe.times[-1],
            snapshot_times=list(recipe.times),
            refinement=recipe.refinement,
        )
        return simulate(recipe.datum, cfg)

    def series(self, kernel: KernelFamily, eps: float) -> pd.DataFrame:
        recipe = self.recipe
        traj = self._run(kernel, eps)
        records = []
        for snap in traj.snapshots:
            if snap.t <= 0:
                continue
            if recipe.metric == "tv_W":
                window = recipe.tv_window
                value = snap.w.total_variation(window)
                bound = 2.0 * (window.length / (2.0 * snap.t) + snap.w.sup_norm(window))
            else:
                value = -snap.w.min_slope()
                bound = 1.0 / snap.t
            records.append({
                "t": snap.t,
                "value": value,
                "bound": bound,
                "kernel": kernel.value,
                "eps": eps,
                "exploratory": int(kernel == KernelFamily.BOX),
            })
        return pd.DataFrame.from_records(records, columns=FIGURE_COLUMNS)

    def pairs(self) -> List[Tuple[KernelFamily, float]]:
        return [(kernel, eps) for kernel in self.recipe.kernels for eps in self.recipe.eps_list]

    def compute(self) -> List[Tuple[KernelFamily, float, pd.DataFrame]]:
        pairs = self.pairs()
        logger.info(f"🚀 Figure {self.recipe.figure}: {len(pairs)} runs")
        if self.threads > 0:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                frames = list(pool.map(lambda pair: self.series(*pair), pairs))
        else:
            frames = [self.series(*pair) for pair in pairs]
        return [(kernel, eps, frame) for (kernel, eps), frame in zip(pairs, frames)]

    def run(self, out_dir: Path) -> List[Path]:
        out_dir = Path(out_dir)
        figure = self.recipe.figure
        written = []
        for kernel, eps, frame in self.compute():
            name = f"fig{figure}_{kernel.value}_eps{eps:g}.csv"
            written.append(write_frame(frame, out_dir / name))
            if kernel == KernelFamily.EXPONENTIAL:
                above = frame[frame["value"] > frame["bound"]]
                if len(above):
                    logger.warning(
                        f"⚠️ fig{figure} eps={eps:g}: {len(above)} points above the bound "
                        f"(first at t={above['t'].iloc[0]:g})"
                    )
        manifest = write_manifest(written, out_dir / f"fig{figure}_manifest.txt")
        return written + [manifest]


def run_figure(figure: int, out_dir: Path, eps_list: Optional[List[float]] = None, threads: int = 0) -> List[Path]:
    """Emit the series of one figure plus its manifest; returns every written path"""
    return ExperimentService(figure_recipe(figure, eps_list), threads).run(out_dir)
