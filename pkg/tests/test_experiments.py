"""
Tests for the canned figure reproductions and CSV output
"""

import pandas as pd
import pytest

from app.schemas.kernel_schema import KernelFamily
from app.schemas.report_schema import CheckReport, CheckRow
from app.schemas.sweep_schema import SweepRow, SweepTable
from app.services.experiment_service import TIME_GRID, ExperimentService, figure_recipe
from app.services.output_service import report_frame, sweep_frame, trajectory_frame


class TestRecipes:

    def test_time_grid(self):
        assert len(TIME_GRID) == 51
        assert TIME_GRID[1] == 0.02 and TIME_GRID[-1] == 1.0

    def test_step_and_triangle_use_both_kernels(self):
        for figure in (1, 2):
            recipe = figure_recipe(figure)
            assert recipe.kernels == [KernelFamily.EXPONENTIAL, KernelFamily.BOX]
            assert recipe.metric == "neg_min_dxW"
            assert recipe.eps_list == [0.2, 0.1, 0.05, 0.025]

    def test_unbounded_variation_recipe(self):
        recipe = figure_recipe(3, fig3_nmax=10)
        assert recipe.kernels == [KernelFamily.EXPONENTIAL]
        assert recipe.metric == "tv_W"
        assert (recipe.tv_window.lo, recipe.tv_window.hi) == (-0.5, 1.5)

    def test_unknown_figure(self):
        with pytest.raises(ValueError):
            figure_recipe(4)


class TestSeries:

    @pytest.fixture(scope="class")
    def step_service(self):
        return ExperimentService(figure_recipe(1, eps_list=[0.2], refinement=50.0))

    def test_slope_envelope_below_one_over_t(self, step_service):
        """
        Test: -inf dW/dx stays below 1/t for the exponential kernel
        """
        frame = step_service.series(KernelFamily.EXPONENTIAL, 0.2)
        assert len(frame) == 50
        assert list(frame.columns) == ["t", "value", "bound", "kernel", "eps", "exploratory"]
        assert (frame["value"] <= frame["bound"]).all()
        assert set(frame["exploratory"]) == {0}

    def test_box_series_flagged_exploratory(self, step_service):
        frame = step_service.series(KernelFamily.BOX, 0.2)
        assert set(frame["exploratory"]) == {1}
        assert set(frame["kernel"]) == {"box"}

    def test_run_writes_files_and_manifest(self, step_service, tmp_path):
        written = step_service.run(tmp_path)
        names = [path.name for path in written]
        assert names == ["fig1_exp_eps0.2.csv", "fig1_box_eps0.2.csv", "fig1_manifest.txt"]
        manifest = (tmp_path / "fig1_manifest.txt").read_text().splitlines()
        assert manifest == ["fig1_exp_eps0.2.csv", "fig1_box_eps0.2.csv"]

    def test_tv_series_respects_bound(self):
        service = ExperimentService(figure_recipe(3, eps_list=[0.2], refinement=100.0, fig3_nmax=5))
        frame = service.series(KernelFamily.EXPONENTIAL, 0.2)
        assert (frame["value"] <= frame["bound"]).all()
        assert (frame["value"] >= 0).all()


    def test_series_stable_under_doubled_resolution(self):
        """
        Test: doubling the refinement moves the slope series by under 2% in sup norm
        """
        def series(refinement: float):
            recipe = figure_recipe(1, eps_list=[0.1], refinement=refinement)
            return ExperimentService(recipe).series(KernelFamily.EXPONENTIAL, 0.1)

        coarse, fine = series(200.0), series(400.0)
        assert list(coarse["t"]) == list(fine["t"])
        change = (coarse["value"] - fine["value"]).abs().max()
        assert change < 0.02 * fine["value"].abs().max()


class TestFrames:

    def test_report_frame_pass_column(self):
        report = CheckReport(name="x", rows=[
            CheckRow(t=0.1, metric="tv_W", value=1.0, bound=2.0, passed=True),
            CheckRow(t=0.2, metric="tv_W", value=3.0, bound=2.0, passed=False),
        ])
        frame = report_frame([report])
        assert list(frame["pass"]) == [1, 0]

    def test_sweep_frame(self):
        table = SweepTable(rows=[SweepRow(eps=0.1, t=0.5, err_rho=0.01, err_W=0.02)])
        frame = sweep_frame(table)
        assert list(frame.columns) == ["eps", "t", "err_rho", "err_W"]
        assert frame.iloc[0]["err_W"] == 0.02

    def test_trajectory_frame_one_row_per_node(self, fig1_run):
        frame = trajectory_frame(fig1_run)
        expected = sum(len(snap.profile.breakpoints) for snap in fig1_run.snapshots)
        assert len(frame) == expected
        assert isinstance(frame, pd.DataFrame)
        assert frame["W"].notna().all()
