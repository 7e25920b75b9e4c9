"""
Tests for eps sweeps and decay fits
"""

import pytest
from pydantic import ValidationError

from app.engine.nonlocal_solver import simulate
from app.engine.velocity import check_assumptions
from app.schemas.kernel_schema import KernelFamily
from app.schemas.profile_schema import Window
from app.schemas.sweep_schema import SweepConfig, SweepRow, SweepTable
from app.schemas.velocity_schema import VelocityModel
from app.services.convergence_service import (
    ConvergenceService, fit_decay, monotone_flags, run_sweep, theorem_path,
)
from app.utils.exceptions import DegenerateFit, MissingAssumption
from app.utils.profiles import fig1_profile, l1_distance, riemann_profile_datum


def table_from(errors, eps=(0.2, 0.1, 0.05, 0.025), t=0.5) -> SweepTable:
    rows = [SweepRow(eps=e, t=t, err_rho=err, err_W=0.5 * err) for e, err in zip(eps, errors)]
    return SweepTable(rows=rows)


@pytest.fixture(scope="module")
def shock_table():
    """Moving shock 0.1 -> 0.6 under Greenshields, three eps values"""
    cfg = SweepConfig(
        eps_list=[0.1, 0.05, 0.025],
        window=Window(lo=-0.5, hi=0.5),
        times=[0.25],
        datum=riemann_profile_datum(0.1, 0.6),
        velocity=VelocityModel.greenshields(1.0, 1.0),
        reference_dx=1.0 / 400.0,
        refinement=200.0,
    )
    return run_sweep(cfg)


DATA = {
    "stationary_shock": lambda: riemann_profile_datum(0.2, 0.8),
    "fig1": fig1_profile,
}


def decay_config(name: str, eps_list, reference_dx: float = 1.0 / 800.0) -> SweepConfig:
    return SweepConfig(
        eps_list=eps_list,
        times=[0.5],
        datum=DATA[name](),
        velocity=VelocityModel.greenshields(1.0, 1.0),
        reference_dx=reference_dx,
        refinement=200.0,
    )


@pytest.fixture(scope="module", params=sorted(DATA))
def decay_table(request):
    """Four eps values on the unit window around the datum"""
    return run_sweep(decay_config(request.param, [0.2, 0.1, 0.05, 0.025]))


class TestTheoremPath:

    def test_linear_velocity_uses_w_bound(self):
        rep = check_assumptions(VelocityModel.greenshields(), 0.0, 1.0)
        assert theorem_path(rep) == "w_bound(delta)"

    def test_underwood_narrow_range_uses_g_bound(self):
        rep = check_assumptions(VelocityModel.underwood(1.0, 1.0), 0.4, 1.0)
        assert theorem_path(rep) == "g_bound(ob2)"

    def test_underwood_full_range_has_no_path(self):
        rep = check_assumptions(VelocityModel.underwood(1.0, 1.0), 0.0, 1.0)
        with pytest.raises(MissingAssumption):
            theorem_path(rep)


class TestSweepConfig:

    def test_eps_must_decrease(self):
        with pytest.raises(ValidationError):
            SweepConfig(eps_list=[0.1, 0.2], datum=riemann_profile_datum(0.1, 0.6), velocity=VelocityModel.greenshields())

    def test_times_must_be_positive(self):
        with pytest.raises(ValidationError):
            SweepConfig(times=[0.0, 0.5], datum=riemann_profile_datum(0.1, 0.6), velocity=VelocityModel.greenshields())

    def test_default_reference_dx(self):
        cfg = SweepConfig(datum=riemann_profile_datum(0.1, 0.6), velocity=VelocityModel.greenshields())
        assert cfg.dx == pytest.approx(0.0125 / 8.0)
        assert cfg.final_time == 0.5


class TestFitDecay:

    def test_first_order_slope(self):
        """
        Test: errors proportional to eps give slope 1
        """
        eps = (0.2, 0.1, 0.05, 0.025)
        table = table_from([0.3 * e for e in eps], eps)
        assert fit_decay(table, 0.5) == pytest.approx(1.0)
        assert fit_decay(table, 0.5, "err_W") == pytest.approx(1.0)

    def test_needs_three_points(self):
        with pytest.raises(DegenerateFit):
            fit_decay(table_from([0.1, 0.05], (0.2, 0.1)), 0.5)

    def test_zero_error_is_degenerate(self):
        with pytest.raises(DegenerateFit):
            fit_decay(table_from([0.1, 0.05, 0.0]), 0.5)

    def test_monotone_flags(self):
        assert monotone_flags(table_from([0.4, 0.3, 0.2, 0.1]), 0.5) == (True, True)
        assert monotone_flags(table_from([0.4, 0.3, 0.35, 0.1]), 0.5) == (False, False)

    def test_rows_at_time_sorted_by_decreasing_eps(self):
        table = SweepTable(rows=[
            SweepRow(eps=0.05, t=0.5, err_rho=0.1, err_W=0.1),
            SweepRow(eps=0.2, t=0.5, err_rho=0.3, err_W=0.3),
            SweepRow(eps=0.1, t=1.0, err_rho=0.2, err_W=0.2),
        ])
        assert [row.eps for row in table.at_time(0.5)] == [0.2, 0.05]
        assert table.times == [0.5, 1.0]


class TestSweep:

    def test_table_shape(self, shock_table):
        assert [row.eps for row in shock_table.at_time(0.25)] == [0.1, 0.05, 0.025]
        assert shock_table.theorem_path == "w_bound(delta)"
        assert not shock_table.exploratory
        assert shock_table.decay_rho[0.25] is not None

    def test_error_shrinks_with_eps(self, shock_table):
        rows = shock_table.at_time(0.25)
        assert rows[-1].err_rho < rows[0].err_rho
        assert rows[-1].err_W < rows[0].err_W

    def test_reference_matches_exact_riemann_solution(self, shock_table):
        assert shock_table.reference_errors[0.25] < 0.01

    def test_reference_grid_covers_travel(self):
        cfg = SweepConfig(
            eps_list=[0.1],
            window=Window(lo=-0.5, hi=0.5),
            times=[0.5],
            datum=riemann_profile_datum(0.1, 0.6),
            velocity=VelocityModel.greenshields(),
            reference_dx=0.01,
        )
        grid = ConvergenceService(cfg).reference_grid()
        assert grid.window.lo <= -0.5 - 0.8 * 0.5
        assert grid.window.hi >= 0.5 + 0.8 * 0.5
        assert grid.dx == 0.01

    def test_threads_do_not_change_results(self):
        cfg = SweepConfig(
            eps_list=[0.2, 0.1],
            window=Window(lo=-0.25, hi=0.25),
            times=[0.1],
            datum=riemann_profile_datum(0.1, 0.6),
            velocity=VelocityModel.greenshields(),
            kernel=KernelFamily.EXPONENTIAL,
            reference_dx=0.01,
            refinement=50.0,
        )
        serial = run_sweep(cfg)
        threaded = run_sweep(cfg, threads=2)
        assert [row.model_dump() for row in serial.rows] == [row.model_dump() for row in threaded.rows]


class TestDecay:

    def test_errors_strictly_decrease(self, decay_table):
        rows = decay_table.at_time(0.5)
        err_rho = [row.err_rho for row in rows]
        err_w = [row.err_W for row in rows]
        assert all(b < a for a, b in zip(err_rho, err_rho[1:]))
        assert all(b < a for a, b in zip(err_w, err_w[1:]))
        assert decay_table.monotone_rho[0.5] and decay_table.monotone_W[0.5]

    def test_eightfold_smaller_eps_at_least_halves_w_error(self, decay_table):
        rows = decay_table.at_time(0.5)
        assert rows[-1].err_W <= 0.5 * rows[0].err_W

    @pytest.mark.parametrize("name", sorted(DATA))
    def test_errors_differ_by_at_most_the_rho_w_gap(self, name):
        """
        Test: |err_rho - err_W| <= ||rho_eps - W_eps||_L1 on the comparison window
        """
        cfg = decay_config(name, [0.05])
        service = ConvergenceService(cfg)
        reference = service.reference()
        traj = simulate(cfg.datum, service.sim_config(0.05))
        row = service.run_eps(0.05, reference)[0]
        gap = l1_distance(traj.at(0.5).profile, service._w_profile(traj, 0.5), cfg.window)
        assert abs(row.err_rho - row.err_W) <= gap + 1e-12

    @pytest.mark.parametrize("name", sorted(DATA))
    def test_halving_reference_dx_barely_moves_errors(self, name):
        coarse = run_sweep(decay_config(name, [0.1], reference_dx=1.0 / 400.0)).rows[0]
        fine = run_sweep(decay_config(name, [0.1], reference_dx=1.0 / 800.0)).rows[0]
        assert abs(coarse.err_rho - fine.err_rho) < 0.1 * fine.err_rho
        assert abs(coarse.err_W - fine.err_W) < 0.1 * fine.err_W
