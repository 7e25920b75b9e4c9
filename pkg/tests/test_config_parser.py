"""
Tests for the run-config document parser
"""

import pytest

from app.config.config_parser import parse_config, parse_kernel, parse_profile, parse_velocity, parse_window
from app.schemas.kernel_schema import KernelFamily
from app.schemas.velocity_schema import VelocityFamily
from app.utils.exceptions import ParseError

FULL_DOCUMENT = """
# top-level keys belong to [simulation]
profile  = steps(-0.5, 0.5, 0.5 ; left=0, right=0)
velocity = greenshields(vmax=1, rhomax=1)
kernel   = exp(eps=0.05)
T        = 1
snapshots = 0, 0.5, 1

[diagnostics]
slack  = 0.1
window = -1:2

[sweep]
eps   = 0.1, 0.05, 0.025
times = 0.25, 0.5

[local]
dx  = 0.01
cfl = 0.4

[output]
dir = results
"""


class TestLiterals:

    def test_steps_profile(self):
        p = parse_profile("steps(-0.5, 0.5, 0.5 ; left=0.1, right=0.2)")
        assert p.breakpoints == [-0.5, 0.5]
        assert p.cell_values == [0.5]
        assert (p.left_state, p.right_state) == (0.1, 0.2)

    def test_named_profiles(self):
        assert parse_profile("fig1").cell_values == [0.5]
        assert parse_profile("fig2(cells=10)").n_cells == 10
        assert parse_profile("fig3(nmax=3)").n_cells == 5
        assert parse_profile("riemann(0.2, 0.8)").right_state == 0.8
        assert parse_profile("constant(0.4)").left_state == 0.4

    def test_velocities(self):
        assert parse_velocity("greenshields").family == VelocityFamily.GREENSHIELDS
        model = parse_velocity("gen_california(v0=2, rhomax=1, alpha=0.25, regularized=true)")
        assert model.v_max == 2.0 and model.alpha == 0.25 and model.regularized
        assert parse_velocity("gen_greenshields(1, 1, 3)").n == 3

    def test_non_integer_exponent(self):
        with pytest.raises(ValueError):
            parse_velocity("gen_greenshields(n=2.5)")

    def test_unknown_argument(self):
        with pytest.raises(ValueError):
            parse_velocity("greenshields(speed=1)")

    def test_kernels(self):
        assert parse_kernel("box(eps=0.1)").family == KernelFamily.BOX
        assert parse_kernel("exp(0.2)").eps == 0.2
        with pytest.raises(ValueError):
            parse_kernel("gauss(eps=0.1)")
        with pytest.raises(ValueError):
            parse_kernel("exp")

    def test_window(self):
        w = parse_window("-1:2")
        assert (w.lo, w.hi) == (-1.0, 2.0)
        with pytest.raises(ValueError):
            parse_window("1")


class TestParseConfig:

    def test_full_document(self):
        config = parse_config(FULL_DOCUMENT)
        sim = config.simulation
        assert sim.final_time == 1.0
        assert sim.snapshots == [0.0, 0.5, 1.0]
        assert config.diagnostics.slack == 0.1
        assert config.diagnostics.window.hi == 2.0
        assert config.sweep.eps == [0.1, 0.05, 0.025]
        assert config.local.dx == 0.01
        assert config.output.dir == "results"

    def test_minimal_document_defaults(self):
        """
        Test: only the profile is required
        """
        config = parse_config("profile = fig1\n")
        assert config.simulation.velocity.family == VelocityFamily.GREENSHIELDS
        assert config.simulation.kernel.eps == 0.05
        assert config.snapshot_times() == [0.0, 1.0]
        assert config.sim_config().schedule == [0.0, 1.0]

    def test_derived_configs(self):
        config = parse_config(FULL_DOCUMENT)
        sweep = config.sweep_config()
        assert sweep.eps_list == [0.1, 0.05, 0.025]
        assert sweep.window.hi == 2.0
        assert config.sweep_config([0.2, 0.1], KernelFamily.BOX).kernel == KernelFamily.BOX
        assert config.local_grid().dx == 0.01

    def test_missing_profile(self):
        with pytest.raises(ParseError) as err:
            parse_config("T = 1\n")
        assert err.value.line is None

    def test_unknown_key_reports_line(self):
        with pytest.raises(ParseError) as err:
            parse_config("profile = fig1\n\nspeed = 3\n")
        assert err.value.line == 3
        assert "speed" in str(err.value)

    def test_unknown_section(self):
        with pytest.raises(ParseError) as err:
            parse_config("profile = fig1\n[plots]\n")
        assert err.value.line == 2

    def test_duplicate_key(self):
        with pytest.raises(ParseError) as err:
            parse_config("profile = fig1\nT = 1\nT = 2\n")
        assert err.value.line == 3

    def test_bad_number(self):
        with pytest.raises(ParseError) as err:
            parse_config("profile = fig1\nT = soon\n")
        assert err.value.line == 2

    def test_bad_literal(self):
        with pytest.raises(ParseError) as err:
            parse_config("profile = steps(1, 0.5, 0)\n")
        assert err.value.line == 1

    def test_out_of_range_value_reports_line(self):
        with pytest.raises(ParseError) as err:
            parse_config("profile = fig1\ntheta = 2\n")
        assert err.value.line == 2

    def test_snapshots_past_final_time(self):
        with pytest.raises(ParseError):
            parse_config("profile = fig1\nT = 1\nsnapshots = 0, 2\n")

    def test_increasing_sweep_eps(self):
        with pytest.raises(ParseError):
            parse_config("profile = fig1\n[sweep]\neps = 0.1, 0.2\n")

    def test_line_without_equals(self):
        with pytest.raises(ParseError) as err:
            parse_config("profile = fig1\njust words\n")
        assert err.value.line == 2
