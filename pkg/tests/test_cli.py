"""
Tests for the command-line dispatcher
"""

import pandas as pd
import pytest

from app.main import EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE, build_parser, dispatch, normalize_argv
from app.schemas.report_schema import CheckReport, CheckRow

SIMULATE_CONFIG = """
profile    = fig1
kernel     = exp(eps=0.1)
T          = 0.2
snapshots  = 0, 0.1, 0.2
refinement = 50
"""

CONSTANT_CONFIG = """
profile    = constant(0.4)
kernel     = exp(eps=0.1)
T          = 0.5
snapshots  = 0, 0.25, 0.5
refinement = 50
"""

SWEEP_CONFIG = """
profile    = riemann(0.1, 0.6)
T          = 0.1
refinement = 50

[sweep]
eps          = 0.2, 0.1
times        = 0.1
window       = -0.25:0.25
reference_dx = 0.01
"""


@pytest.fixture
def write_config(tmp_path):
    def _write(text: str, name: str = "run.cfg"):
        path = tmp_path / name
        path.write_text(text)
        return path
    return _write


class TestParser:

    def test_commands(self):
        parser = build_parser()
        args = parser.parse_args(normalize_argv(["check", "--config", "a.cfg", "--slack", "0.1", "--window", "-2:2"]))
        assert args.command == "check"
        assert args.slack == 0.1
        assert (args.window.lo, args.window.hi) == (-2.0, 2.0)
        assert parser.parse_args(["reproduce", "fig3"]).figure == "fig3"

    def test_normalize_argv_joins_window_value(self):
        argv = ["check", "--window", "-1:1", "--slack", "0"]
        assert normalize_argv(argv) == ["check", "--window=-1:1", "--slack", "0"]
        assert normalize_argv(["check", "--window=-1:1"]) == ["check", "--window=-1:1"]

    def test_usage_errors_exit_2(self):
        assert dispatch([]) == EXIT_USAGE
        assert dispatch(["reproduce", "fig9"]) == EXIT_USAGE
        assert dispatch(["sweep", "--config", "a.cfg", "--eps", "x,y"]) == EXIT_USAGE

    def test_help_exits_0(self):
        assert dispatch(["--help"]) == EXIT_OK


class TestSimulate:

    def test_writes_trajectory(self, write_config, tmp_path):
        out = tmp_path / "out"
        assert dispatch(["simulate", "--config", str(write_config(SIMULATE_CONFIG)), "--out", str(out)]) == EXIT_OK
        frame = pd.read_csv(out / "trajectory.csv")
        assert list(frame.columns) == ["t", "x", "rho", "W", "dxW", "g"]
        assert sorted(frame["t"].unique()) == pytest.approx([0.0, 0.1, 0.2])

    def test_output_is_byte_identical_across_runs(self, write_config, tmp_path):
        config = str(write_config(SIMULATE_CONFIG))
        dispatch(["simulate", "--config", config, "--out", str(tmp_path / "a")])
        dispatch(["simulate", "--config", config, "--out", str(tmp_path / "b")])
        first = (tmp_path / "a" / "trajectory.csv").read_bytes()
        second = (tmp_path / "b" / "trajectory.csv").read_bytes()
        assert first == second
        assert b"\r\n" not in first

    def test_kernel_override(self, write_config, tmp_path):
        out = tmp_path / "box"
        code = dispatch([
            "simulate", "--config", str(write_config(SIMULATE_CONFIG)), "--out", str(out), "--kernel", "box",
            "--eps", "0.2",
        ])
        assert code == EXIT_OK
        assert (out / "trajectory.csv").is_file()

    def test_config_output_dir_used_without_out(self, write_config, tmp_path):
        target = tmp_path / "from_config"
        config = write_config(SIMULATE_CONFIG + f"\n[output]\ndir = {target}\n")
        assert dispatch(["simulate", "--config", str(config)]) == EXIT_OK
        assert (target / "trajectory.csv").is_file()

    def test_local_trajectory_leaves_w_empty(self, write_config, tmp_path):
        config = write_config(SIMULATE_CONFIG + "\n[local]\ndx = 0.02\nwindow = -1:1\n")
        out = tmp_path / "local"
        assert dispatch(["simulate-local", "--config", str(config), "--out", str(out)]) == EXIT_OK
        lines = (out / "trajectory_local.csv").read_text().splitlines()
        assert lines[0] == "t,x,rho,W,dxW,g"
        assert lines[1].endswith(",,,")


class TestErrors:

    def test_missing_config(self, tmp_path):
        assert dispatch(["simulate", "--config", str(tmp_path / "nope.cfg")]) == EXIT_USAGE

    def test_parse_error(self, write_config, tmp_path):
        config = write_config("profile = fig1\nspeed = 2\n")
        assert dispatch(["simulate", "--config", str(config), "--out", str(tmp_path)]) == EXIT_USAGE

    def test_domain_error(self, write_config, tmp_path):
        config = write_config("profile = fig1\nvelocity = greenberg\nT = 0.1\n")
        assert dispatch(["simulate", "--config", str(config), "--out", str(tmp_path)]) == EXIT_USAGE


class TestCheck:

    def test_constant_datum_passes(self, write_config, tmp_path):
        out = tmp_path / "check"
        assert dispatch(["check", "--config", str(write_config(CONSTANT_CONFIG)), "--out", str(out)]) == EXIT_OK
        frame = pd.read_csv(out / "report.csv")
        assert list(frame.columns) == ["t", "metric", "value", "bound", "pass"]
        assert set(frame["pass"]) == {1}
        assert {"min_dxW", "sup_g", "tv_W", "mass_drift"} <= set(frame["metric"])

    def test_asserted_failure_exits_1(self, write_config, tmp_path, monkeypatch):
        failing = CheckReport(
            name="oleinik_w", rows=[CheckRow(t=0.5, metric="min_dxW", value=-9.0, bound=-2.0, passed=False)],
        )
        monkeypatch.setattr("app.main.DiagnosticsService.run_all", lambda self, traj, window: [failing])
        code = dispatch(["check", "--config", str(write_config(CONSTANT_CONFIG)), "--out", str(tmp_path)])
        assert code == EXIT_CHECK_FAILED
        assert (tmp_path / "report.csv").read_text().splitlines()[1] == "0.5,min_dxW,-9,-2,0"

    def test_window_with_negative_lower_end(self, write_config, tmp_path, monkeypatch):
        """
        Test: "--window -1:1" written with a space reaches the diagnostics
        """
        seen = {}
        passing = CheckReport(
            name="oleinik_w", rows=[CheckRow(t=0.5, metric="min_dxW", value=0.0, bound=-2.0, passed=True)],
        )

        def run_all(self, traj, window):
            seen["window"] = window
            return [passing]

        monkeypatch.setattr("app.main.DiagnosticsService.run_all", run_all)
        code = dispatch([
            "check", "--config", str(write_config(CONSTANT_CONFIG)), "--out", str(tmp_path), "--window", "-1:1",
        ])
        assert code == EXIT_OK
        assert (seen["window"].lo, seen["window"].hi) == (-1.0, 1.0)

    def test_exploratory_failure_does_not_gate(self, write_config, tmp_path, monkeypatch):
        failing = CheckReport(
            name="oleinik_w", exploratory=True,
            rows=[CheckRow(t=0.5, metric="min_dxW", value=-9.0, bound=-2.0, passed=False)],
        )
        monkeypatch.setattr("app.main.DiagnosticsService.run_all", lambda self, traj, window: [failing])
        code = dispatch(["check", "--config", str(write_config(CONSTANT_CONFIG)), "--out", str(tmp_path)])
        assert code == EXIT_OK


class TestSweep:

    def test_writes_sweep_table(self, write_config, tmp_path):
        out = tmp_path / "sweep"
        assert dispatch(["sweep", "--config", str(write_config(SWEEP_CONFIG)), "--out", str(out)]) == EXIT_OK
        frame = pd.read_csv(out / "sweep.csv")
        assert list(frame.columns) == ["eps", "t", "err_rho", "err_W"]
        assert len(frame) == 2
        assert (frame["err_rho"] >= 0).all()
