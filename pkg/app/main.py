"""
nlclaw - Command Line Interface
Simulate nonlocal and local traffic conservation laws, check the one-sided
bounds, run eps sweeps and reproduce the canned figures
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from app.config.config_parser import parse_config, parse_window
from app.config.settings import configure_logging, print_settings, settings
from app.engine.local_solver import FluxFn, simulate_local
from app.engine.nonlocal_solver import simulate
from app.schemas.kernel_schema import KernelFamily, KernelSpec
from app.schemas.run_schema import RunConfig
from app.services.convergence_service import run_sweep
from app.services.diagnostics_service import DiagnosticsService
from app.services.experiment_service import run_figure
from app.services.output_service import write_reports, write_sweep, write_trajectory
from app.utils.exceptions import NlclawError, ParseError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2


def _eps_list(text: str) -> List[float]:
    try:
        values = [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"--eps needs comma-separated numbers, got '{text}'")
    if not values:
        raise argparse.ArgumentTypeError("--eps is empty")
    return values


def _window(text: str):
    try:
        return parse_window(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def normalize_argv(argv: List[str]) -> List[str]:
    """
    Join "--window lo:hi" into "--window=lo:hi" so a negative lower end is
    not read as an option flag
    """
    out: List[str] = []
    i = 0
    while i < len(argv):
        if argv[i] == "--window" and i + 1 < len(argv):
            out.append(f"--window={argv[i + 1]}")
            i += 2
            continue
        out.append(argv[i])
        i += 1
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nlclaw", description=__doc__.strip().splitlines()[1])
    parser.add_argument("--log-level", default=None, help="Overrides LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, config: bool = True) -> None:
        if config:
            p.add_argument("--config", required=True, type=Path, help="Run-config document")
        p.add_argument("--out", type=Path, default=None, help="Output directory")

    p = sub.add_parser("simulate", help="Nonlocal run, writes trajectory.csv")
    common(p)
    p.add_argument("--kernel", choices=[k.value for k in KernelFamily])
    p.add_argument("--eps", type=_eps_list, help="Kernel width (first value is used)")

    p = sub.add_parser("simulate-local", help="Godunov run, writes trajectory_local.csv")
    common(p)

    p = sub.add_parser("check", help="Nonlocal run plus every diagnostic, writes report.csv")
    common(p)
    p.add_argument("--slack", type=float, default=None)
    p.add_argument("--window", type=_window, default=None, help="lo:hi")
    p.add_argument("--kernel", choices=[k.value for k in KernelFamily])
    p.add_argument("--eps", type=_eps_list, help="Kernel width (first value is used)")

    p = sub.add_parser("sweep", help="Eps sweep against the Godunov reference, writes sweep.csv")
    common(p)
    p.add_argument("--eps", type=_eps_list, help="Comma-separated, strictly decreasing")
    p.add_argument("--kernel", choices=[k.value for k in KernelFamily])

    p = sub.add_parser("reproduce", help="Canned figure series")
    p.add_argument("figure", choices=["fig1", "fig2", "fig3"])
    common(p, config=False)
    p.add_argument("--eps", type=_eps_list, help="Overrides the default eps list")
    return parser


class Dispatcher:
    """
    Runs one parsed command and maps its outcome to an exit code
    """

    def __init__(self, args: argparse.Namespace):
        self.args = args

    def out_dir(self, config: Optional[RunConfig] = None) -> Path:
        if self.args.out is not None:
            return self.args.out
        if config is not None and config.output.dir:
            return Path(config.output.dir)
        return Path(settings.OUTPUT_DIR)

    def load_config(self) -> RunConfig:
        path: Path = self.args.config
        if not path.is_file():
            raise FileNotFoundError(f"config file not found: {path}")
        return parse_config(path.read_text())

    def sim_config(self, config: RunConfig):
        cfg = config.sim_config()
        kernel = cfg.kernel
        family = KernelFamily(self.args.kernel) if getattr(self.args, "kernel", None) else kernel.family
        eps = self.args.eps[0] if getattr(self.args, "eps", None) else kernel.eps
        return cfg.model_copy(update={"kernel": KernelSpec(family=family, eps=eps)})

    # ===== COMMANDS =====

    def simulate(self) -> int:
        config = self.load_config()
        traj = simulate(config.simulation.profile, self.sim_config(config))
        write_trajectory(traj, self.out_dir(config) / "trajectory.csv")
        return EXIT_OK

    def simulate_local(self) -> int:
        config = self.load_config()
        sim = config.simulation
        traj = simulate_local(
            sim.profile, FluxFn(sim.velocity), config.local_grid(), sim.final_time,
            config.local.cfl, config.snapshot_times(),
        )
        write_trajectory(traj, self.out_dir(config) / "trajectory_local.csv")
        return EXIT_OK

    def check(self) -> int:
        config = self.load_config()
        slack = self.args.slack if self.args.slack is not None else config.diagnostics.slack
        window = self.args.window or config.diagnostics.window
        traj = simulate(config.simulation.profile, self.sim_config(config))
        service = DiagnosticsService(slack=slack, t_min=config.diagnostics.t_min)
        reports = service.run_all(traj, window)
        write_reports(reports, self.out_dir(config) / "report.csv")
        failed = [report for report in reports if report.asserted_failure]
        for report in reports:
            print(report.summary())
        if failed:
            logger.error(f"❌ {len(failed)} check(s) failed: {', '.join(r.name for r in failed)}")
            return EXIT_CHECK_FAILED
        return EXIT_OK

    def sweep(self) -> int:
        config = self.load_config()
        kernel = KernelFamily(self.args.kernel) if self.args.kernel else None
        table = run_sweep(config.sweep_config(self.args.eps, kernel), threads=settings.NLCLAW_THREADS)
        write_sweep(table, self.out_dir(config) / "sweep.csv")
        for t in table.times:
            print(
                f"t={t:g}: monotone err_rho={table.monotone_rho[t]}, err_W={table.monotone_W[t]}, "
                f"decay exponent {table.decay_rho[t]}"
            )
        return EXIT_OK

    def reproduce(self) -> int:
        figure = int(self.args.figure[-1])
        written = run_figure(figure, self.out_dir(), self.args.eps, threads=settings.NLCLAW_THREADS)
        print(f"Wrote {len(written)} files to {self.out_dir()}")
        return EXIT_OK

    def run(self) -> int:
        handlers = {
            "simulate": self.simulate,
            "simulate-local": self.simulate_local,
            "check": self.check,
            "sweep": self.sweep,
            "reproduce": self.reproduce,
        }
        return handlers[self.args.command]()


def dispatch(argv: Optional[List[str]] = None) -> int:
    """
    Parse argv and run the command: 0 on success, 1 on a failed asserted
    check, 2 on usage, parse or file errors
    """
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    try:
        args = parser.parse_args(normalize_argv(list(argv)))
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    try:
        return Dispatcher(args).run()
    except ParseError as e:
        logger.error(f"Config error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, IsADirectoryError) as e:
        logger.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except NlclawError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        logger.error(f"Unhandled exception: {e}", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    argv = sys.argv[1:]
    level = None
    if "--log-level" in argv:
        idx = argv.index("--log-level")
        level = argv[idx + 1] if idx + 1 < len(argv) else None
    configure_logging(level)
    if logging.getLogger().isEnabledFor(logging.DEBUG):
        print_settings()
    sys.exit(dispatch(argv))


if __name__ == "__main__":
    main()
