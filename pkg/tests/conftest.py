"""
Shared fixtures: models, data and a few precomputed trajectories
"""

import pytest

from app.engine.nonlocal_solver import simulate
from app.schemas.kernel_schema import KernelSpec
from app.schemas.simulation_schema import SimConfig
from app.schemas.velocity_schema import VelocityModel
from app.utils.profiles import fig1_profile, fig3_profile, riemann_profile_datum, steps

CHECK_TIMES = [0.0] + [round(0.05 * k, 10) for k in range(1, 21)]


@pytest.fixture(scope="session")
def greenshields():
    return VelocityModel.greenshields(1.0, 1.0)


@pytest.fixture(scope="session")
def greenberg():
    return VelocityModel.greenberg(1.0, 1.0)


def _run(profile, model, eps, times=CHECK_TIMES, refinement=200.0, family="exp"):
    cfg = SimConfig(
        kernel=KernelSpec(family=family, eps=eps),
        velocity=model,
        final_time=times[-1],
        snapshot_times=times,
        refinement=refinement,
    )
    return simulate(profile, cfg)


@pytest.fixture(scope="session")
def fig1_run(greenshields):
    """Step datum, exponential kernel, eps = 0.05"""
    return _run(fig1_profile(), greenshields, 0.05)


@pytest.fixture(scope="session")
def fig1_box_run(greenshields):
    return _run(fig1_profile(), greenshields, 0.05, family="box")


@pytest.fixture(scope="session")
def raised_block_run(greenshields):
    """0.6 + 0.4 on (-0.5, 0.5): data range [0.6, 1.0]"""
    return _run(steps([-0.5, 1.0, 0.5], left=0.6, right=0.6), greenshields, 0.05)


@pytest.fixture(scope="session")
def greenberg_block_run(greenberg):
    """0.2 + 0.8 on (-0.5, 0.5): data range [0.2, 1.0]"""
    return _run(steps([-0.5, 1.0, 0.5], left=0.2, right=0.2), greenberg, 0.05, refinement=100.0)


@pytest.fixture(scope="session")
def increasing_run(greenshields):
    """Increasing Riemann datum 0.2 -> 0.8"""
    return _run(riemann_profile_datum(0.2, 0.8), greenshields, 0.05, times=[0.0, 0.25, 0.5])


@pytest.fixture(scope="session")
def fig3_run(greenshields):
    return _run(fig3_profile(50), greenshields, 0.1, times=[0.0, 0.25, 0.5, 1.0], refinement=400.0)


@pytest.fixture(scope="session")
def constant_run(greenshields):
    return _run(steps([-0.5, 0.4, 0.5], left=0.4, right=0.4), greenshields, 0.1, times=[0.0, 0.5, 1.0])
