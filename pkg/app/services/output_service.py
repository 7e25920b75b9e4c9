"""
Output Service
CSV emission for trajectories, reports, sweeps and figure series
"""

import logging
from pathlib import Path
from typing import Iterable, List, Union

import numpy as np
import pandas as pd

from app.schemas.report_schema import CheckReport
from app.schemas.simulation_schema import Trajectory
from app.schemas.sweep_schema import SweepTable

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

TRAJECTORY_COLUMNS = ["t", "x", "rho", "W", "dxW", "g"]
REPORT_COLUMNS = ["t", "metric", "value", "bound", "pass"]
SWEEP_COLUMNS = ["eps", "t", "err_rho", "err_W"]
FIGURE_COLUMNS = ["t", "value", "bound", "kernel", "eps", "exploratory"]

FLOAT_FORMAT = "%.12g"


def trajectory_frame(traj: Trajectory) -> pd.DataFrame:
    """
    One row per node per snapshot; rho is the value right of the node.
    W, dxW and g stay empty for local trajectories.
    """
    frames = []
    for snap in traj.snapshots:
        profile = snap.profile
        nodes = profile.nodes
        frame = pd.DataFrame({
            "t": np.full(len(nodes), snap.t),
            "x": nodes,
            "rho": profile.extended_values[1:],
        })
        if snap.w is not None:
            frame["W"] = snap.w_nodes
            frame["dxW"] = snap.dxw_nodes
            frame["g"] = snap.g_nodes
        else:
            frame["W"] = np.nan
            frame["dxW"] = np.nan
            frame["g"] = np.nan
        frames.append(frame)
    if not frames:
        return pd.DataFrame(columns=TRAJECTORY_COLUMNS)
    return pd.concat(frames, ignore_index=True)[TRAJECTORY_COLUMNS]


def report_frame(reports: Iterable[CheckReport]) -> pd.DataFrame:
    records = [
        {"t": row.t, "metric": row.metric, "value": row.value, "bound": row.bound, "pass": int(row.passed)}
        for report in reports
        for row in report.rows
    ]
    return pd.DataFrame.from_records(records, columns=REPORT_COLUMNS)


def sweep_frame(table: SweepTable) -> pd.DataFrame:
    records = [row.model_dump() for row in table.rows]
    return pd.DataFrame.from_records(records, columns=SWEEP_COLUMNS)


def write_frame(frame: pd.DataFrame, path: PathLike) -> Path:
    """Deterministic CSV: fixed float format, no index, LF line endings"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep="", lineterminator="\n")
    logger.info(f"📝 Wrote {len(frame)} rows to {path}")
    return path


def write_trajectory(traj: Trajectory, path: PathLike) -> Path:
    return write_frame(trajectory_frame(traj), path)


def write_reports(reports: Iterable[CheckReport], path: PathLike) -> Path:
    return write_frame(report_frame(reports), path)


def write_sweep(table: SweepTable, path: PathLike) -> Path:
    return write_frame(sweep_frame(table), path)


def write_manifest(paths: List[Path], path: PathLike) -> Path:
    """One file name per line, relative to the manifest's directory"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = [p.name if p.parent == path.parent else str(p) for p in paths]
    path.write_text("".join(f"{name}\n" for name in names))
    logger.info(f"📝 Manifest with {len(names)} files at {path}")
    return path
