"""
Whitespace-separated tables of poses and lighting, one row per frame, floats with 17 significant digits.
"""

from pathlib import Path

import numpy as np
import pandas as pd

from ..models.pose import TwistPose
from ..utils.errors import MalformedFileError, MissingFileError

FLOAT_FORMAT = "%.17g"
POSE_COLUMNS = [f"xi{k}" for k in range(1, 7)]
LIGHTING_COLUMNS = [f"l{k}" for k in range(1, 5)]


def write_table(path: str | Path, poses: list[TwistPose] | None = None, lighting: np.ndarray | None = None):
    """Writes a ``frame`` column followed by the twist and/or lighting columns."""
    columns = {}
    if poses is not None:
        columns.update(dict(zip(POSE_COLUMNS, np.array([pose.xi for pose in poses]).T)))
    if lighting is not None:
        columns.update(dict(zip(LIGHTING_COLUMNS, np.asarray(lighting, dtype=float).reshape(-1, 4).T)))
    frame = pd.DataFrame(columns)
    frame.insert(0, "frame", np.arange(len(frame)))
    frame.to_csv(path, sep=" ", index=False, float_format=FLOAT_FORMAT)


def read_table(path: str | Path, columns: list[str]) -> pd.DataFrame:
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(path, "table not found")
    try:
        table = pd.read_csv(path, sep=r"\s+", dtype=float)
    except (ValueError, pd.errors.ParserError) as error:
        raise MalformedFileError(path, f"unreadable table ({error})") from error
    missing = [column for column in ["frame"] + columns if column not in table.columns]
    if missing:
        raise MalformedFileError(path, f"missing columns {missing}")
    if not (table["frame"].to_numpy() == np.arange(len(table))).all():
        raise MalformedFileError(path, "frames should be numbered 0, 1, ... in order")
    return table


def read_poses(path: str | Path) -> list[TwistPose]:
    table = read_table(path, POSE_COLUMNS)
    return [TwistPose(xi=row) for row in table[POSE_COLUMNS].to_numpy()]


def read_lighting(path: str | Path) -> np.ndarray:
    return read_table(path, LIGHTING_COLUMNS)[LIGHTING_COLUMNS].to_numpy()
