"""
Reconstruction outputs: depth, albedo, normals, poses and lighting, diagnostics and a triangle mesh.
"""

from pathlib import Path
from typing import Iterable

import numpy as np
from loguru import logger
from pydantic import BaseModel

from ..geometry.normals import normals_from_depth, pixel_grid
from ..geometry.warping import reproject
from ..models.camera import CameraIntrinsics
from ..models.image_grid import ImageGrid
from ..models.pose import TwistPose
from ..models.scene import SceneEstimate
from ..utils.errors import DatasetError
from ..utils.key_value import read_key_value
from .images import read_mask, write_mask, write_rgb
from .pfm import read_pfm, write_pfm
from .tables import LIGHTING_COLUMNS, POSE_COLUMNS, read_table, write_table

DEPTH_FILE = "depth.pfm"
ALBEDO_FILE = "albedo.pfm"
ALBEDO_PREVIEW_FILE = "albedo.png"
NORMALS_FILE = "normals.pfm"
MASK_FILE = "mask.png"
TABLE_FILE = "poses_lighting.txt"
INTRINSICS_FILE = "intrinsics.txt"
DIAGNOSTICS_FILE = "diagnostics.jsonl"
MESH_FILE = "mesh.obj"


def mesh_from_depth(depth: ImageGrid, intrinsics: CameraIntrinsics) -> tuple[np.ndarray, np.ndarray]:
    """
    Triangulates the reprojected depth map.

    Every valid pixel becomes a vertex and every 2x2 block of valid pixels two triangles.

    Returns
    -------
    vertices : np.ndarray
        Shape ``(valid pixels, 3)``, in row-major pixel order.
    faces : np.ndarray
        Zero-based vertex indices, shape ``(triangles, 3)``.
    """
    mask = depth.mask
    xs, ys = pixel_grid(*depth.shape)
    vertices = reproject(np.stack([xs[mask], ys[mask]], axis=-1), depth.values[mask], intrinsics)

    index = np.full(mask.shape, -1, dtype=int)
    index[mask] = np.arange(int(mask.sum()))
    top_left, top_right = index[:-1, :-1], index[:-1, 1:]
    bottom_left, bottom_right = index[1:, :-1], index[1:, 1:]
    quads = (top_left >= 0) & (top_right >= 0) & (bottom_left >= 0) & (bottom_right >= 0)
    faces = np.concatenate(
        [
            np.stack([top_left[quads], bottom_left[quads], top_right[quads]], axis=-1),
            np.stack([top_right[quads], bottom_left[quads], bottom_right[quads]], axis=-1),
        ]
    )
    return vertices, faces


def write_obj(path: str | Path, vertices: np.ndarray, faces: np.ndarray):
    with open(path, "w") as f:
        np.savetxt(f, vertices, fmt="v %.17g %.17g %.17g")
        np.savetxt(f, faces + 1, fmt="f %d %d %d")


def save_results(
    estimate: SceneEstimate, out_dir: str | Path, records: Iterable[BaseModel] | None = None
) -> Path:
    """
    Writes an estimate to ``out_dir``.

    Files: ``depth.pfm``, ``albedo.pfm`` and a clamped ``albedo.png`` preview, ``normals.pfm``,
    ``mask.png``, ``poses_lighting.txt`` (frame, twist, lighting), ``intrinsics.txt``,
    ``diagnostics.jsonl`` (one JSON record per sweep) and ``mesh.obj``.

    Raises
    ------
    DatasetError
        If the directory can't be written.
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        write_pfm(out_dir / DEPTH_FILE, estimate.depth.values)
        write_pfm(out_dir / ALBEDO_FILE, estimate.albedo.data)
        write_rgb(out_dir / ALBEDO_PREVIEW_FILE, estimate.albedo.data)
        write_pfm(out_dir / NORMALS_FILE, normals_from_depth(estimate.depth, estimate.intrinsics).normals)
        write_mask(out_dir / MASK_FILE, estimate.depth.mask)
        write_table(out_dir / TABLE_FILE, poses=estimate.poses, lighting=estimate.lighting)
        intrinsics = estimate.intrinsics
        (out_dir / INTRINSICS_FILE).write_text(
            f"f = {intrinsics.f!r}\ncx = {intrinsics.cx!r}\ncy = {intrinsics.cy!r}\n"
        )
        with open(out_dir / DIAGNOSTICS_FILE, "w") as f:
            for record in records or []:
                f.write(record.model_dump_json() + "\n")
        write_obj(out_dir / MESH_FILE, *mesh_from_depth(estimate.depth, intrinsics))
    except OSError as error:
        raise DatasetError(out_dir, f"can't write results ({error})") from error
    logger.info(f"Results written to {out_dir}")
    return out_dir


def load_results(out_dir: str | Path) -> SceneEstimate:
    """Reads back what :func:`save_results` wrote."""
    out_dir = Path(out_dir)
    mask = read_mask(out_dir / MASK_FILE)
    depth = ImageGrid(data=read_pfm(out_dir / DEPTH_FILE), mask=mask)
    albedo = ImageGrid(data=read_pfm(out_dir / ALBEDO_FILE), mask=mask)
    table = read_table(out_dir / TABLE_FILE, POSE_COLUMNS + LIGHTING_COLUMNS)
    values = read_key_value(out_dir / INTRINSICS_FILE)
    return SceneEstimate(
        depth=depth,
        albedo=albedo,
        lighting=table[LIGHTING_COLUMNS].to_numpy(),
        poses=[TwistPose(xi=row) for row in table[POSE_COLUMNS].to_numpy()],
        intrinsics=CameraIntrinsics(**values),
    )
