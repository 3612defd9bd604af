"""
On-disk dataset layout: a key-value manifest next to the frame, depth, mask and ground-truth files.

Manifest keys are ``rgb_glob``, ``depth_lr``, ``mask``, ``f`` (or ``fx`` and ``fy``), ``cx``, ``cy``,
``depth_scale`` and the optional ``gt_depth``, ``gt_albedo``, ``gt_poses``, ``gt_lighting``. Paths are
relative to the manifest's directory.
"""

from pathlib import Path

import numpy as np
from loguru import logger
from pydantic import ValidationError

from ..models.camera import CameraIntrinsics
from ..models.dataset import Dataset, DatasetManifest, GroundTruth
from ..models.image_grid import ImageGrid
from ..preprocessing.sampling import infer_scale_factor
from ..utils.errors import (
    DatasetError,
    DimensionMismatchError,
    MalformedFileError,
    MissingFileError,
    SizeMismatchError,
)
from ..utils.key_value import read_key_value
from .images import read_depth_png, read_mask, read_rgb, write_mask, write_rgb
from .pfm import read_pfm, write_pfm
from .tables import read_lighting, read_poses, write_table

MANIFEST_NAME = "manifest.txt"
PATH_KEYS = ("depth_lr", "mask", "gt_depth", "gt_albedo", "gt_poses", "gt_lighting")


def load_manifest(path: str | Path) -> DatasetManifest:
    """
    Parses a manifest file.

    Raises
    ------
    MissingFileError
        If the manifest is missing or ``rgb_glob`` matches nothing.
    MalformedFileError
        If keys are missing or values are invalid.
    """
    path = Path(path)
    values = read_key_value(path)
    root = path.parent
    if "rgb_glob" not in values:
        raise MalformedFileError(path, "missing key 'rgb_glob'")
    rgb = sorted(root.glob(values.pop("rgb_glob")))
    if not rgb:
        raise MissingFileError(path, "no RGB frame matches 'rgb_glob'")
    for key in PATH_KEYS:
        if key in values:
            values[key] = root / values[key]
    try:
        if "f" not in values and "fx" in values and "fy" in values:
            intrinsics = CameraIntrinsics.from_focal_pair(
                float(values.pop("fx")), float(values.pop("fy")), float(values["cx"]), float(values["cy"])
            )
            values["f"] = intrinsics.f
        return DatasetManifest(rgb=rgb, **values)
    except (ValidationError, KeyError, ValueError) as error:
        raise MalformedFileError(path, f"invalid manifest ({error})") from error


def _read_frame(path: Path) -> np.ndarray:
    return read_pfm(path) if path.suffix.lower() == ".pfm" else read_rgb(path)


def _read_depth(path: Path, depth_scale: float) -> ImageGrid:
    depth = read_pfm(path) if path.suffix.lower() == ".pfm" else read_depth_png(path, depth_scale)
    if depth.ndim != 2:
        raise MalformedFileError(path, f"depth should have a single channel, got shape {depth.shape}")
    valid = np.isfinite(depth) & (depth > 0)
    return ImageGrid(data=np.where(valid, depth, 0.0), mask=valid)


def _check_size(path: Path, shape: tuple[int, int], expected: tuple[int, int]):
    if tuple(shape) != tuple(expected):
        raise SizeMismatchError(path, f"size {shape[1]}x{shape[0]} differs from {expected[1]}x{expected[0]}")


def load_dataset(path: str | Path) -> Dataset:
    """
    Loads a dataset from its manifest.

    RGB PNGs are mapped to ``[0, 1]``, PFM frames are read as is. LR depth is a PFM or a 16-bit PNG
    scaled by ``depth_scale``; zero depth is invalid. The mask PNG marks valid pixels with nonzero
    values.

    Raises
    ------
    MissingFileError, MalformedFileError, SizeMismatchError
        Each naming the offending file.
    """
    manifest = load_manifest(path)
    frames = []
    for frame_path in manifest.rgb:
        frame = _read_frame(frame_path)
        if frames:
            _check_size(frame_path, frame.shape[:2], frames[0].shape)
        frames.append(ImageGrid.from_array(frame))
    shape = frames[0].shape

    depth_lr = _read_depth(manifest.depth_lr, manifest.depth_scale)
    try:
        infer_scale_factor(shape, depth_lr.shape)
    except DimensionMismatchError as error:
        raise SizeMismatchError(manifest.depth_lr, str(error)) from error

    mask = np.ones(shape, dtype=bool)
    if manifest.mask is not None:
        mask = read_mask(manifest.mask)
        _check_size(manifest.mask, mask.shape, shape)

    ground_truth = None
    if manifest.has_ground_truth:
        gt_depth = _read_depth(manifest.gt_depth, manifest.depth_scale)
        _check_size(manifest.gt_depth, gt_depth.shape, shape)
        gt_albedo = None
        if manifest.gt_albedo is not None:
            albedo = _read_frame(manifest.gt_albedo)
            _check_size(manifest.gt_albedo, albedo.shape[:2], shape)
            gt_albedo = ImageGrid(data=albedo, mask=gt_depth.mask)
        ground_truth = GroundTruth(
            depth=gt_depth,
            albedo=gt_albedo,
            poses=None if manifest.gt_poses is None else read_poses(manifest.gt_poses),
            lighting=None if manifest.gt_lighting is None else read_lighting(manifest.gt_lighting),
        )

    logger.info(f"Loaded {len(frames)} frames of {shape[1]}x{shape[0]} from {path}")
    return Dataset(
        frames=frames, depth_lr=depth_lr, mask=mask, intrinsics=manifest.intrinsics, ground_truth=ground_truth
    )


def write_dataset(dataset: Dataset, out_dir: str | Path, frame_format: str = "png") -> Path:
    """
    Writes a dataset in the layout :func:`load_dataset` reads.

    Parameters
    ----------
    dataset : Dataset
    out_dir : str | Path
        Created when missing.
    frame_format : str
        ``png`` for 8-bit frames, ``pfm`` for exact float frames.

    Returns
    -------
    Path
        The manifest file.

    Raises
    ------
    DatasetError
        If the directory can't be written.
    """
    if frame_format not in ("png", "pfm"):
        raise ValueError(f"Frame format should be 'png' or 'pfm', got '{frame_format}'")
    out_dir = Path(out_dir)
    try:
        manifest = _write_files(dataset, out_dir, frame_format)
    except OSError as error:
        raise DatasetError(out_dir, f"can't write dataset ({error})") from error
    logger.info(f"Wrote {dataset.n_frames} frames to {out_dir}")
    return manifest


def _write_files(dataset: Dataset, out_dir: Path, frame_format: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)

    for index, frame in enumerate(dataset.frames):
        frame_path = out_dir / f"rgb_{index:03d}.{frame_format}"
        if frame_format == "png":
            write_rgb(frame_path, frame.data)
        else:
            write_pfm(frame_path, frame.data)
    write_pfm(out_dir / "depth_lr.pfm", dataset.depth_lr.values)
    write_mask(out_dir / "mask.png", dataset.mask)

    intrinsics = dataset.intrinsics
    lines = [
        f"rgb_glob = rgb_*.{frame_format}",
        "depth_lr = depth_lr.pfm",
        "mask = mask.png",
        f"f = {intrinsics.f!r}",
        f"cx = {intrinsics.cx!r}",
        f"cy = {intrinsics.cy!r}",
        "depth_scale = 1.0",
    ]
    ground_truth = dataset.ground_truth
    if ground_truth is not None:
        write_pfm(out_dir / "gt_depth.pfm", ground_truth.depth.values)
        lines.append("gt_depth = gt_depth.pfm")
        if ground_truth.albedo is not None:
            write_pfm(out_dir / "gt_albedo.pfm", ground_truth.albedo.data)
            lines.append("gt_albedo = gt_albedo.pfm")
        if ground_truth.poses is not None:
            write_table(out_dir / "gt_poses.txt", poses=ground_truth.poses)
            lines.append("gt_poses = gt_poses.txt")
        if ground_truth.lighting is not None:
            write_table(out_dir / "gt_lighting.txt", lighting=ground_truth.lighting)
            lines.append("gt_lighting = gt_lighting.txt")

    manifest = out_dir / MANIFEST_NAME
    manifest.write_text("\n".join(lines) + "\n")
    return manifest
