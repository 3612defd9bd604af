"""
Accuracy of a reconstruction: mean angular error of the normals and depth RMSE.
"""

import numpy as np
from pydantic import BaseModel, Field

from ..geometry.normals import NormalField, normals_from_depth
from ..models.camera import CameraIntrinsics
from ..models.dataset import Dataset
from ..models.image_grid import ImageGrid, check_same_shape
from ..preprocessing.sampling import bilinear_resize
from ..utils.errors import EmptyMaskError


class MetricsReport(BaseModel):
    """
    Evaluation of an estimate against ground truth.

    Attributes
    ----------
    mae_deg : float
        Mean angular error of the normals in degrees.
    rmse : float
        Depth RMSE in depth units, without any alignment.
    valid_pixels : int
        Pixels valid in both depth maps.
    mae_pixels, rmse_pixels : int
        Pixels each metric was averaged over.
    mae_mask, rmse_mask : str
        Which masks were intersected for each metric.
    """

    mae_deg: float = Field(ge=0, le=180)
    rmse: float = Field(ge=0)
    valid_pixels: int = Field(ge=0)
    mae_pixels: int = Field(ge=0)
    rmse_pixels: int = Field(ge=0)
    mae_mask: str = "estimate normals & ground truth normals"
    rmse_mask: str = "estimate depth & ground truth depth"


def angular_error(a: NormalField, b: NormalField, mask: np.ndarray | None = None) -> ImageGrid:
    """
    Per-pixel angle between two normal fields in degrees.

    The result is valid where both fields (and ``mask``, if given) are.
    """
    if a.shape != b.shape:
        raise ValueError(f"Normal fields differ in size: {a.shape} and {b.shape}")
    valid = a.mask & b.mask
    if mask is not None:
        valid &= np.asarray(mask, dtype=bool)
    cosine = np.clip((a.normals * b.normals).sum(axis=-1), -1.0, 1.0)
    return ImageGrid(data=np.degrees(np.arccos(cosine)), mask=valid)


def mae_normals(
    z_est: ImageGrid, z_gt: ImageGrid, intrinsics: CameraIntrinsics, mask: np.ndarray | None = None
) -> float:
    """
    Mean angular error between the normals of two depth maps, both computed with the same stencil.

    Raises
    ------
    EmptyMaskError
        If no pixel has a normal in both maps.
    """
    check_same_shape(z_est, z_gt)
    errors = angular_error(normals_from_depth(z_est, intrinsics), normals_from_depth(z_gt, intrinsics), mask)
    if not errors.mask.any():
        raise EmptyMaskError("No pixel to evaluate normals on")
    return errors.masked_mean()


def rmse_depth(z_est: ImageGrid, z_gt: ImageGrid, mask: np.ndarray | None = None) -> float:
    """
    Root mean squared depth difference over the pixels valid in both maps.

    Raises
    ------
    EmptyMaskError
        If the masks do not intersect.
    """
    check_same_shape(z_est, z_gt)
    valid = z_est.mask & z_gt.mask
    if mask is not None:
        valid &= np.asarray(mask, dtype=bool)
    if not valid.any():
        raise EmptyMaskError("No pixel to evaluate depth on")
    difference = z_est.values[valid] - z_gt.values[valid]
    return float(np.sqrt(np.mean(difference**2)))


def evaluate(
    z_est: ImageGrid, z_gt: ImageGrid, intrinsics: CameraIntrinsics, mask: np.ndarray | None = None
) -> MetricsReport:
    """Both metrics with the pixel counts they used."""
    errors = angular_error(normals_from_depth(z_est, intrinsics), normals_from_depth(z_gt, intrinsics), mask)
    valid = z_est.mask & z_gt.mask
    if mask is not None:
        valid &= np.asarray(mask, dtype=bool)
    suffix = " & evaluation mask" if mask is not None else ""
    return MetricsReport(
        mae_deg=mae_normals(z_est, z_gt, intrinsics, mask),
        rmse=rmse_depth(z_est, z_gt, mask),
        valid_pixels=int((z_est.mask & z_gt.mask).sum()),
        mae_pixels=errors.valid_count,
        rmse_pixels=int(valid.sum()),
        mae_mask=MetricsReport.model_fields["mae_mask"].default + suffix,
        rmse_mask=MetricsReport.model_fields["rmse_mask"].default + suffix,
    )


def upsampled_input(dataset: Dataset) -> ImageGrid:
    """The LR reference depth bilinearly resampled to the HR grid, the baseline an estimate should beat."""
    height, width = dataset.shape
    resampled = bilinear_resize(dataset.depth_lr, height, width)
    mask = resampled.mask & dataset.mask & (resampled.values > 0)
    return resampled.with_mask(mask)
