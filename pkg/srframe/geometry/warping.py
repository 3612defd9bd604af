"""
Reprojection, rigid transform, projection and their composition, the warping function.

All functions broadcast over leading axes, so they take single pixels as well as whole grids.
"""

import numpy as np

from ..models.camera import CameraIntrinsics
from ..models.image_grid import ImageGrid
from ..models.pose import TwistPose
from ..utils.const import EPS_Z
from .normals import pixel_grid


def reproject(p: np.ndarray, z: np.ndarray, intrinsics: CameraIntrinsics) -> np.ndarray:
    """
    Lifts pixels to 3-D points, ``P = z [(p - c) / f; 1]``.

    Parameters
    ----------
    p : np.ndarray
        Pixels ``(x, y)`` of shape ``(..., 2)``.
    z : np.ndarray
        Depths of shape ``(...)``.
    intrinsics : CameraIntrinsics

    Returns
    -------
    np.ndarray
        Points of shape ``(..., 3)``.
    """
    p = np.asarray(p, dtype=float)
    z = np.asarray(z, dtype=float)
    ray_xy = (p - intrinsics.principal_point) / intrinsics.f
    return np.concatenate([ray_xy * z[..., None], z[..., None]], axis=-1)


def transform(points: np.ndarray, pose: TwistPose) -> np.ndarray:
    """``R P + t`` for points stacked on the last axis."""
    return pose.transform(points)


def project(points: np.ndarray, intrinsics: CameraIntrinsics) -> tuple[np.ndarray, np.ndarray]:
    """
    Projects 3-D points, ``p = (f / Z) [X; Y] + c``.

    Returns
    -------
    pixels : np.ndarray
        Shape ``(..., 2)``; NaN where the point is degenerate.
    valid : np.ndarray
        False where ``Z <= 1e-6`` (behind or at the camera).
    """
    points = np.asarray(points, dtype=float)
    depth = points[..., 2]
    valid = depth > EPS_Z
    safe_depth = np.where(valid, depth, 1.0)
    pixels = intrinsics.f * points[..., :2] / safe_depth[..., None] + intrinsics.principal_point
    pixels = np.where(valid[..., None], pixels, np.nan)
    return pixels, valid


def warped_points(z: ImageGrid, pose: TwistPose, intrinsics: CameraIntrinsics) -> np.ndarray:
    """Reference pixels lifted with their depth and moved into the frame's camera, shape ``(H, W, 3)``."""
    xs, ys = pixel_grid(*z.shape)
    points = reproject(np.stack([xs, ys], axis=-1), z.values, intrinsics)
    return transform(points, pose)


def warp(z: ImageGrid, pose: TwistPose, intrinsics: CameraIntrinsics) -> tuple[np.ndarray, np.ndarray]:
    """
    The warping function ``w[R, t, z](p) = project(transform(reproject(p, z(p))))`` over a whole grid.

    Parameters
    ----------
    z : ImageGrid
        Reference depth.
    pose : TwistPose
        Motion from the reference camera to the target camera.
    intrinsics : CameraIntrinsics
        Shared intrinsics of both cameras.

    Returns
    -------
    pixels : np.ndarray
        Target positions of shape ``(H, W, 2)``.
    valid : np.ndarray
        Mask-valid reference pixels with positive depth whose target is in front of the camera and
        inside an image of the same size.
    """
    if pose.is_identity:
        xs, ys = pixel_grid(*z.shape)
        return np.stack([xs, ys], axis=-1), z.mask & (z.values > EPS_Z)

    points = warped_points(z, pose, intrinsics)
    pixels, valid = project(points, intrinsics)
    valid &= z.mask & (z.values > EPS_Z)
    height, width = z.shape
    with np.errstate(invalid="ignore"):
        inside = (
            (pixels[..., 0] >= 0)
            & (pixels[..., 0] <= width - 1)
            & (pixels[..., 1] >= 0)
            & (pixels[..., 1] <= height - 1)
        )
    return pixels, valid & inside


def projection_jacobian(points: np.ndarray, intrinsics: CameraIntrinsics) -> np.ndarray:
    """Derivative of :func:`project` with respect to the point, shape ``(..., 2, 3)``."""
    points = np.asarray(points, dtype=float)
    x, y, depth = points[..., 0], points[..., 1], points[..., 2]
    depth = np.where(depth > EPS_Z, depth, np.nan)
    f = intrinsics.f
    zeros = np.zeros_like(depth)
    return np.stack(
        [
            np.stack([f / depth, zeros, -f * x / depth**2], axis=-1),
            np.stack([zeros, f / depth, -f * y / depth**2], axis=-1),
        ],
        axis=-2,
    )


def point_twist_jacobian(points: np.ndarray) -> np.ndarray:
    """
    Derivative of ``exp(delta) Q`` at ``delta = 0`` for ``delta = (v, w)``, i.e. ``[I | -[Q]x]``.

    Returns an array of shape ``(..., 3, 6)``.
    """
    points = np.asarray(points, dtype=float)
    jacobian = np.zeros(points.shape[:-1] + (3, 6))
    jacobian[..., :, :3] = np.eye(3)
    x, y, depth = points[..., 0], points[..., 1], points[..., 2]
    # -[Q]x
    jacobian[..., 0, 4] = depth
    jacobian[..., 0, 5] = -y
    jacobian[..., 1, 3] = -depth
    jacobian[..., 1, 5] = x
    jacobian[..., 2, 3] = y
    jacobian[..., 2, 4] = -x
    return jacobian


def warp_jacobian(
    p: np.ndarray, z: np.ndarray, pose: TwistPose, intrinsics: CameraIntrinsics
) -> np.ndarray:
    """
    Derivative of the warp with respect to a left perturbation ``exp(delta) o pose``.

    Parameters
    ----------
    p : np.ndarray
        Reference pixels of shape ``(..., 2)``.
    z : np.ndarray
        Their depths, shape ``(...)``.
    pose : TwistPose
        Current pose.
    intrinsics : CameraIntrinsics

    Returns
    -------
    np.ndarray
        Shape ``(..., 2, 6)``, columns ordered ``(v_x, v_y, v_z, w_x, w_y, w_z)``. NaN where the
        transformed point is behind the camera.
    """
    points = transform(reproject(p, z, intrinsics), pose)
    return projection_jacobian(points, intrinsics) @ point_twist_jacobian(points)


def grid_warp_jacobian(z: ImageGrid, pose: TwistPose, intrinsics: CameraIntrinsics) -> np.ndarray:
    """:func:`warp_jacobian` evaluated at every pixel of a depth grid, shape ``(H, W, 2, 6)``."""
    xs, ys = pixel_grid(*z.shape)
    return warp_jacobian(np.stack([xs, ys], axis=-1), z.values, pose, intrinsics)
