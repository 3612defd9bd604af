"""
Lambertian image formation under first-order spherical-harmonic lighting.
"""

import numpy as np

from ..geometry.normals import NormalField, normals_from_depth
from ..geometry.warping import warp
from ..models.camera import CameraIntrinsics
from ..models.image_grid import ImageGrid, check_same_shape
from ..models.lighting import LightingVector, as_lighting_array
from ..models.pose import TwistPose
from ..preprocessing.sampling import bilinear_sample

UNIT_TOLERANCE = 1e-9


def sh_basis(n: np.ndarray) -> np.ndarray:
    """
    First-order spherical-harmonic basis ``m(n) = [1, n]``.

    Parameters
    ----------
    n : np.ndarray
        Unit normals of shape ``(..., 3)``.

    Returns
    -------
    np.ndarray
        Shape ``(..., 4)``.

    Raises
    ------
    ValueError
        If any normal deviates from unit length by more than ``1e-9``.
    """
    n = np.asarray(n, dtype=float)
    if n.shape[-1] != 3:
        raise ValueError(f"Normals should have 3 components, got shape {n.shape}")
    norms = np.linalg.norm(n, axis=-1)
    if not np.all(np.abs(norms - 1.0) <= UNIT_TOLERANCE):
        raise ValueError("Spherical-harmonic basis needs unit normals")
    return np.concatenate([np.ones(n.shape[:-1] + (1,)), n], axis=-1)


def shading_field(normals: NormalField, lighting: LightingVector | np.ndarray) -> np.ndarray:
    """Shading ``<m(n), l>`` per pixel, zero outside the normal mask. Not clamped."""
    l = as_lighting_array(lighting)
    shading = l[0] + normals.normals @ l[1:]
    return np.where(normals.mask, shading, 0.0)


def shade(
    z: ImageGrid, intrinsics: CameraIntrinsics, albedo: ImageGrid, lighting: LightingVector | np.ndarray
) -> ImageGrid:
    """
    Forward model ``I_c(p) = rho_c(p) <m(n(p)), l>``.

    The shading is not clamped at zero; attached shadows are left to the robust estimator.

    Parameters
    ----------
    z : ImageGrid
        Depth defining the normals.
    intrinsics : CameraIntrinsics
    albedo : ImageGrid
        Reflectance, usually 3 channels.
    lighting : LightingVector | np.ndarray

    Returns
    -------
    ImageGrid
        Valid where both the normal and the albedo are.
    """
    check_same_shape(z, albedo)
    normals = normals_from_depth(z, intrinsics)
    shading = shading_field(normals, lighting)
    mask = normals.mask & albedo.mask
    return ImageGrid(data=albedo.data * shading[..., None], mask=mask)


def warp_image(frame: ImageGrid, pose: TwistPose, z: ImageGrid, intrinsics: CameraIntrinsics) -> ImageGrid:
    """
    Samples a frame at the warped reference pixels, ``I~(p) = I(w(p))``.

    Pixels whose warp is degenerate, leaves the image or touches an invalid frame pixel are invalid.
    """
    check_same_shape(frame, z)
    pixels, warp_valid = warp(z, pose, intrinsics)
    values, sample_valid = bilinear_sample(frame, pixels[..., 0], pixels[..., 1])
    return ImageGrid(data=values, mask=warp_valid & sample_valid)


def residual(
    frame: ImageGrid,
    pose: TwistPose,
    z: ImageGrid,
    intrinsics: CameraIntrinsics,
    albedo: ImageGrid,
    lighting: LightingVector | np.ndarray,
) -> ImageGrid:
    """
    Photometric residual ``r_c(p) = I~_c(p) - rho_c(p) <m(n(p)), l>`` of one frame.

    Returns
    -------
    ImageGrid
        Residuals with the joint validity of the warp, the normals and the albedo.
    """
    return photometric_residual(warp_image(frame, pose, z, intrinsics), shade(z, intrinsics, albedo, lighting))


def photometric_residual(warped: ImageGrid, predicted: ImageGrid) -> ImageGrid:
    """Residual of an already warped frame against an already shaded prediction."""
    check_same_shape(warped, predicted)
    if warped.channels != predicted.channels:
        raise ValueError(f"Frame has {warped.channels} channels, albedo has {predicted.channels}")
    return ImageGrid(data=warped.data - predicted.data, mask=warped.mask & predicted.mask)
