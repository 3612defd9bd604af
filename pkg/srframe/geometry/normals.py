import numpy as np
import scipy.sparse as sp
from loguru import logger
from pydantic import BaseModel, ConfigDict, InstanceOf

from ..models.camera import CameraIntrinsics
from ..models.image_grid import ImageGrid
from ..utils.const import EPS_AREA


def pixel_grid(height: int, width: int) -> tuple[np.ndarray, np.ndarray]:
    """Column and row coordinates of every pixel, each of shape ``(height, width)``."""
    ys, xs = np.meshgrid(np.arange(height, dtype=float), np.arange(width, dtype=float), indexing="ij")
    return xs, ys


def _axis_gradient(values: np.ndarray, mask: np.ndarray, axis: int) -> np.ndarray:
    values = np.moveaxis(values, axis, 1)
    mask = np.moveaxis(mask, axis, 1)
    difference = values[:, 1:] - values[:, :-1]

    has_forward = np.zeros_like(mask)
    has_forward[:, :-1] = mask[:, 1:]
    has_backward = np.zeros_like(mask)
    has_backward[:, 1:] = mask[:, :-1]
    forward = np.zeros_like(values)
    forward[:, :-1] = difference
    backward = np.zeros_like(values)
    backward[:, 1:] = difference

    gradient = np.where(has_forward, forward, np.where(has_backward, backward, 0.0))
    gradient = np.where(mask, gradient, 0.0)
    return np.moveaxis(gradient, 1, axis)


def depth_gradient(z: ImageGrid) -> np.ndarray:
    """
    Masked forward-difference gradient of a depth map.

    ``dz/dx = z(x+1, y) - z(x, y)`` when the right neighbour is valid, the backward difference when only
    the left neighbour is valid, and 0 when neither is (same along ``y``).

    Parameters
    ----------
    z : ImageGrid
        Single-channel depth.

    Returns
    -------
    np.ndarray
        Shape ``(height, width, 2)`` holding ``(dz/dx, dz/dy)``; zero outside the mask.
    """
    values = z.values
    return np.stack([_axis_gradient(values, z.mask, 1), _axis_gradient(values, z.mask, 0)], axis=-1)


def gradient_operators(mask: np.ndarray) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """
    Sparse matrices of :func:`depth_gradient` acting on the vector of mask-valid pixels.

    Pixels are numbered in row-major order of ``mask``.

    Returns
    -------
    tuple[sp.csr_matrix, sp.csr_matrix]
        ``(Gx, Gy)``, each square of size ``mask.sum()``.
    """
    mask = np.asarray(mask, dtype=bool)
    count = int(mask.sum())
    index = np.full(mask.shape, -1, dtype=int)
    index[mask] = np.arange(count)

    def operator(axis: int) -> sp.csr_matrix:
        idx = np.moveaxis(index, axis, 1)
        centre = idx
        right = np.full_like(idx, -1)
        right[:, :-1] = idx[:, 1:]
        left = np.full_like(idx, -1)
        left[:, 1:] = idx[:, :-1]

        valid = centre >= 0
        forward = valid & (right >= 0)
        backward = valid & ~forward & (left >= 0)

        rows = np.concatenate([centre[forward], centre[forward], centre[backward], centre[backward]])
        cols = np.concatenate([right[forward], centre[forward], centre[backward], left[backward]])
        data = np.concatenate(
            [
                np.ones(forward.sum()),
                -np.ones(forward.sum()),
                np.ones(backward.sum()),
                -np.ones(backward.sum()),
            ]
        )
        return sp.csr_matrix((data, (rows, cols)), shape=(count, count))

    return operator(1), operator(0)


class NormalField(BaseModel):
    """
    Perspective normals of a depth map.

    Attributes
    ----------
    unnormalized : np.ndarray
        ``n~ = [f dz; -z - <p - c, dz>]``, shape ``(height, width, 3)``.
    area : np.ndarray
        Area element ``dA = |n~|``, shape ``(height, width)``.
    normals : np.ndarray
        Unit normals ``n~ / dA``, shape ``(height, width, 3)``.
    mask : np.ndarray
        Pixels with a usable normal.
    flagged : int
        Pixels of the depth mask dropped because ``dA`` vanished.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    unnormalized: InstanceOf[np.ndarray]
    area: InstanceOf[np.ndarray]
    normals: InstanceOf[np.ndarray]
    mask: InstanceOf[np.ndarray]
    flagged: int = 0

    @property
    def shape(self) -> tuple[int, int]:
        return self.mask.shape


def normals_from_depth(z: ImageGrid, intrinsics: CameraIntrinsics) -> NormalField:
    """
    Unit normals of a depth map under perspective projection.

    The unnormalized normal is ``[f dz; -z - <p - c, dz>]`` which is linear in ``z``; at unit depth it
    reads ``[f dz; -1 - <p - c, dz>]``. The area element ``dA`` is its norm, so a fronto-parallel
    plane (``dz = 0``) has ``dA = z`` and ``dA = 1`` only at ``z = 1``. Pixels whose area element falls
    below ``1e-12`` are removed from the mask instead of raising.

    Parameters
    ----------
    z : ImageGrid
        Positive depth on its mask.
    intrinsics : CameraIntrinsics
        Camera of the depth map.

    Returns
    -------
    NormalField
    """
    gradient = depth_gradient(z)
    xs, ys = pixel_grid(*z.shape)
    dx, dy = gradient[..., 0], gradient[..., 1]
    depth = z.values
    unnormalized = np.stack(
        [
            intrinsics.f * dx,
            intrinsics.f * dy,
            -depth - (xs - intrinsics.cx) * dx - (ys - intrinsics.cy) * dy,
        ],
        axis=-1,
    )
    area = np.linalg.norm(unnormalized, axis=-1)
    degenerate = z.mask & ~(area > EPS_AREA)
    mask = z.mask & ~degenerate
    if degenerate.any():
        logger.debug(f"{int(degenerate.sum())} pixels dropped with a vanishing area element")

    safe_area = np.where(mask, area, 1.0)
    normals = np.where(mask[..., None], unnormalized / safe_area[..., None], 0.0)
    unnormalized = np.where(mask[..., None], unnormalized, 0.0)
    area = np.where(mask, area, 0.0)
    return NormalField(
        unnormalized=unnormalized, area=area, normals=normals, mask=mask, flagged=int(degenerate.sum())
    )
