"""
The downsampling operator D of the depth prior, its adjoint, and bilinear interpolation.
"""

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, InstanceOf, PrivateAttr, field_validator, model_validator

from ..models.image_grid import ImageGrid
from ..utils.const import SCALE_FACTORS
from ..utils.errors import DimensionMismatchError


class DownsampleOperator(BaseModel):
    """
    Block-mean downsampling between a high-resolution and a low-resolution grid.

    Every LR pixel averages the mask-valid HR pixels of its ``SF x SF`` block. When the HR size is not
    a multiple of SF the HR grid is padded by replicating its last row and column. An LR pixel whose
    block holds no valid HR pixel is invalid. The operator is stored as a sparse matrix acting on
    row-major flattened grids, so its adjoint is the matrix transpose.

    Attributes
    ----------
    scale_factor : int
        SF, one of 2, 4, 8.
    hr_mask : np.ndarray
        Validity of the HR pixels.

    Methods
    -------
    apply(z_hr) -> ImageGrid
        ``D z``.
    apply_transpose(y_lr) -> ImageGrid
        ``D^T y``.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    scale_factor: int
    hr_mask: InstanceOf[np.ndarray]

    _matrix: sp.csr_matrix = PrivateAttr()
    _lr_mask: np.ndarray = PrivateAttr()
    _full_mask: np.ndarray = PrivateAttr()

    @field_validator("scale_factor")
    @classmethod
    def validate_scale_factor(cls, scale_factor):
        assert scale_factor in SCALE_FACTORS, f"Scale factor should be one of {SCALE_FACTORS}"
        return scale_factor

    @field_validator("hr_mask", mode="before")
    @classmethod
    def validate_hr_mask(cls, mask):
        mask = np.array(mask, dtype=bool)
        assert mask.ndim == 2, "HR mask should be 2-D"
        return mask

    @model_validator(mode="after")
    def build_matrix(self):
        sf = self.scale_factor
        hr_h, hr_w = self.hr_shape
        lr_h, lr_w = self.lr_shape
        # replicate-padded block coordinates
        rows = np.minimum(np.arange(lr_h * sf), hr_h - 1)
        cols = np.minimum(np.arange(lr_w * sf), hr_w - 1)
        hr_index = rows[:, None] * hr_w + cols[None, :]
        lr_index = (np.arange(lr_h * sf) // sf)[:, None] * lr_w + (np.arange(lr_w * sf) // sf)[None, :]
        valid = self.hr_mask.reshape(-1)[hr_index]

        counts = sp.csr_matrix(
            (np.ones(valid.sum()), (lr_index[valid], hr_index[valid])), shape=(lr_h * lr_w, hr_h * hr_w)
        )
        totals = np.asarray(counts.sum(axis=1)).reshape(-1)
        lr_mask = totals > 0
        inverse = np.zeros_like(totals)
        inverse[lr_mask] = 1.0 / totals[lr_mask]
        self._matrix = (sp.diags(inverse) @ counts).tocsr()
        self._lr_mask = lr_mask.reshape(lr_h, lr_w)
        self._full_mask = (totals == sf * sf).reshape(lr_h, lr_w)
        return self

    @property
    def hr_shape(self) -> tuple[int, int]:
        return self.hr_mask.shape

    @property
    def lr_shape(self) -> tuple[int, int]:
        hr_h, hr_w = self.hr_mask.shape
        return -(-hr_h // self.scale_factor), -(-hr_w // self.scale_factor)

    @property
    def lr_mask(self) -> np.ndarray:
        return self._lr_mask.copy()

    @property
    def full_mask(self) -> np.ndarray:
        """LR pixels whose whole padded block is valid."""
        return self._full_mask.copy()

    @property
    def matrix(self) -> sp.csr_matrix:
        """Sparse matrix of shape ``(LR pixels, HR pixels)``."""
        return self._matrix

    def apply(self, z_hr: ImageGrid) -> ImageGrid:
        if z_hr.shape != self.hr_shape:
            raise DimensionMismatchError(f"Expected an HR grid of shape {self.hr_shape}, got {z_hr.shape}")
        data = z_hr.data.reshape(-1, z_hr.channels)
        # pixels outside this operator's HR mask must not contribute
        data = data * self.hr_mask.reshape(-1, 1)
        lr = self._matrix @ data
        return ImageGrid(data=lr.reshape(*self.lr_shape, z_hr.channels), mask=self._lr_mask.copy())

    def apply_transpose(self, y_lr: ImageGrid) -> ImageGrid:
        if y_lr.shape != self.lr_shape:
            raise DimensionMismatchError(f"Expected an LR grid of shape {self.lr_shape}, got {y_lr.shape}")
        data = y_lr.data.reshape(-1, y_lr.channels) * self._lr_mask.reshape(-1, 1)
        hr = self._matrix.T @ data
        return ImageGrid(data=hr.reshape(*self.hr_shape, y_lr.channels), mask=self.hr_mask.copy())


def infer_scale_factor(hr_shape: tuple[int, int], lr_shape: tuple[int, int]) -> int:
    """
    Finds the SF that maps ``hr_shape`` to ``lr_shape`` by ceiling division.

    Raises
    ------
    DimensionMismatchError
        If no supported SF fits.
    """
    for sf in SCALE_FACTORS:
        if (-(-hr_shape[0] // sf), -(-hr_shape[1] // sf)) == tuple(lr_shape):
            return sf
    raise DimensionMismatchError(f"No scale factor in {SCALE_FACTORS} maps {hr_shape} to {lr_shape}")


def apply_D(z_hr: ImageGrid, scale_factor: int) -> ImageGrid:
    """Block-mean downsampling of ``z_hr`` using its own mask."""
    return DownsampleOperator(scale_factor=scale_factor, hr_mask=z_hr.mask).apply(z_hr)


def apply_D_transpose(y_lr: ImageGrid, operator: DownsampleOperator) -> ImageGrid:
    """Adjoint of ``operator`` applied to ``y_lr``."""
    return operator.apply_transpose(y_lr)


def bilinear_sample(
    image: ImageGrid, qx: np.ndarray, qy: np.ndarray, with_gradient: bool = False
) -> tuple[np.ndarray, ...]:
    """
    Samples an image at sub-pixel positions.

    A sample is invalid when it lies outside ``[0, W-1] x [0, H-1]``, is not finite, or when any corner
    carrying a nonzero interpolation weight is mask-invalid.

    Parameters
    ----------
    image : ImageGrid
        Image to sample.
    qx, qy : np.ndarray
        Positions (column, row) of identical shape.
    with_gradient : bool, optional
        Also return the derivative of the bilinear interpolant with respect to ``(qx, qy)``.

    Returns
    -------
    values : np.ndarray
        Shape ``qx.shape + (channels,)``, zero where invalid.
    valid : np.ndarray
        Boolean, shape ``qx.shape``.
    gradient : np.ndarray
        Shape ``qx.shape + (channels, 2)``; only when ``with_gradient`` is set.
    """
    qx = np.asarray(qx, dtype=float)
    qy = np.asarray(qy, dtype=float)
    height, width = image.shape
    inside = (
        np.isfinite(qx) & np.isfinite(qy) & (qx >= 0) & (qx <= width - 1) & (qy >= 0) & (qy <= height - 1)
    )
    qx = np.where(inside, qx, 0.0)
    qy = np.where(inside, qy, 0.0)

    x0 = np.clip(np.floor(qx).astype(int), 0, width - 1)
    y0 = np.clip(np.floor(qy).astype(int), 0, height - 1)
    x1 = np.minimum(x0 + 1, width - 1)
    y1 = np.minimum(y0 + 1, height - 1)
    ax = qx - x0
    ay = qy - y0

    mask = image.mask
    valid = inside & mask[y0, x0]
    valid &= (ax == 0) | mask[y0, x1]
    valid &= (ay == 0) | mask[y1, x0]
    valid &= (ax == 0) | (ay == 0) | mask[y1, x1]

    data = image.data
    i00, i01, i10, i11 = data[y0, x0], data[y0, x1], data[y1, x0], data[y1, x1]
    wx, wy = ax[..., None], ay[..., None]
    values = (1 - wy) * ((1 - wx) * i00 + wx * i01) + wy * ((1 - wx) * i10 + wx * i11)
    values = np.where(valid[..., None], values, 0.0)
    if not with_gradient:
        return values, valid

    d_dx = (1 - wy) * (i01 - i00) + wy * (i11 - i10)
    d_dy = (1 - wx) * (i10 - i00) + wx * (i11 - i01)
    gradient = np.stack([d_dx, d_dy], axis=-1)
    gradient = np.where(valid[..., None, None], gradient, 0.0)
    return values, valid, gradient


def bilinear_resize(image: ImageGrid, height: int, width: int) -> ImageGrid:
    """
    Resamples an image to ``height x width`` with the align-corners-false convention.

    Source coordinates are clamped to the image, so borders replicate. Target pixels are valid when all
    contributing source corners are valid.
    """
    scale_y = image.height / height
    scale_x = image.width / width
    ys = np.clip((np.arange(height) + 0.5) * scale_y - 0.5, 0, image.height - 1)
    xs = np.clip((np.arange(width) + 0.5) * scale_x - 0.5, 0, image.width - 1)
    qy, qx = np.meshgrid(ys, xs, indexing="ij")
    values, valid = bilinear_sample(image, qx, qy)
    return ImageGrid(data=values, mask=valid)


def bilinear_upsample(image: ImageGrid, height: int, width: int) -> ImageGrid:
    """
    Bilinear upsampling to a grid at least as large as the input.

    Raises
    ------
    ValueError
        If the target is smaller than the source along either axis.
    """
    if height < image.height or width < image.width:
        raise ValueError(f"Target {width}x{height} is smaller than source {image.width}x{image.height}")
    return bilinear_resize(image, height, width)
