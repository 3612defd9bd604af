"""
Multi-resolution pyramid shared by the solver and the dataset loaders.
"""

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..models.camera import CameraIntrinsics
from ..models.image_grid import ImageGrid


class PyramidLevel(BaseModel):
    """
    One level of a coarse-to-fine pyramid.

    Attributes
    ----------
    index : int
        Level index ``k``; 0 is the coarsest level, ``levels - 1`` the input resolution.
    scale : float
        Resolution relative to the input, ``2 ** -(levels - 1 - k)``.
    intrinsics : CameraIntrinsics
        Intrinsics scaled by ``scale``.
    image : ImageGrid
        Image at this resolution.
    """

    model_config = ConfigDict(frozen=True)

    index: int = Field(ge=0)
    scale: float = Field(gt=0, le=1)
    intrinsics: CameraIntrinsics
    image: ImageGrid


def _pad_to_even(array: np.ndarray, fill) -> np.ndarray:
    pad_rows = array.shape[0] % 2
    pad_cols = array.shape[1] % 2
    pad = [(0, pad_rows), (0, pad_cols)] + [(0, 0)] * (array.ndim - 2)
    return np.pad(array, pad, constant_values=fill)


def _block_sum(array: np.ndarray) -> np.ndarray:
    rows, cols = array.shape[0] // 2, array.shape[1] // 2
    return array.reshape(rows, 2, cols, 2, *array.shape[2:]).sum(axis=(1, 3))


def downsample_area(image: ImageGrid) -> ImageGrid:
    """
    Halves an image with a 2x2 area average.

    Odd sizes use ceiling division; boundary pixels average the fine pixels that exist. A coarse pixel
    is valid only when every contributing fine pixel is valid. Depth values are averaged, not rescaled.

    Parameters
    ----------
    image : ImageGrid
        Fine image.

    Returns
    -------
    ImageGrid
        Image of size ``ceil(width / 2) x ceil(height / 2)``.
    """
    present = _pad_to_even(np.ones(image.shape, dtype=float), 0.0)
    data = _pad_to_even(image.data, 0.0)
    # padding counts as valid so that it never invalidates a boundary pixel
    valid = _pad_to_even(image.mask, True)

    count = _block_sum(present)
    mean = _block_sum(data) / count[..., None]
    mask = _block_sum(valid.astype(int)) == 4
    return ImageGrid(data=mean, mask=mask)


def level_shapes(height: int, width: int, levels: int) -> list[tuple[int, int]]:
    """Image shapes of a pyramid, coarsest first."""
    shapes = [(height, width)]
    for _ in range(levels - 1):
        h, w = shapes[-1]
        shapes.append((-(-h // 2), -(-w // 2)))
    return shapes[::-1]


def build_pyramid(image: ImageGrid, intrinsics: CameraIntrinsics, levels: int) -> list[PyramidLevel]:
    """
    Builds a coarse-to-fine pyramid.

    Parameters
    ----------
    image : ImageGrid
        Full-resolution image; it is returned unchanged as the last level.
    intrinsics : CameraIntrinsics
        Full-resolution intrinsics.
    levels : int
        Number of levels, at least 1.

    Returns
    -------
    list[PyramidLevel]
        Levels ordered from coarsest (index 0) to finest.

    Raises
    ------
    ValueError
        If ``levels < 1`` or the coarsest level would have less than one pixel per axis.
    """
    if levels < 1:
        raise ValueError(f"Pyramid needs at least one level, got {levels}")
    factor = 2 ** (levels - 1)
    if image.height < factor or image.width < factor:
        raise ValueError(
            f"A {image.width}x{image.height} image can't be reduced {levels - 1} times without reaching zero size"
        )

    images = [image]
    for _ in range(levels - 1):
        images.append(downsample_area(images[-1]))
    images = images[::-1]

    pyramid = []
    for index, level_image in enumerate(images):
        scale = 2.0 ** -(levels - 1 - index)
        level_intrinsics = intrinsics if scale == 1.0 else intrinsics.scaled(scale)
        pyramid.append(PyramidLevel(index=index, scale=scale, intrinsics=level_intrinsics, image=level_image))
    return pyramid
