import numpy as np
from pydantic import BaseModel, ConfigDict, InstanceOf, field_validator, model_validator

from ..utils.errors import DimensionMismatchError


class ImageGrid(BaseModel):
    """
    A 2-D scalar or vector field over a pixel domain with a per-pixel validity mask.

    Depth, albedo, RGB frames, masks and IRLS weights all live in this container. Pixel ``(x, y)`` is
    column ``x`` and row ``y`` of the arrays; invalid pixels always store 0 and are excluded by the mask,
    never by value tests.

    Attributes
    ----------
    data : np.ndarray
        Float array of shape ``(height, width, channels)``.
    mask : np.ndarray
        Boolean array of shape ``(height, width)``.

    Methods
    -------
    from_array(array, mask=None) -> ImageGrid
        Wraps a 2-D or 3-D array, optionally with a mask.
    with_data(data) -> ImageGrid
        Returns a grid with the same mask and new values.
    with_mask(mask) -> ImageGrid
        Returns a grid with the same values restricted to a new mask.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    data: InstanceOf[np.ndarray]
    mask: InstanceOf[np.ndarray]

    @field_validator("data", mode="before")
    @classmethod
    def validate_data(cls, data):
        data = np.array(data, dtype=float)
        if data.ndim == 2:
            data = data[..., None]
        assert data.ndim == 3, "Grid data should be of shape (height, width, channels)"
        assert data.shape[0] > 0 and data.shape[1] > 0 and data.shape[2] > 0, "Grid should not be empty"
        return data

    @field_validator("mask", mode="before")
    @classmethod
    def validate_mask(cls, mask):
        mask = np.array(mask)
        assert mask.ndim == 2, "Mask should be of shape (height, width)"
        return mask.astype(bool)

    @model_validator(mode="after")
    def validate_model(self):
        assert self.mask.shape == self.data.shape[:2], "Mask and data shapes don't match"
        # sentinel: invalid pixels store 0; a frozen array was already cleared when first validated
        if self.data.flags.writeable:
            self.data[~self.mask] = 0.0
        self.data.setflags(write=False)
        self.mask.setflags(write=False)
        return self

    @classmethod
    def from_array(cls, array: np.ndarray, mask: np.ndarray | None = None) -> "ImageGrid":
        array = np.array(array, dtype=float)
        if mask is None:
            mask = np.ones(array.shape[:2], dtype=bool)
        return cls(data=array, mask=np.array(mask, dtype=bool))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape[:2]

    @property
    def valid_count(self) -> int:
        return int(self.mask.sum())

    @property
    def values(self) -> np.ndarray:
        """Data without the channel axis for single-channel grids."""
        return self.data[..., 0] if self.channels == 1 else self.data

    def with_data(self, data: np.ndarray) -> "ImageGrid":
        return ImageGrid(data=np.array(data, dtype=float), mask=self.mask.copy())

    def with_mask(self, mask: np.ndarray) -> "ImageGrid":
        return ImageGrid(data=self.data.copy(), mask=np.array(mask, dtype=bool))

    def masked_mean(self) -> float:
        """Mean over valid pixels and all channels."""
        if not self.mask.any():
            return 0.0
        return float(self.data[self.mask].mean())


def check_same_shape(a: ImageGrid, b: ImageGrid):
    if a.shape != b.shape:
        raise DimensionMismatchError(f"Grid sizes differ: {a.width}x{a.height} and {b.width}x{b.height}")


def mask_intersection(a: ImageGrid, b: ImageGrid) -> ImageGrid:
    """
    Boolean grid valid where both inputs are valid.

    Parameters
    ----------
    a, b : ImageGrid
        Grids of equal size.

    Returns
    -------
    ImageGrid
        Single-channel grid holding 1 on the intersection, with the intersection as mask.

    Raises
    ------
    DimensionMismatchError
        If the grids differ in size.
    """
    check_same_shape(a, b)
    mask = a.mask & b.mask
    return ImageGrid(data=mask.astype(float), mask=mask)
