import numpy as np
from pydantic import BaseModel, ConfigDict, InstanceOf, field_validator

from ..utils.const import DEFAULT_LIGHTING, SH_ORDER1_SIZE


class LightingVector(BaseModel):
    """
    First-order spherical-harmonic lighting of one frame, shared by the colour channels.

    Attributes
    ----------
    l : np.ndarray
        ``(ambient, l_x, l_y, l_z)``. No normalization is imposed.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    l: InstanceOf[np.ndarray]

    @field_validator("l", mode="before")
    @classmethod
    def validate_l(cls, l):
        l = np.array(l, dtype=float).reshape(-1)
        assert l.shape == (SH_ORDER1_SIZE,), f"Lighting should have {SH_ORDER1_SIZE} coefficients"
        assert np.isfinite(l).all(), "Lighting should be finite"
        l.setflags(write=False)
        return l

    @classmethod
    def frontal(cls) -> "LightingVector":
        """Little ambient light plus a light facing the scene from the camera."""
        return cls(l=DEFAULT_LIGHTING)

    def to_list(self) -> list[float]:
        return [float(value) for value in self.l]


def as_lighting_array(lighting: "LightingVector | np.ndarray") -> np.ndarray:
    if isinstance(lighting, LightingVector):
        return np.array(lighting.l)
    return LightingVector(l=lighting).l.copy()
