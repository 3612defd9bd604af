import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class CameraIntrinsics(BaseModel):
    """
    Pinhole intrinsics with a single focal length.

    Attributes
    ----------
    f : float
        Focal length in pixels.
    cx, cy : float
        Principal point in pixels.
    """

    model_config = ConfigDict(frozen=True)

    f: float = Field(gt=0)
    cx: float
    cy: float

    @property
    def principal_point(self) -> np.ndarray:
        return np.array([self.cx, self.cy])

    def scaled(self, scale: float) -> "CameraIntrinsics":
        """
        Intrinsics of an image resampled by ``scale`` with pixel centres kept aligned, so that
        ``c' = (c + 0.5) scale - 0.5``.
        """
        return CameraIntrinsics(
            f=self.f * scale, cx=(self.cx + 0.5) * scale - 0.5, cy=(self.cy + 0.5) * scale - 0.5
        )

    def contains_principal_point(self, width: int, height: int) -> bool:
        return 0 <= self.cx <= width - 1 and 0 <= self.cy <= height - 1

    @classmethod
    def from_focal_pair(cls, fx: float, fy: float, cx: float, cy: float) -> "CameraIntrinsics":
        """Builds intrinsics from per-axis focal lengths by averaging them."""
        return cls(f=0.5 * (fx + fy), cx=cx, cy=cy)
