import dill as pickle
import numpy as np
from pydantic import BaseModel, ConfigDict, InstanceOf, field_validator, model_validator

from .camera import CameraIntrinsics
from .image_grid import ImageGrid
from .lighting import LightingVector
from .pose import TwistPose


class SceneEstimate(BaseModel):
    """
    Unknowns of the reconstruction at one resolution.

    Attributes
    ----------
    depth : ImageGrid
        Reference-frame depth, positive on its mask.
    albedo : ImageGrid
        RGB reflectance on the same grid.
    lighting : np.ndarray
        Shape ``(n, 4)``; row ``i`` is the lighting of frame ``i``.
    poses : list[TwistPose]
        Motion from the reference camera to camera ``i``; ``poses[0]`` is the identity.
    intrinsics : CameraIntrinsics
        Camera of the grid.

    Methods
    -------
    replace(**changes) -> SceneEstimate
        Validated copy with some fields replaced.
    from_pickle(file_path) -> SceneEstimate
    to_pickle(file_path)
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    depth: ImageGrid
    albedo: ImageGrid
    lighting: InstanceOf[np.ndarray]
    poses: list[TwistPose]
    intrinsics: CameraIntrinsics

    @field_validator("lighting", mode="before")
    @classmethod
    def validate_lighting(cls, lighting):
        lighting = np.array(
            [row.l if isinstance(row, LightingVector) else row for row in lighting], dtype=float
        ).reshape(-1, 4)
        assert np.isfinite(lighting).all(), "Lighting should be finite"
        lighting.setflags(write=False)
        return lighting

    @field_validator("poses")
    @classmethod
    def validate_poses(cls, poses):
        assert len(poses) > 0, "At least the reference pose is needed"
        assert poses[0].is_identity, "Reference pose should be the identity"
        return poses

    @model_validator(mode="after")
    def validate_model(self):
        assert len(self.poses) == len(self.lighting), "One lighting vector per pose is needed"
        assert self.depth.shape == self.albedo.shape, "Depth and albedo grids don't match"
        assert self.depth.channels == 1, "Depth should have a single channel"
        assert (self.depth.values[self.depth.mask] > 0).all(), "Depth should be positive on its mask"
        return self

    @property
    def n_frames(self) -> int:
        return len(self.poses)

    @property
    def shape(self) -> tuple[int, int]:
        return self.depth.shape

    @property
    def lighting_vectors(self) -> list[LightingVector]:
        return [LightingVector(l=row) for row in self.lighting]

    def replace(self, **changes) -> "SceneEstimate":
        return SceneEstimate(**{**dict(self), **changes})

    @staticmethod
    def from_pickle(file_path: str) -> "SceneEstimate":
        """
        Loads an estimate saved with :meth:`to_pickle`.

        Parameters
        ----------
        file_path : str
            Path to the .pickle file.
        """
        with open(file_path, "rb") as f:
            return pickle.load(f)

    def to_pickle(self, file_path: str):
        with open(file_path, "wb") as f:
            pickle.dump(self, f)
