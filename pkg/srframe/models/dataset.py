from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, InstanceOf, field_validator, model_validator

from ..preprocessing.sampling import infer_scale_factor
from .camera import CameraIntrinsics
from .image_grid import ImageGrid
from .pose import TwistPose


class GroundTruth(BaseModel):
    """
    Reference solution shipped with synthetic datasets.

    Attributes
    ----------
    depth : ImageGrid
        HR depth of the reference frame.
    albedo : ImageGrid
        HR RGB albedo.
    poses : list[TwistPose]
        Frame poses, reference first.
    lighting : np.ndarray
        Shape ``(n, 4)``.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    depth: ImageGrid
    albedo: ImageGrid | None = None
    poses: list[TwistPose] | None = None
    lighting: InstanceOf[np.ndarray] | None = None

    @field_validator("lighting", mode="before")
    @classmethod
    def validate_lighting(cls, lighting):
        if lighting is None:
            return None
        lighting = np.array(lighting, dtype=float).reshape(-1, 4)
        lighting.setflags(write=False)
        return lighting


class Dataset(BaseModel):
    """
    In-memory input of the solver.

    Attributes
    ----------
    frames : list[ImageGrid]
        RGB frames of equal size with values in [0, 1]; frame 0 is the reference.
    depth_lr : ImageGrid
        Low-resolution reference depth, zero depth being invalid.
    mask : np.ndarray
        HR region of interest in the reference frame.
    intrinsics : CameraIntrinsics
        HR intrinsics.
    ground_truth : GroundTruth, optional

    Methods
    -------
    subset(n) -> Dataset
        First ``n`` frames.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    frames: list[ImageGrid] = Field(min_length=1)
    depth_lr: ImageGrid
    mask: InstanceOf[np.ndarray]
    intrinsics: CameraIntrinsics
    ground_truth: GroundTruth | None = None

    @field_validator("mask", mode="before")
    @classmethod
    def validate_mask(cls, mask):
        mask = np.array(mask, dtype=bool)
        assert mask.ndim == 2, "Mask should be 2-D"
        mask.setflags(write=False)
        return mask

    @model_validator(mode="after")
    def validate_model(self):
        shape = self.frames[0].shape
        assert all(frame.shape == shape for frame in self.frames), "Frames should share one size"
        assert self.mask.shape == shape, "Mask and frame sizes don't match"
        assert self.depth_lr.channels == 1, "LR depth should have a single channel"
        infer_scale_factor(shape, self.depth_lr.shape)
        return self

    @property
    def n_frames(self) -> int:
        return len(self.frames)

    @property
    def shape(self) -> tuple[int, int]:
        return self.frames[0].shape

    @property
    def scale_factor(self) -> int:
        return infer_scale_factor(self.shape, self.depth_lr.shape)

    @property
    def reference(self) -> ImageGrid:
        """Frame 0 restricted to the region of interest."""
        return self.frames[0].with_mask(self.frames[0].mask & self.mask)

    def subset(self, n: int) -> "Dataset":
        if n > self.n_frames:
            raise ValueError(f"Dataset has {self.n_frames} frames, {n} requested")
        ground_truth = self.ground_truth
        if ground_truth is not None and ground_truth.poses is not None:
            ground_truth = GroundTruth(
                depth=ground_truth.depth,
                albedo=ground_truth.albedo,
                poses=ground_truth.poses[:n],
                lighting=None if ground_truth.lighting is None else ground_truth.lighting[:n],
            )
        return Dataset(
            frames=self.frames[:n],
            depth_lr=self.depth_lr,
            mask=self.mask,
            intrinsics=self.intrinsics,
            ground_truth=ground_truth,
        )


class DatasetManifest(BaseModel):
    """
    Locations and camera parameters of an on-disk dataset.

    Attributes
    ----------
    rgb : list[Path]
        Frame files, reference first.
    depth_lr : Path
        LR reference depth, PFM or 16-bit PNG.
    mask : Path, optional
        8-bit mask PNG, nonzero meaning valid; everything is valid when absent.
    f, cx, cy : float
        HR intrinsics.
    depth_scale : float
        Factor turning 16-bit PNG depth counts into depth units.
    gt_depth, gt_albedo, gt_poses, gt_lighting : Path, optional
        Ground truth files.
    """

    model_config = ConfigDict(frozen=True)

    rgb: list[Path] = Field(min_length=1)
    depth_lr: Path
    mask: Path | None = None
    f: float = Field(gt=0)
    cx: float
    cy: float
    depth_scale: float = Field(default=1.0, gt=0)
    gt_depth: Path | None = None
    gt_albedo: Path | None = None
    gt_poses: Path | None = None
    gt_lighting: Path | None = None

    @property
    def intrinsics(self) -> CameraIntrinsics:
        return CameraIntrinsics(f=self.f, cx=self.cx, cy=self.cy)

    @property
    def has_ground_truth(self) -> bool:
        return self.gt_depth is not None
