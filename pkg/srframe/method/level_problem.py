"""
Per-level data of the coarse-to-fine solve: frames, working mask, depth prior and its weight.
"""

import numpy as np
import scipy.sparse as sp
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, InstanceOf, PrivateAttr

from ..models.camera import CameraIntrinsics
from ..models.dataset import Dataset
from ..models.image_grid import ImageGrid
from ..preprocessing.pyramid import build_pyramid, downsample_area
from ..preprocessing.sampling import DownsampleOperator, bilinear_resize
from ..utils.const import MIN_LEVEL_PIXELS, RGB_CHANNELS
from ..utils.errors import DegenerateConfigurationError, EmptyMaskError


class TauNormalizer(BaseModel):
    """
    Turns the unitless prior weight into the weight of the energy.

    ``tau = n * mean(I)^2 * |Omega_HR| * |C| / (mean(z0)^2 * |Omega_LR|) * tau_tilde`` balances the
    photometric term, which grows with the frame count, the pixel count and the squared intensity
    unit, against the prior term, which grows with the LR pixel count and the squared depth unit.

    Attributes
    ----------
    tau_tilde : float
        Unitless weight.
    """

    model_config = ConfigDict(frozen=True)

    tau_tilde: float = Field(gt=0)

    def normalize(
        self, frames: list[ImageGrid], mask: np.ndarray, depth_lr: np.ndarray, channels: int = RGB_CHANNELS
    ) -> float:
        """
        Parameters
        ----------
        frames : list[ImageGrid]
            Frames of the level; intensities are averaged over ``mask``.
        mask : np.ndarray
            HR working mask.
        depth_lr : np.ndarray
            LR depths entering the prior.
        channels : int
            Colour channel count.

        Raises
        ------
        DegenerateConfigurationError
            If either domain is empty or the mean intensity or depth vanishes.
        """
        hr_count = int(np.count_nonzero(mask))
        lr_count = int(np.size(depth_lr))
        if hr_count == 0 or lr_count == 0:
            raise DegenerateConfigurationError("Depth prior needs nonempty HR and LR domains")
        mean_intensity = float(np.mean([frame.data[mask].mean() for frame in frames]))
        mean_depth = float(np.mean(depth_lr))
        if mean_intensity == 0 or mean_depth == 0:
            raise DegenerateConfigurationError("Mean intensity and mean depth should be nonzero")
        n = len(frames)
        return n * mean_intensity**2 * hr_count * channels / (mean_depth**2 * lr_count) * self.tau_tilde


class LevelProblem(BaseModel):
    """
    Everything the sweep needs at one pyramid level.

    Attributes
    ----------
    index : int
        Level index, 0 being the coarsest.
    intrinsics : CameraIntrinsics
        Intrinsics scaled to the level.
    frames : list[ImageGrid]
        Area-averaged frames; frame 0 carries the region of interest as mask.
    mask : np.ndarray
        Working mask: region of interest where the resampled LR depth is valid and positive.
    depth_lr : ImageGrid
        LR reference depth at this level.
    depth_init : ImageGrid
        LR depth bilinearly resampled to the level grid, restricted to ``mask``.
    downsample : DownsampleOperator
        ``D`` over the working mask.
    tau : float
        Normalized prior weight.

    Only LR pixels whose whole block lies in the working mask carry a prior term, so the block means of
    a depth map agree with the LR depth it was reduced to.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    index: int = Field(ge=0)
    intrinsics: CameraIntrinsics
    frames: list[ImageGrid]
    mask: InstanceOf[np.ndarray]
    depth_lr: ImageGrid
    depth_init: ImageGrid
    downsample: DownsampleOperator
    tau: float = Field(ge=0)

    _prior_rows: np.ndarray = PrivateAttr()
    _prior_matrix: sp.csr_matrix = PrivateAttr()

    def model_post_init(self, __context) -> None:
        rows = prior_mask(self.downsample, self.depth_lr).reshape(-1)
        columns = self.mask.reshape(-1)
        self._prior_rows = rows
        self._prior_matrix = self.downsample.matrix[rows][:, columns].tocsr()

    @property
    def shape(self) -> tuple[int, int]:
        return self.mask.shape

    @property
    def n_frames(self) -> int:
        return len(self.frames)

    @property
    def prior_matrix(self) -> sp.csr_matrix:
        """``D`` restricted to prior rows and working-mask columns."""
        return self._prior_matrix

    @property
    def prior_target(self) -> np.ndarray:
        """LR depths of the prior rows."""
        return self.depth_lr.values.reshape(-1)[self._prior_rows]

    def prior_energy(self, depth: ImageGrid) -> float:
        """``tau * |D z - z0|^2`` over the prior rows."""
        z = depth.values[self.mask]
        difference = self._prior_matrix @ z - self.prior_target
        return float(self.tau * difference @ difference)


def prior_mask(downsample: DownsampleOperator, depth_lr: ImageGrid) -> np.ndarray:
    """LR pixels entering the prior: full blocks, or every covered block when no block is full."""
    full = downsample.full_mask & depth_lr.mask
    if full.any():
        return full
    return downsample.lr_mask & depth_lr.mask


def _mask_pyramid(mask: np.ndarray, levels: int) -> list[np.ndarray]:
    grids = [ImageGrid(data=mask.astype(float), mask=mask)]
    for _ in range(levels - 1):
        grids.append(downsample_area(grids[-1]))
    return [grid.mask for grid in grids[::-1]]


def build_levels(dataset: Dataset, levels: int, tau_tilde: float) -> list[LevelProblem]:
    """
    Builds the level problems of a dataset, coarsest first.

    Frames and the LR depth are reduced by 2x2 area averaging, so the LR grid of level ``k`` is the
    ceiling-divided HR grid of that level. The prior weight is normalized per level. Coarse levels whose
    working mask keeps fewer than ``MIN_LEVEL_PIXELS`` pixels are dropped with a warning, so fewer than
    ``levels`` problems may come back.

    Raises
    ------
    EmptyMaskError
        If the working mask of the full-resolution level is empty.
    """
    for effective in range(levels, 0, -1):
        try:
            return _build_levels(dataset, effective, tau_tilde)
        except EmptyMaskError as error:
            if effective == 1:
                raise
            logger.warning(f"{error}; solving with {effective - 1} levels instead of {effective}")


def _build_levels(dataset: Dataset, levels: int, tau_tilde: float) -> list[LevelProblem]:
    intrinsics = dataset.intrinsics
    frame_pyramids = [build_pyramid(frame, intrinsics, levels) for frame in dataset.frames]
    lr_levels = [level.image for level in build_pyramid(dataset.depth_lr, intrinsics, levels)]
    masks = _mask_pyramid(dataset.mask, levels)
    normalizer = TauNormalizer(tau_tilde=tau_tilde)
    scale_factor = dataset.scale_factor

    problems = []
    for index in range(levels):
        frames = [pyramid[index].image for pyramid in frame_pyramids]
        height, width = frames[0].shape
        depth_lr = lr_levels[index]
        resampled = bilinear_resize(depth_lr, height, width)
        mask = masks[index] & resampled.mask & (resampled.values > 0)
        count = int(mask.sum())
        if count < (1 if index == levels - 1 else MIN_LEVEL_PIXELS):
            raise EmptyMaskError(f"Working mask of level {index} ({width}x{height}) keeps {count} pixels")

        frames[0] = frames[0].with_mask(frames[0].mask & mask)
        downsample = DownsampleOperator(scale_factor=scale_factor, hr_mask=mask)
        prior_depths = depth_lr.values[prior_mask(downsample, depth_lr)]
        tau = normalizer.normalize(frames, mask, prior_depths)
        logger.debug(f"Level {index}: {width}x{height}, {count} pixels, tau={tau:.6g}")
        problems.append(
            LevelProblem(
                index=index,
                intrinsics=frame_pyramids[0][index].intrinsics,
                frames=frames,
                mask=mask,
                depth_lr=depth_lr,
                depth_init=resampled.with_mask(mask),
                downsample=downsample,
                tau=tau,
            )
        )
    return problems
