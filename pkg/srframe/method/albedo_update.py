import numpy as np
from loguru import logger
from pydantic import BaseModel

from ..geometry.normals import normals_from_depth
from ..models.image_grid import ImageGrid
from ..models.scene import SceneEstimate
from ..photometry.shading import shading_field
from ..utils.const import EPS_ALBEDO


class AlbedoUpdateReport(BaseModel):
    flagged: int = 0
    negative: int = 0


def update_albedo(
    state: SceneEstimate, warped: list[ImageGrid], weights: list[np.ndarray]
) -> tuple[ImageGrid, AlbedoUpdateReport]:
    """
    Closed-form albedo ``rho_c = sum_i w_ic s_i I~_ic / sum_i w_ic s_i^2`` per pixel and channel.

    ``s_i`` is the shading of the state's depth under lighting ``l_i``. Where the denominator is below
    ``1e-12`` the previous albedo is kept and the pixel is counted as flagged. Negative albedo is
    allowed and only reported.

    Parameters
    ----------
    state : SceneEstimate
        Entry state with the freshly updated depth.
    warped : list[ImageGrid]
        Frames sampled at the warp of that depth.
    weights : list[np.ndarray]
        IRLS weights per frame, shape ``(H, W, C)``.
    """
    normals = normals_from_depth(state.depth, state.intrinsics)
    numerator = np.zeros(state.albedo.data.shape)
    denominator = np.zeros(state.albedo.data.shape)
    for index, lighting in enumerate(state.lighting):
        shading = shading_field(normals, lighting)[..., None]
        w = np.where((warped[index].mask & normals.mask)[..., None], weights[index], 0.0)
        numerator += w * shading * warped[index].data
        denominator += w * shading**2

    solvable = denominator >= EPS_ALBEDO
    albedo = np.where(solvable, numerator / np.where(solvable, denominator, 1.0), state.albedo.data)

    mask = state.albedo.mask
    report = AlbedoUpdateReport(
        flagged=int((~solvable.all(axis=-1) & mask).sum()),
        negative=int(((albedo < 0).any(axis=-1) & mask).sum()),
    )
    if report.flagged:
        logger.debug(f"{report.flagged} albedo pixels kept their previous value")
    if report.negative:
        logger.warning(f"{report.negative} pixels have a negative albedo")
    return ImageGrid(data=albedo, mask=mask), report
