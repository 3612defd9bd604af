import numpy as np
from loguru import logger
from pydantic import BaseModel

from ..geometry.normals import normals_from_depth
from ..models.image_grid import ImageGrid
from ..models.scene import SceneEstimate
from ..photometry.shading import sh_basis
from ..utils.const import SH_ORDER1_SIZE, TIKHONOV_DAMPING
from ..utils.parallel import parallel_map


class LightingUpdateReport(BaseModel):
    frame: int
    rank: int
    damped: bool = False


def lighting_normal_equations(
    basis: np.ndarray, albedo: np.ndarray, target: np.ndarray, weights: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """
    Normal equations of ``min sum w_c (I_c - rho_c <m, l>)^2`` over pixels and channels.

    Parameters
    ----------
    basis : np.ndarray
        ``m(n)`` per pixel, shape ``(N, 4)``.
    albedo, target, weights : np.ndarray
        Shape ``(N, C)``.
    """
    regressors = albedo[..., None] * basis[:, None, :]
    matrix = np.einsum("nc,nci,ncj->ij", weights, regressors, regressors)
    rhs = np.einsum("nc,nci,nc->i", weights, regressors, target)
    return matrix, rhs


def update_lighting(
    state: SceneEstimate, warped: list[ImageGrid], weights: list[np.ndarray], n_jobs: int = 1
) -> tuple[np.ndarray, list[LightingUpdateReport]]:
    """
    Weighted least-squares lighting of every frame, each solved on its own 4x4 system.

    Systems of rank below 4, as on planar scenes where all normals coincide, get a Tikhonov term of
    ``1e-9``.

    Returns
    -------
    lighting : np.ndarray
        Shape ``(n, 4)``.
    reports : list[LightingUpdateReport]
    """
    normals = normals_from_depth(state.depth, state.intrinsics)
    mask = normals.mask & state.albedo.mask
    basis = sh_basis(normals.normals[mask])
    albedo = state.albedo.data[mask]

    def solve(index: int) -> tuple[np.ndarray, LightingUpdateReport]:
        frame_weights = np.where(warped[index].mask[mask][:, None], weights[index][mask], 0.0)
        matrix, rhs = lighting_normal_equations(basis, albedo, warped[index].data[mask], frame_weights)
        rank = int(np.linalg.matrix_rank(matrix))
        report = LightingUpdateReport(frame=index, rank=rank)
        if rank == 0:
            logger.warning(f"Frame {index}: no valid pixel, lighting kept")
            return np.array(state.lighting[index]), report
        if rank < SH_ORDER1_SIZE:
            logger.warning(f"Frame {index}: lighting system has rank {rank}, Tikhonov damping added")
            matrix = matrix + TIKHONOV_DAMPING * np.eye(SH_ORDER1_SIZE)
            report.damped = True
        return np.linalg.solve(matrix, rhs), report

    results = parallel_map(solve, range(state.n_frames), n_jobs)
    return np.array([lighting for lighting, _ in results]), [report for _, report in results]
