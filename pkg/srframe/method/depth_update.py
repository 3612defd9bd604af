"""
Linear least-squares update of the reference depth.

With the warp and the area element frozen at the current depth, the unnormalized normal is the only
quantity depending on the unknown depth and it does so linearly. The photometric residual of frame
``i`` at pixel ``p`` and channel ``c`` is then

``r = I~_ic - rho_c l_i0 - (rho_c / dA) (B_i z)_p``, with
``B_i = diag(f l_i1 - (x - cx) l_i3) Gx + diag(f l_i2 - (y - cy) l_i3) Gy - l_i3 Id``,

and the depth minimizes ``sum 1/2 w r^2 + tau |D z - z0|^2``.
"""

from typing import Callable

import numpy as np
import scipy.sparse as sp
from loguru import logger
from pydantic import BaseModel
from scipy.sparse.linalg import LinearOperator, cg

from ..geometry.normals import gradient_operators, normals_from_depth, pixel_grid
from ..models.config import SolverConfig
from ..models.image_grid import ImageGrid
from ..models.scene import SceneEstimate
from ..utils.errors import SolverError
from .level_problem import LevelProblem


class DepthUpdateReport(BaseModel):
    cg_iterations: int = 0
    cg_info: int = 0
    surrogate_before: float = 0.0
    surrogate_after: float = 0.0
    nonpositive: int = 0
    # fraction of the solved step that was applied
    step_fraction: float = 1.0
    energy_before: float = float("nan")
    energy_after: float = float("nan")


class DepthSystem:
    """
    Frozen-weight depth objective over the working-mask pixels, in row-major order.

    Attributes
    ----------
    operators : list[sp.csr_matrix]
        ``B_i`` per frame.
    coefficients : list[np.ndarray]
        ``rho_c / dA`` per frame, shape ``(N, C)``; 0 where the pixel has no usable normal.
    targets : list[np.ndarray]
        ``I~_ic - rho_c l_i0``, shape ``(N, C)``.
    weights : list[np.ndarray]
        Frozen IRLS weights, shape ``(N, C)``.
    """

    def __init__(
        self,
        problem: LevelProblem,
        state: SceneEstimate,
        warped: list[ImageGrid],
        weights: list[np.ndarray],
    ):
        mask = problem.mask
        intrinsics = problem.intrinsics
        self.problem = problem
        self.mask = mask

        gx, gy = gradient_operators(mask)
        xs, ys = pixel_grid(*mask.shape)
        dx = xs[mask] - intrinsics.cx
        dy = ys[mask] - intrinsics.cy
        identity = sp.identity(int(mask.sum()), format="csr")

        normals = normals_from_depth(state.depth.with_mask(mask), intrinsics)
        usable = normals.mask[mask]
        area = np.where(usable, normals.area[mask], 1.0)
        albedo = state.albedo.data[mask]
        ratio = np.where(usable[:, None], albedo / area[:, None], 0.0)

        self.operators = []
        self.coefficients = []
        self.targets = []
        self.weights = []
        for index, lighting in enumerate(state.lighting):
            alpha_x = intrinsics.f * lighting[1] - dx * lighting[3]
            alpha_y = intrinsics.f * lighting[2] - dy * lighting[3]
            operator = sp.diags(alpha_x) @ gx + sp.diags(alpha_y) @ gy - lighting[3] * identity
            self.operators.append(operator.tocsr())
            self.coefficients.append(ratio)
            self.targets.append(warped[index].data[mask] - albedo * lighting[0])
            frame_weights = np.where(warped[index].mask[mask][:, None], weights[index][mask], 0.0)
            self.weights.append(np.where(usable[:, None], frame_weights, 0.0))

    def objective(self, z: np.ndarray) -> float:
        energy = 0.0
        for operator, ratio, target, w in zip(self.operators, self.coefficients, self.targets, self.weights):
            r = target - ratio * (operator @ z)[:, None]
            energy += 0.5 * float((w * r**2).sum())
        prior = self.problem.prior_matrix @ z - self.problem.prior_target
        return energy + self.problem.tau * float(prior @ prior)

    def normal_equations(self) -> tuple[sp.csr_matrix, np.ndarray]:
        """``A = sum B^T diag(beta) B + 2 tau D^T D`` and ``b = sum B^T g + 2 tau D^T z0``."""
        prior = self.problem.prior_matrix
        tau = self.problem.tau
        matrix = 2 * tau * (prior.T @ prior)
        rhs = 2 * tau * (prior.T @ self.problem.prior_target)
        for operator, ratio, target, w in zip(self.operators, self.coefficients, self.targets, self.weights):
            beta = (w * ratio**2).sum(axis=1)
            g = (w * ratio * target).sum(axis=1)
            matrix = matrix + operator.T @ sp.diags(beta) @ operator
            rhs = rhs + operator.T @ g
        return sp.csr_matrix(matrix), np.asarray(rhs).reshape(-1)


def _depth_grid(problem: LevelProblem, z: np.ndarray) -> ImageGrid:
    data = np.zeros(problem.shape)
    data[problem.mask] = z
    return ImageGrid(data=data, mask=problem.mask)


def update_depth(
    problem: LevelProblem,
    state: SceneEstimate,
    warped: list[ImageGrid],
    weights: list[np.ndarray],
    config: SolverConfig,
    energy: Callable[[ImageGrid], float] | None = None,
) -> tuple[ImageGrid, DepthUpdateReport]:
    """
    Solves the depth block by conjugate gradients on its normal equations.

    Parameters
    ----------
    problem : LevelProblem
        Level data, including the prior and its weight.
    state : SceneEstimate
        Entry state; its depth fixes the area element and is the CG starting point.
    warped : list[ImageGrid]
        Frames sampled at the warp of the entry depth and the current poses.
    weights : list[np.ndarray]
        IRLS weights per frame, shape ``(H, W, C)``.
    config : SolverConfig
    energy : Callable[[ImageGrid], float] | None
        Energy of a candidate depth with the area element and the warp recomputed. When given, the
        solved step is halved up to ``config.depth_max_halvings`` times until this energy does not
        increase, and the entry depth is kept if no fraction of the step qualifies.

    Returns
    -------
    depth : ImageGrid
        New depth on the working mask; pixels that came out non-positive keep their previous value.
    report : DepthUpdateReport

    Raises
    ------
    SolverError
        If the normal equations hold non-finite entries.
    """
    system = DepthSystem(problem, state, warped, weights)
    matrix, rhs = system.normal_equations()
    if not (np.isfinite(matrix.data).all() and np.isfinite(rhs).all()):
        raise SolverError(f"Non-finite depth system at level {problem.index}")

    z_previous = state.depth.values[problem.mask]
    diagonal = matrix.diagonal()
    inverse_diagonal = np.where(diagonal > 0, 1.0 / np.where(diagonal > 0, diagonal, 1.0), 1.0)
    preconditioner = LinearOperator(matrix.shape, matvec=lambda v: inverse_diagonal * v)

    report = DepthUpdateReport(surrogate_before=system.objective(z_previous))

    def count(_):
        report.cg_iterations += 1

    z, info = cg(
        matrix,
        rhs,
        x0=z_previous,
        rtol=config.cg_rtol,
        maxiter=config.cg_max_iter,
        M=preconditioner,
        callback=count,
    )
    report.cg_info = int(info)
    if info > 0:
        logger.warning(f"Depth solve stopped after {info} iterations without reaching rtol={config.cg_rtol}")
    if not np.isfinite(z).all():
        raise SolverError(f"Depth solve diverged at level {problem.index}")

    nonpositive = ~(z > 0)
    if nonpositive.any():
        report.nonpositive = int(nonpositive.sum())
        logger.warning(f"{report.nonpositive} depth values came out non-positive and were kept")
        z = np.where(nonpositive, z_previous, z)

    if energy is not None:
        z = _backtrack(problem, z_previous, z, energy, config.depth_max_halvings, report)

    report.surrogate_after = system.objective(z)
    logger.debug(
        f"Depth: {report.cg_iterations} CG iterations, step fraction {report.step_fraction:g}, surrogate"
        f" {report.surrogate_before:.6g} -> {report.surrogate_after:.6g}"
    )
    return _depth_grid(problem, z), report


def _backtrack(
    problem: LevelProblem,
    z_previous: np.ndarray,
    z: np.ndarray,
    energy: Callable[[ImageGrid], float],
    max_halvings: int,
    report: DepthUpdateReport,
) -> np.ndarray:
    # positive endpoints keep every point of the segment positive
    report.energy_before = energy(_depth_grid(problem, z_previous))
    step = z - z_previous
    for halving in range(max_halvings + 1):
        fraction = 0.5**halving
        candidate = z_previous + fraction * step
        value = energy(_depth_grid(problem, candidate))
        if value <= report.energy_before:
            report.step_fraction = fraction
            report.energy_after = value
            return candidate
    logger.debug(f"Depth step raises the energy after {max_halvings} halvings, depth kept")
    report.step_fraction = 0.0
    report.energy_after = report.energy_before
    return z_previous
