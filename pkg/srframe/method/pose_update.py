"""
Gauss-Newton update of the frame poses with frozen depth, albedo, lighting and IRLS weights.
"""

import numpy as np
from loguru import logger
from pydantic import BaseModel

from ..geometry.warping import grid_warp_jacobian, warp
from ..models.camera import CameraIntrinsics
from ..models.config import SolverConfig
from ..models.image_grid import ImageGrid
from ..models.pose import TwistPose
from ..models.scene import SceneEstimate
from ..photometry.robust import RobustifierConfig, cauchy_value
from ..photometry.shading import shade
from ..preprocessing.sampling import bilinear_sample
from ..utils.const import GN_EIGEN_FLOOR, LEVENBERG_DAMPING
from ..utils.parallel import parallel_map
from .level_problem import LevelProblem


class PoseUpdateReport(BaseModel):
    """Outcome of the Gauss-Newton iterations of one frame."""

    frame: int
    start: list[float]
    iterations: int = 0
    step_norms: list[float] = []
    surrogate_before: float = 0.0
    surrogate_after: float = 0.0
    damped: bool = False


class PoseObjective:
    """
    Frozen-weight surrogate ``sum 1/2 w r^2`` of one frame as a function of its pose.

    The predicted image and the weights are fixed when the objective is built; only the warp moves. A
    pixel that was valid at the start pose and leaves the valid set keeps its starting cost, and a pixel
    that enters it costs its Cauchy value. A decrease of the objective then bounds a decrease of the
    frame's robust energy.
    """

    def __init__(
        self,
        frame: ImageGrid,
        depth: ImageGrid,
        intrinsics: CameraIntrinsics,
        predicted: ImageGrid,
        pose: TwistPose,
        lam: float,
    ):
        self.frame = frame
        self.depth = depth
        self.intrinsics = intrinsics
        self.predicted = predicted
        self.lam = lam
        r, valid = self._sample(pose, with_gradient=False)
        self.weights = RobustifierConfig(lam=lam).weights(ImageGrid(data=r, mask=valid))
        self._start_valid = valid
        self._start_cost = 0.5 * (self.weights * np.where(valid[..., None], r, 0.0) ** 2).sum(axis=-1)

    def _sample(self, pose: TwistPose, with_gradient: bool):
        pixels, valid = warp(self.depth, pose, self.intrinsics)
        sampled = bilinear_sample(self.frame, pixels[..., 0], pixels[..., 1], with_gradient=with_gradient)
        valid = valid & sampled[1] & self.predicted.mask
        return (sampled[0] - self.predicted.data, valid) + tuple(sampled[2:])

    def value(self, pose: TwistPose) -> float:
        r, valid = self._sample(pose, with_gradient=False)
        dropped = self._start_valid & ~valid
        entered = valid & ~self._start_valid
        value = 0.5 * (self.weights[valid] * r[valid] ** 2).sum() + self._start_cost[dropped].sum()
        return float(value + cauchy_value(r[entered], self.lam).sum())

    def linearize(self, pose: TwistPose) -> tuple[np.ndarray, np.ndarray]:
        """Gauss-Newton matrix ``sum w J^T J`` and gradient ``sum w J^T r`` at ``pose``."""
        r, valid, image_gradient = self._sample(pose, with_gradient=True)
        jacobian = image_gradient[valid] @ grid_warp_jacobian(self.depth, pose, self.intrinsics)[valid]
        w = self.weights[valid]
        hessian = np.einsum("nc,nci,ncj->ij", w, jacobian, jacobian)
        gradient = np.einsum("nc,nci,nc->i", w, jacobian, r[valid])
        return hessian, gradient

    def motion(self, pose: TwistPose) -> np.ndarray:
        """
        Matrix ``M`` such that ``sqrt(delta^T M delta)`` is the RMS pixel displacement a twist step
        ``delta`` predicts over the pixels valid at ``pose``.
        """
        _, valid = self._sample(pose, with_gradient=False)
        if not valid.any():
            return np.zeros((6, 6))
        jacobian = grid_warp_jacobian(self.depth, pose, self.intrinsics)[valid]
        return np.einsum("nki,nkj->ij", jacobian, jacobian) / len(jacobian)


def gauss_newton_step(hessian: np.ndarray, gradient: np.ndarray) -> np.ndarray:
    """
    Solves ``H delta = -g`` on the Jacobi-scaled system.

    The system is first scaled to a unit diagonal.
    Directions whose scaled curvature is below ``GN_EIGEN_FLOOR`` times the largest one are not
    observed by the frame and get no step.
    """
    scale = np.sqrt(np.clip(np.diag(hessian), 0.0, None))
    scale[scale == 0] = 1.0
    scaled = hessian / np.outer(scale, scale)
    eigenvalues, vectors = np.linalg.eigh(scaled)
    keep = eigenvalues > GN_EIGEN_FLOOR * max(eigenvalues.max(), 0.0)
    if not keep.any():
        return np.zeros(6)
    basis = vectors[:, keep]
    return -(basis @ ((basis.T @ (gradient / scale)) / eigenvalues[keep])) / scale


def gauss_newton(
    objective: PoseObjective, pose: TwistPose, config: SolverConfig, frame: int
) -> tuple[TwistPose, PoseUpdateReport]:
    """
    Minimizes a pose objective with safeguarded Gauss-Newton steps ``exp(delta) o pose``.

    A step predicting more than ``config.gn_max_motion`` pixels of RMS displacement is shortened to
    that length. A step that increases the objective is halved up to ``config.gn_max_halvings`` times;
    if none of the halved steps is accepted the iteration stops. A rank-deficient 6x6 system gets a
    small Levenberg term.
    """
    report = PoseUpdateReport(frame=frame, start=pose.to_list())
    current = objective.value(pose)
    report.surrogate_before = current
    for _ in range(config.gn_max_iter):
        hessian, gradient = objective.linearize(pose)
        if not (np.isfinite(hessian).all() and np.isfinite(gradient).all()):
            logger.warning(f"Frame {frame}: non-finite Gauss-Newton system, pose kept")
            break
        if np.linalg.matrix_rank(hessian) < 6:
            hessian = hessian + LEVENBERG_DAMPING * np.eye(6)
            if not report.damped:
                logger.warning(f"Frame {frame}: rank-deficient pose system, Levenberg damping added")
            report.damped = True
        step = gauss_newton_step(hessian, gradient)
        displacement = float(np.sqrt(max(step @ objective.motion(pose) @ step, 0.0)))
        if displacement > config.gn_max_motion:
            step = step * (config.gn_max_motion / displacement)
        report.iterations += 1

        accepted = None
        for _ in range(config.gn_max_halvings + 1):
            candidate = pose.left_update(step)
            value = objective.value(candidate)
            if value <= current:
                accepted = candidate
                break
            step = 0.5 * step
        if accepted is None:
            logger.debug(f"Frame {frame}: no descent step after {config.gn_max_halvings} halvings")
            break

        pose, current = accepted, value
        norm = float(np.linalg.norm(step))
        report.step_norms.append(norm)
        if norm < config.gn_step_tol:
            break
    report.surrogate_after = current
    logger.debug(f"Frame {frame}: {report.iterations} GN iterations, steps {report.step_norms}")
    return pose, report


def update_poses(
    problem: LevelProblem, state: SceneEstimate, config: SolverConfig, chain: bool = False
) -> tuple[list[TwistPose], list[PoseUpdateReport]]:
    """
    Updates the pose of every frame but the reference.

    Parameters
    ----------
    problem : LevelProblem
        Level data.
    state : SceneEstimate
        Entry state; depth, albedo and lighting stay frozen. The IRLS weights of a frame are taken
        from its residual at the pose it starts from.
    config : SolverConfig
    chain : bool
        Start frame ``i + 1`` from the converged pose of frame ``i``; frames are then processed in
        order instead of in parallel.

    Returns
    -------
    poses : list[TwistPose]
        New poses, ``poses[0]`` untouched.
    reports : list[PoseUpdateReport]
        One per updated frame.
    """

    def solve(index: int, start: TwistPose) -> tuple[TwistPose, PoseUpdateReport]:
        predicted = shade(state.depth, problem.intrinsics, state.albedo, state.lighting[index])
        objective = PoseObjective(
            problem.frames[index], state.depth, problem.intrinsics, predicted, start, config.lam
        )
        return gauss_newton(objective, start, config, index)

    poses = [state.poses[0]]
    reports = []
    if chain:
        for index in range(1, state.n_frames):
            start = state.poses[index] if index == 1 else poses[-1]
            pose, report = solve(index, start)
            poses.append(pose)
            reports.append(report)
    else:
        results = parallel_map(
            lambda index: solve(index, state.poses[index]), range(1, state.n_frames), config.n_jobs
        )
        for pose, report in results:
            poses.append(pose)
            reports.append(report)
    return poses, reports
