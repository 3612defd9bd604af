"""
Coarse-to-fine block-coordinate IRLS solver for depth, albedo, lighting and poses.
"""

import time

import numpy as np
from loguru import logger
from pydantic import BaseModel, PrivateAttr
from tqdm import tqdm

from ..models.config import SolverConfig
from ..models.dataset import Dataset
from ..models.image_grid import ImageGrid
from ..models.pose import TwistPose
from ..models.scene import SceneEstimate
from ..photometry.robust import RobustifierConfig, robust_energy
from ..photometry.shading import photometric_residual, shade, warp_image
from ..preprocessing.sampling import bilinear_upsample
from ..utils.const import DEFAULT_LIGHTING
from ..utils.errors import DegenerateConfigurationError, SolverDivergenceError, SolverError
from ..utils.parallel import parallel_map
from .albedo_update import update_albedo
from .base_method import BaseMethod
from .depth_update import update_depth
from .level_problem import LevelProblem, build_levels
from .lighting_update import update_lighting
from .pose_update import update_poses

MIN_FRAMES = 3


class SweepRecord(BaseModel):
    """
    Diagnostics of one sweep.

    Attributes
    ----------
    level : int
    sweep : int
    energy : float
        Robust energy including the depth prior after the sweep.
    surrogate : dict[str, list[float]]
        Frozen-weight objective of each block before and after its update.
    timings : dict[str, float]
        Seconds spent per block.
    gn_step_norms : list[list[float]]
        Accepted Gauss-Newton step norms per updated frame.
    energy_before : float
        Energy of the state the sweep started from.
    accepted : bool
        False when the sweep raised the energy and its result was discarded.
    converged : bool
        The sweep met the relative tolerance and ended its level.
    """

    level: int
    sweep: int
    energy: float = float("nan")
    energy_before: float = float("nan")
    accepted: bool = True
    converged: bool = False
    surrogate: dict[str, list[float]] = {}
    timings: dict[str, float] = {}
    gn_step_norms: list[list[float]] = []
    pose_starts: list[list[float]] = []
    pose_damped: int = 0
    lighting_damped: int = 0
    albedo_flagged: int = 0
    depth_nonpositive: int = 0
    depth_step_fraction: float = 1.0
    cg_iterations: int = 0


def warp_frames(problem: LevelProblem, state: SceneEstimate, n_jobs: int = 1) -> list[ImageGrid]:
    """Every frame sampled at the warp of the state's depth and poses."""
    return parallel_map(
        lambda index: warp_image(problem.frames[index], state.poses[index], state.depth, problem.intrinsics),
        range(state.n_frames),
        n_jobs,
    )


def frame_residuals(state: SceneEstimate, warped: list[ImageGrid]) -> list[ImageGrid]:
    return [
        photometric_residual(warped[index], shade(state.depth, state.intrinsics, state.albedo, lighting))
        for index, lighting in enumerate(state.lighting)
    ]


def level_energy(
    problem: LevelProblem, state: SceneEstimate, lam: float, warped: list[ImageGrid] | None = None
) -> float:
    """Robust photometric energy plus ``tau |D z - z0|^2``."""
    if warped is None:
        warped = warp_frames(problem, state)
    return robust_energy(frame_residuals(state, warped), lam) + problem.prior_energy(state.depth)


def initialize(problem: LevelProblem, n_frames: int) -> SceneEstimate:
    """
    Initial estimate at a level: resampled LR depth, the reference frame as albedo, a little ambient
    plus frontal lighting for every frame and identity poses.
    """
    return SceneEstimate(
        depth=problem.depth_init,
        albedo=problem.frames[0].with_mask(problem.mask),
        lighting=np.tile(DEFAULT_LIGHTING, (n_frames, 1)),
        poses=[TwistPose.identity() for _ in range(n_frames)],
        intrinsics=problem.intrinsics,
    )


def transfer(state: SceneEstimate, problem: LevelProblem) -> SceneEstimate:
    """
    Moves an estimate to the next finer level.

    Depth and albedo are bilinearly upsampled; working-mask pixels the upsampled estimate does not
    cover take the level's resampled LR depth and reference frame. Poses and lighting carry over.
    """
    height, width = problem.shape
    depth = bilinear_upsample(state.depth, height, width)
    albedo = bilinear_upsample(state.albedo, height, width)
    covered = depth.mask & albedo.mask & (depth.values > 0) & problem.mask
    depth_data = np.where(covered, depth.values, problem.depth_init.values)
    albedo_data = np.where(covered[..., None], albedo.data, problem.frames[0].data)
    return state.replace(
        depth=ImageGrid(data=depth_data, mask=problem.mask),
        albedo=ImageGrid(data=albedo_data, mask=problem.mask),
        intrinsics=problem.intrinsics,
    )


def sweep(
    problem: LevelProblem, state: SceneEstimate, config: SolverConfig, index: int = 0, chain: bool = False
) -> tuple[SceneEstimate, SweepRecord]:
    """
    One sweep: poses, depth, albedo, then lighting, with IRLS weights refreshed before every block.

    The depth step is shortened until the energy, with the area element and the warp recomputed, does not
    increase.

    Returns
    -------
    state : SceneEstimate
        Updated estimate.
    record : SweepRecord
        Diagnostics, including the energy after the sweep.
    """
    robustifier = RobustifierConfig(lam=config.lam)
    record = SweepRecord(level=problem.index, sweep=index)

    started = time.perf_counter()
    poses, pose_reports = update_poses(problem, state, config, chain=chain)
    state = state.replace(poses=poses)
    record.timings["pose"] = time.perf_counter() - started
    record.surrogate["pose"] = [
        sum(report.surrogate_before for report in pose_reports),
        sum(report.surrogate_after for report in pose_reports),
    ]
    record.gn_step_norms = [report.step_norms for report in pose_reports]
    record.pose_starts = [report.start for report in pose_reports]
    record.pose_damped = sum(report.damped for report in pose_reports)

    started = time.perf_counter()
    warped = warp_frames(problem, state, config.n_jobs)
    weights = [robustifier.weights(r) for r in frame_residuals(state, warped)]
    entry = state
    depth, depth_report = update_depth(
        problem,
        state,
        warped,
        weights,
        config,
        energy=lambda candidate: level_energy(problem, entry.replace(depth=candidate), config.lam),
    )
    state = state.replace(depth=depth)
    record.timings["depth"] = time.perf_counter() - started
    record.surrogate["depth"] = [depth_report.surrogate_before, depth_report.surrogate_after]
    record.cg_iterations = depth_report.cg_iterations
    record.depth_nonpositive = depth_report.nonpositive
    record.depth_step_fraction = depth_report.step_fraction

    started = time.perf_counter()
    warped = warp_frames(problem, state, config.n_jobs)
    residuals = frame_residuals(state, warped)
    weights = [robustifier.weights(r) for r in residuals]
    before = robust_energy(residuals, config.lam, weights)
    albedo, albedo_report = update_albedo(state, warped, weights)
    state = state.replace(albedo=albedo)
    residuals = frame_residuals(state, warped)
    record.timings["albedo"] = time.perf_counter() - started
    record.surrogate["albedo"] = [before, robust_energy(residuals, config.lam, weights)]
    record.albedo_flagged = albedo_report.flagged

    started = time.perf_counter()
    weights = [robustifier.weights(r) for r in residuals]
    before = robust_energy(residuals, config.lam, weights)
    lighting, lighting_reports = update_lighting(state, warped, weights, config.n_jobs)
    state = state.replace(lighting=lighting)
    residuals = frame_residuals(state, warped)
    record.timings["lighting"] = time.perf_counter() - started
    record.surrogate["lighting"] = [before, robust_energy(residuals, config.lam, weights)]
    record.lighting_damped = sum(report.damped for report in lighting_reports)

    record.energy = robust_energy(residuals, config.lam) + problem.prior_energy(state.depth)
    return state, record


class SuperResolution(BaseMethod):
    """
    Joint depth super-resolution and uncalibrated multi-view photometric stereo.

    Attributes
    ----------
    dataset : Dataset
        Frames, LR reference depth, mask and intrinsics.
    config : SolverConfig
        Solver parameters.

    Methods
    -------
    build_levels() -> list[LevelProblem]
        Pyramid of level problems, coarsest first.
    solve_level(problem, state, first_level=False) -> SceneEstimate
        Sweeps one level until the relative energy change drops below the tolerance.
    run() -> SceneEstimate
        Full coarse-to-fine solve.
    """

    config: SolverConfig = SolverConfig()

    _records: list[SweepRecord] = PrivateAttr(default_factory=list)

    @property
    def records(self) -> list[SweepRecord]:
        """Diagnostics of every sweep of the last run."""
        return list(self._records)

    def _frames(self) -> Dataset:
        available = self.dataset.n_frames
        n = available if self.config.frames is None else min(self.config.frames, available)
        if self.config.frames is not None and self.config.frames > available:
            logger.warning(f"{self.config.frames} frames requested, dataset has {available}")
        if n < MIN_FRAMES:
            raise DegenerateConfigurationError(f"Photometric stereo needs at least {MIN_FRAMES} frames, got {n}")
        return self.dataset if n == available else self.dataset.subset(n)

    def build_levels(self) -> list[LevelProblem]:
        return build_levels(self._frames(), self.config.levels, self.config.tau_tilde)

    def solve_level(self, problem: LevelProblem, state: SceneEstimate, first_level: bool = False) -> SceneEstimate:
        """
        Sweeps one level until the relative energy change drops below ``config.tol``.

        A sweep that raises the energy by more than the tolerance is discarded and ends the level with
        the state it started from.
        """
        energy = level_energy(problem, state, self.config.lam)
        logger.info(f"Level {problem.index}: initial energy {energy:.9g}")
        for index in range(self.config.max_sweeps):
            updated, record = sweep(problem, state, self.config, index, chain=first_level and index == 0)
            record.energy_before = energy
            self._records.append(record)
            if not np.isfinite(record.energy):
                raise SolverError(f"Level {problem.index} sweep {index} produced a non-finite energy")
            logger.info(f"Level {problem.index} sweep {index}: energy {record.energy:.9g}")
            tolerance = self.config.tol * max(abs(energy), np.finfo(float).tiny)
            if record.energy > energy + tolerance:
                record.accepted = False
                logger.warning(
                    f"Level {problem.index} sweep {index} raised the energy from {energy:.9g} to"
                    f" {record.energy:.9g}; sweep discarded"
                )
                return state
            state = updated
            if abs(energy - record.energy) <= tolerance:
                record.converged = True
                logger.info(f"Level {problem.index} converged after {index + 1} sweeps")
                return state
            energy = record.energy
        logger.info(f"Level {problem.index} stopped at the {self.config.max_sweeps}-sweep cap")
        return state

    def run(self) -> SceneEstimate:
        """
        Solves every level from coarsest to finest.

        Raises
        ------
        SolverDivergenceError
            If a level fails; the error carries the estimate of the last level that finished.
        """
        self._records = []
        problems = self.build_levels()
        n_frames = problems[0].n_frames
        state = None
        good = None
        for problem in tqdm(problems, desc="Solving levels", disable=not self.config.show_progress):
            state = initialize(problem, n_frames) if state is None else transfer(state, problem)
            try:
                state = self.solve_level(problem, state, first_level=problem.index == 0)
            except SolverError as error:
                raise SolverDivergenceError(str(error), problem.index, good) from error
            good = state
        return state


def solve_pyramid(dataset: Dataset, config: SolverConfig | None = None) -> SceneEstimate:
    """Runs :class:`SuperResolution` with ``config`` (defaults when omitted)."""
    return SuperResolution(dataset=dataset, config=config or SolverConfig()).run()
