"""
Algorithms built on a dataset: the coarse-to-fine solver, its block updates, metrics and parameter studies.
"""
from .level_problem import LevelProblem, TauNormalizer, build_levels
from .pose_update import update_poses
from .depth_update import update_depth
from .albedo_update import update_albedo
from .lighting_update import update_lighting
from .super_resolution import SuperResolution, SweepRecord, initialize, solve_pyramid, sweep, transfer
from .metrics import MetricsReport, angular_error, evaluate, mae_normals, rmse_depth, upsampled_input
from .parameter_study import ParameterStudy
