"""
Depth super-resolution and multi-view photometric stereo from a moving light-source enhanced RGB-D camera
"""

__version__ = "0.1.0"
__author__ = ""
__email__ = ""
__credits__ = []
__license__ = "BSD-3"

from .models import (
    CameraIntrinsics,
    Dataset,
    DatasetManifest,
    GroundTruth,
    ImageGrid,
    LightingVector,
    SceneEstimate,
    SolverConfig,
    TwistPose,
)
from .method import MetricsReport, ParameterStudy, SuperResolution, mae_normals, rmse_depth, solve_pyramid
from .formats import load_dataset, load_results, save_results, write_dataset
from .preprocessing.scene_generator import (
    LightingSpec,
    NoiseModel,
    SceneGenerator,
    SceneSpec,
    SynthSpec,
    TrajectorySpec,
    generate_dataset,
    make_lr_depth,
    render_frame,
)
