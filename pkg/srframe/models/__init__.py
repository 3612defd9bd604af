"""
Models classes are located here.
"""
from .image_grid import ImageGrid, mask_intersection
from .camera import CameraIntrinsics
from .pose import TwistPose
from .lighting import LightingVector
from .config import SolverConfig
from .scene import SceneEstimate
from .dataset import Dataset, DatasetManifest, GroundTruth
