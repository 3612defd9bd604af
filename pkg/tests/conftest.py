"""Small synthetic scenes shared by the test modules"""

import numpy as np
import pytest

from srframe import CameraIntrinsics, ImageGrid, SceneSpec, SynthSpec, TrajectorySpec
from srframe.preprocessing.scene_generator import LightingSpec, NoiseModel, SceneGenerator


@pytest.fixture
def intrinsics():
    return CameraIntrinsics(f=80.0, cx=32.0, cy=24.0)


@pytest.fixture
def sphere_scene():
    return SceneSpec(
        surface="sphere",
        sphere_radius=250.0,
        albedo="noise",
        width=64,
        height=48,
        f=80.0,
        cx=32.0,
        cy=24.0,
    )


@pytest.fixture
def wavy_scene():
    return SceneSpec(
        surface="wavy_plane",
        plane_depth=1200.0,
        plane_amplitude=40.0,
        plane_frequency=0.02,
        albedo="constant",
        width=64,
        height=48,
        f=80.0,
        cx=32.0,
        cy=24.0,
    )


@pytest.fixture
def small_spec(sphere_scene):
    return SynthSpec(
        scene=sphere_scene,
        trajectory=TrajectorySpec(n_frames=4, max_rotation_deg=4.0),
        lighting=LightingSpec(),
        noise=NoiseModel(kappa=1e-5, seed=3),
        scale_factor=2,
        quantize=False,
    )


@pytest.fixture
def small_dataset(small_spec):
    return SceneGenerator(spec=small_spec).generate()


@pytest.fixture
def random_mask():
    def make(shape, seed=0, fraction=0.8):
        generator = np.random.default_rng(seed)
        return generator.random(shape) < fraction

    return make


@pytest.fixture
def constant_grid():
    def make(value, shape=(48, 64), channels=1):
        return ImageGrid.from_array(np.full(shape + (channels,), float(value)))

    return make
