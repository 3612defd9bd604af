"""Testing the core value types"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from pydantic import BaseModel, ConfigDict, ValidationError

from srframe import CameraIntrinsics, ImageGrid, LightingVector, SceneEstimate, SolverConfig, TwistPose
from srframe.models import mask_intersection
from srframe.utils.errors import DimensionMismatchError

twists = arrays(np.float64, 6, elements=st.floats(-1.0, 1.0))


@pytest.fixture
def grid():
    data = np.arange(12, dtype=float).reshape(3, 4)
    mask = np.ones((3, 4), dtype=bool)
    mask[1, 2] = False
    return ImageGrid(data=data, mask=mask)


def test_invalid_pixels_store_zero(grid):
    """Values under an invalid mask entry are replaced by 0"""
    assert grid.data[1, 2, 0] == 0.0
    assert grid.valid_count == 11


def test_grid_is_read_only(grid):
    with pytest.raises(ValueError):
        grid.data[0, 0, 0] = 5.0


def test_grid_does_not_alias_input():
    data = np.ones((2, 2))
    ImageGrid(data=data, mask=np.zeros((2, 2), dtype=bool))
    assert (data == 1.0).all()


def test_grid_inside_another_model(grid):
    """A validated grid can be a field of another model without being rewritten"""

    class Holder(BaseModel):
        model_config = ConfigDict(arbitrary_types_allowed=True)

        image: ImageGrid

    holder = Holder(image=grid)
    np.testing.assert_array_equal(holder.image.data, grid.data)
    np.testing.assert_array_equal(holder.image.mask, grid.mask)
    assert not holder.image.data.flags.writeable


def test_grid_shape_mismatch():
    with pytest.raises(ValidationError):
        ImageGrid(data=np.zeros((3, 4)), mask=np.ones((4, 3), dtype=bool))


def test_grid_channels():
    rgb = ImageGrid.from_array(np.zeros((2, 5, 3)))
    assert rgb.shape == (2, 5) and rgb.channels == 3 and rgb.width == 5 and rgb.height == 2


def test_masked_mean(grid):
    assert grid.masked_mean() == pytest.approx((66 - 6) / 11)


def test_mask_intersection():
    a = ImageGrid(data=np.ones((2, 2)), mask=np.array([[1, 1], [0, 1]], dtype=bool))
    b = ImageGrid(data=np.ones((2, 2)), mask=np.array([[1, 0], [1, 1]], dtype=bool))
    both = mask_intersection(a, b)
    np.testing.assert_array_equal(both.mask, [[True, False], [False, True]])
    with pytest.raises(DimensionMismatchError):
        mask_intersection(a, ImageGrid.from_array(np.ones((3, 2))))


def test_intrinsics_scaling():
    intrinsics = CameraIntrinsics(f=300.0, cx=159.5, cy=119.5)
    half = intrinsics.scaled(0.5)
    assert half.f == 150.0
    # pixel centres stay aligned: (c + 0.5) * s - 0.5
    assert half.cx == pytest.approx(79.5) and half.cy == pytest.approx(59.5)
    assert intrinsics.contains_principal_point(320, 240)


def test_intrinsics_focal_pair():
    assert CameraIntrinsics.from_focal_pair(299.0, 301.0, 0.0, 0.0).f == pytest.approx(300.0)


def test_intrinsics_need_positive_focal():
    with pytest.raises(ValidationError):
        CameraIntrinsics(f=0.0, cx=0.0, cy=0.0)


def test_identity_pose():
    pose = TwistPose.identity()
    np.testing.assert_array_equal(pose.rotation, np.eye(3))
    np.testing.assert_array_equal(pose.translation, np.zeros(3))
    assert pose.is_identity


@settings(max_examples=50, deadline=None)
@given(twists)
def test_rotation_is_orthonormal(xi):
    rotation = TwistPose(xi=xi).rotation
    np.testing.assert_allclose(rotation.T @ rotation, np.eye(3), atol=1e-12)
    assert np.linalg.det(rotation) == pytest.approx(1.0)


@settings(max_examples=50, deadline=None)
@given(twists)
def test_log_inverts_exp(xi):
    pose = TwistPose(xi=xi)
    np.testing.assert_allclose(TwistPose.from_rt(pose.rotation, pose.translation).xi, xi, atol=1e-9)


@settings(max_examples=50, deadline=None)
@given(twists)
def test_compose_with_inverse(xi):
    pose = TwistPose(xi=xi)
    np.testing.assert_allclose(pose.compose(pose.inverse()).xi, np.zeros(6), atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(twists, twists)
def test_compose_applies_right_first(a, b):
    first, second = TwistPose(xi=a), TwistPose(xi=b)
    points = np.array([[0.1, -0.2, 2.0], [1.0, 0.5, 3.0]])
    np.testing.assert_allclose(
        second.compose(first).transform(points), second.transform(first.transform(points)), atol=1e-9
    )


def test_quarter_turn_about_optical_axis():
    xi = np.array([0.0, 0.0, 0.0, 0.0, 0.0, np.pi / 2])
    xi.setflags(write=False)
    pose = TwistPose(xi=xi)
    np.testing.assert_allclose(pose.rotation, [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]], atol=1e-12)
    np.testing.assert_allclose(pose.transform(np.array([1.0, 0.0, 2.0])), [0.0, 1.0, 2.0], atol=1e-12)


def test_small_angle_translation():
    """For a vanishing rotation the translation equals the translational twist part"""
    pose = TwistPose(xi=[1.0, 2.0, 3.0, 1e-12, 0.0, 0.0])
    np.testing.assert_allclose(pose.translation, [1.0, 2.0, 3.0], atol=1e-10)


def test_pose_rejects_wrong_length():
    with pytest.raises(ValidationError):
        TwistPose(xi=np.zeros(5))


def test_lighting_vector():
    assert LightingVector.frontal().to_list() == [0.2, 0.0, 0.0, -1.0]
    with pytest.raises(ValidationError):
        LightingVector(l=[np.nan, 0.0, 0.0, 0.0])


def test_solver_config_defaults():
    config = SolverConfig()
    assert config.lam == 0.04 and config.tau_tilde == 10.0 and config.levels == 5
    assert config.tol == 1e-5 and config.max_sweeps == 50


@pytest.mark.parametrize("changes", [{"lam": 0.0}, {"tau_tilde": -1.0}, {"levels": 0}, {"frames": 2}])
def test_solver_config_rejects(changes):
    with pytest.raises(ValidationError):
        SolverConfig(**changes)


@pytest.fixture
def estimate(intrinsics):
    depth = ImageGrid.from_array(np.full((48, 64), 1000.0))
    albedo = ImageGrid.from_array(np.full((48, 64, 3), 0.5))
    return SceneEstimate(
        depth=depth,
        albedo=albedo,
        lighting=np.tile([0.2, 0.0, 0.0, -1.0], (3, 1)),
        poses=[TwistPose.identity(), TwistPose(xi=[1, 0, 0, 0, 0.01, 0]), TwistPose(xi=[0, 1, 0, 0.01, 0, 0])],
        intrinsics=intrinsics,
    )


def test_estimate_reference_pose_is_identity(estimate):
    with pytest.raises(ValidationError):
        estimate.replace(poses=[TwistPose(xi=[0, 0, 1, 0, 0, 0])] + estimate.poses[1:])


def test_estimate_lengths_match(estimate):
    with pytest.raises(ValidationError):
        estimate.replace(lighting=estimate.lighting[:2])


def test_estimate_pickle(estimate, tmp_path):
    path = tmp_path / "estimate.pickle"
    estimate.to_pickle(path)
    restored = SceneEstimate.from_pickle(path)
    np.testing.assert_array_equal(restored.depth.data, estimate.depth.data)
    assert [pose.to_list() for pose in restored.poses] == [pose.to_list() for pose in estimate.poses]
