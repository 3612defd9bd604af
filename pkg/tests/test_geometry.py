"""Testing normals, projection and the warping function"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from srframe.geometry import (
    depth_gradient,
    gradient_operators,
    normals_from_depth,
    project,
    reproject,
    transform,
    warp,
    warp_jacobian,
)
from srframe.method.metrics import angular_error
from srframe.models import CameraIntrinsics, ImageGrid, TwistPose
from srframe.preprocessing.scene_generator import SceneSpec, render_frame
from srframe.utils.const import DEFAULT_LIGHTING


def _loop_gradient(z, mask):
    """Reference implementation of the masked forward-difference stencil"""
    height, width = z.shape
    gradient = np.zeros((height, width, 2))
    for y in range(height):
        for x in range(width):
            if not mask[y, x]:
                continue
            for axis, (ny_f, nx_f, ny_b, nx_b) in enumerate([(y, x + 1, y, x - 1), (y + 1, x, y - 1, x)]):
                if ny_f < height and nx_f < width and mask[ny_f, nx_f]:
                    gradient[y, x, axis] = z[ny_f, nx_f] - z[y, x]
                elif ny_b >= 0 and nx_b >= 0 and mask[ny_b, nx_b]:
                    gradient[y, x, axis] = z[y, x] - z[ny_b, nx_b]
    return gradient


@pytest.mark.parametrize("seed", range(3))
def test_gradient_stencil(seed, random_mask):
    z = np.random.default_rng(seed).random((7, 9))
    mask = random_mask((7, 9), seed=seed, fraction=0.6)
    expected = _loop_gradient(z, mask)
    np.testing.assert_allclose(depth_gradient(ImageGrid(data=z, mask=mask)), expected, atol=1e-15)

    gx, gy = gradient_operators(mask)
    np.testing.assert_allclose(gx @ z[mask], expected[..., 0][mask], atol=1e-15)
    np.testing.assert_allclose(gy @ z[mask], expected[..., 1][mask], atol=1e-15)


def test_gradient_of_ramp():
    ys, xs = np.mgrid[0:5, 0:6].astype(float)
    gradient = depth_gradient(ImageGrid.from_array(2.0 * xs - ys))
    np.testing.assert_allclose(gradient[..., 0], 2.0)
    np.testing.assert_allclose(gradient[..., 1], -1.0)


def test_flat_depth_normal():
    normals = normals_from_depth(ImageGrid.from_array(np.ones((4, 5))), CameraIntrinsics(f=10.0, cx=2.0, cy=1.5))
    np.testing.assert_allclose(normals.normals, np.broadcast_to([0.0, 0.0, -1.0], (4, 5, 3)))
    np.testing.assert_allclose(normals.area, 1.0)


def test_flat_area_element_is_the_depth():
    """Without a depth gradient the area element equals the depth"""
    normals = normals_from_depth(ImageGrid.from_array(np.full((4, 5), 3.0)), CameraIntrinsics(f=10.0, cx=2.0, cy=1.5))
    np.testing.assert_allclose(normals.unnormalized, np.broadcast_to([0.0, 0.0, -3.0], (4, 5, 3)))
    np.testing.assert_allclose(normals.area, 3.0)


def test_tilted_normal_at_principal_point():
    """f = 1, p = c, z = 1, grad z = (1, 0) gives n~ = (1, 0, -1) and dA = sqrt(2)"""
    intrinsics = CameraIntrinsics(f=1.0, cx=2.0, cy=2.0)
    ys, xs = np.mgrid[0:5, 0:5].astype(float)
    normals = normals_from_depth(ImageGrid.from_array(1.0 + (xs - 2.0)), intrinsics)
    np.testing.assert_allclose(normals.unnormalized[2, 2], [1.0, 0.0, -1.0], atol=1e-15)
    assert normals.area[2, 2] == pytest.approx(np.sqrt(2.0))


def test_vanishing_area_is_dropped():
    """A zero depth with zero gradient has no normal"""
    depth = ImageGrid.from_array(np.zeros((3, 3)))
    normals = normals_from_depth(depth, CameraIntrinsics(f=1.0, cx=1.0, cy=1.0))
    assert not normals.mask.any()
    assert normals.flagged == 9


def test_sphere_normals():
    scene = SceneSpec(surface="sphere", albedo="constant")
    intrinsics = scene.intrinsics
    rendered = render_frame(scene, TwistPose.identity(), DEFAULT_LIGHTING, quantize=False)
    estimated = normals_from_depth(rendered.depth, intrinsics)
    # well inside the silhouette, away from the stencil's one-sided boundary
    ys, xs = np.mgrid[0 : scene.height, 0 : scene.width].astype(float)
    radius = np.hypot(xs - intrinsics.cx, ys - intrinsics.cy)
    inner = radius < 0.5 * scene.f * scene.sphere_radius / scene.sphere_center[2]
    exact = estimated.model_copy(update={"normals": rendered.normals, "mask": rendered.depth.mask})
    errors = angular_error(estimated, exact, inner)
    assert errors.valid_count > 100
    assert errors.masked_mean() < 1.0


def test_reproject_and_project():
    intrinsics = CameraIntrinsics(f=100.0, cx=50.0, cy=50.0)
    np.testing.assert_allclose(reproject(np.array([50.0, 50.0]), 2.0, intrinsics), [0.0, 0.0, 2.0])
    pixels, valid = project(np.array([0.0, 0.0, 2.0]), intrinsics)
    assert valid and np.allclose(pixels, [50.0, 50.0])
    _, valid = project(np.array([[1.0, 1.0, 0.0], [1.0, 1.0, -1.0]]), intrinsics)
    assert not valid.any()


@settings(max_examples=50, deadline=None)
@given(
    st.floats(0.0, 319.0), st.floats(0.0, 239.0), st.floats(0.1, 10.0), st.floats(50.0, 500.0)
)
def test_projection_round_trip(x, y, depth, f):
    intrinsics = CameraIntrinsics(f=f, cx=159.5, cy=119.5)
    pixels, valid = project(reproject(np.array([x, y]), depth, intrinsics), intrinsics)
    assert valid
    np.testing.assert_allclose(pixels, [x, y], atol=1e-9)


def test_transform_composition():
    a = TwistPose(xi=[0.1, 0.0, 0.2, 0.01, -0.02, 0.03])
    b = TwistPose(xi=[-0.3, 0.1, 0.0, 0.05, 0.0, -0.01])
    points = np.random.default_rng(0).random((10, 3))
    np.testing.assert_allclose(transform(transform(points, a), b), transform(points, b.compose(a)), atol=1e-12)


@pytest.fixture
def camera():
    return CameraIntrinsics(f=100.0, cx=31.5, cy=23.5)


@pytest.fixture
def plane(camera):
    return ImageGrid.from_array(np.full((48, 64), 2.0))


def test_identity_warp(plane, camera):
    pixels, valid = warp(plane, TwistPose.identity(), camera)
    ys, xs = np.mgrid[0:48, 0:64].astype(float)
    assert valid.all()
    np.testing.assert_array_equal(pixels[..., 0], xs)
    np.testing.assert_array_equal(pixels[..., 1], ys)


def test_forward_motion_expands(plane, camera):
    """Moving towards the scene pushes every pixel away from the principal point"""
    pixels, valid = warp(plane, TwistPose(xi=[0.0, 0.0, -0.5, 0.0, 0.0, 0.0]), camera)
    ys, xs = np.mgrid[0:48, 0:64].astype(float)
    before = np.hypot(xs - camera.cx, ys - camera.cy)
    after = np.hypot(pixels[..., 0] - camera.cx, pixels[..., 1] - camera.cy)
    # off-centre pixels that leave the image are invalid, the rest moved outwards
    assert valid.any() and not valid.all()
    assert (after[valid] > before[valid]).all()


def test_plane_induced_homography(plane, camera):
    pose = TwistPose(xi=[0.05, -0.02, 0.01, 0.01, 0.02, -0.01])
    pixels, valid = warp(plane, pose, camera)
    k = np.array([[camera.f, 0.0, camera.cx], [0.0, camera.f, camera.cy], [0.0, 0.0, 1.0]])
    normal = np.array([0.0, 0.0, 1.0])
    homography = k @ (pose.rotation + np.outer(pose.translation, normal) / 2.0) @ np.linalg.inv(k)
    ys, xs = np.mgrid[0:48, 0:64].astype(float)
    mapped = np.stack([xs, ys, np.ones_like(xs)], axis=-1) @ homography.T
    expected = mapped[..., :2] / mapped[..., 2:]
    np.testing.assert_allclose(pixels[valid], expected[valid], atol=1e-9)


def test_out_of_image_is_invalid(plane, camera):
    _, valid = warp(plane, TwistPose(xi=[5.0, 0.0, 0.0, 0.0, 0.0, 0.0]), camera)
    assert not valid.any()


def test_degenerate_reference_depth_is_invalid(camera):
    """Depths at or below 1e-6 are invalid whether or not the camera moved"""
    depth = np.full((48, 64), 2.0)
    depth[10, 20] = 1e-7
    grid = ImageGrid.from_array(depth)
    for pose in (TwistPose.identity(), TwistPose(xi=[0.0, 0.0, 1.0, 0.0, 0.0, 0.0])):
        _, valid = warp(grid, pose, camera)
        assert not valid[10, 20]
        assert valid[24, 32]


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.floats(-0.2, 0.2), min_size=6, max_size=6),
    st.floats(0.0, 63.0),
    st.floats(0.0, 47.0),
    st.floats(0.5, 10.0),
)
def test_warp_round_trip(xi, x, y, depth):
    """Warping with a pose, then back from the moved point with the inverse pose, returns the pixel"""
    intrinsics = CameraIntrinsics(f=100.0, cx=31.5, cy=23.5)
    pose = TwistPose(xi=xi)
    moved = transform(reproject(np.array([x, y]), np.array(depth), intrinsics), pose)
    target, valid = project(moved, intrinsics)
    if not valid:
        return
    back, valid = project(transform(reproject(target, moved[2], intrinsics), pose.inverse()), intrinsics)
    assert valid
    np.testing.assert_allclose(back, [x, y], atol=1e-6)


def _finite_difference(p, z, pose, intrinsics, step=1e-6):
    columns = []
    for k in range(6):
        delta = np.zeros(6)
        delta[k] = step
        plus, _ = project(transform(reproject(p, z, intrinsics), pose.left_update(delta)), intrinsics)
        minus, _ = project(transform(reproject(p, z, intrinsics), pose.left_update(-delta)), intrinsics)
        columns.append((plus - minus) / (2 * step))
    return np.stack(columns, axis=-1)


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.floats(-0.1, 0.1), min_size=6, max_size=6),
    st.floats(0.0, 63.0),
    st.floats(0.0, 47.0),
    st.floats(1.0, 5.0),
)
def test_warp_jacobian_matches_finite_differences(xi, x, y, depth):
    intrinsics = CameraIntrinsics(f=100.0, cx=31.5, cy=23.5)
    pose = TwistPose(xi=xi)
    p = np.array([x, y])
    analytic = warp_jacobian(p, depth, pose, intrinsics)
    numeric = _finite_difference(p, depth, pose, intrinsics)
    scale = np.abs(analytic).max()
    np.testing.assert_allclose(analytic, numeric, rtol=1e-4, atol=1e-4 * scale)


def test_jacobian_on_optical_axis():
    """In-plane rotation does not move the principal point; lateral motion moves it by f / Z"""
    intrinsics = CameraIntrinsics(f=100.0, cx=31.5, cy=23.5)
    jacobian = warp_jacobian(intrinsics.principal_point, 2.0, TwistPose.identity(), intrinsics)
    np.testing.assert_allclose(jacobian[:, 5], 0.0, atol=1e-15)
    np.testing.assert_allclose(jacobian[:, :2], 50.0 * np.eye(2))
