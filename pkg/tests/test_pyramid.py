"""Testing the coarse-to-fine pyramid"""

import numpy as np
import pytest

from srframe.geometry import reproject
from srframe.models import CameraIntrinsics, ImageGrid
from srframe.preprocessing import build_pyramid, downsample_area, level_shapes


@pytest.fixture
def image():
    return ImageGrid.from_array(np.random.default_rng(0).random((240, 320, 3)))


@pytest.fixture
def camera():
    return CameraIntrinsics(f=300.0, cx=159.5, cy=119.5)


def test_level_sizes(image, camera):
    pyramid = build_pyramid(image, camera, 5)
    assert [level.image.shape for level in pyramid] == [(15, 20), (30, 40), (60, 80), (120, 160), (240, 320)]
    assert [level.index for level in pyramid] == list(range(5))
    assert pyramid[0].scale == pytest.approx(1 / 16)


def test_single_level_is_input(image, camera):
    (level,) = build_pyramid(image, camera, 1)
    assert level.image is image
    assert level.intrinsics is camera


def test_principal_point_stays_on_axis(image, camera):
    for level in build_pyramid(image, camera, 4):
        intrinsics = level.intrinsics
        ray = reproject(intrinsics.principal_point, 1.0, intrinsics)
        np.testing.assert_allclose(ray / np.linalg.norm(ray), [0.0, 0.0, 1.0], atol=1e-15)
        assert intrinsics.f == pytest.approx(300.0 * level.scale)


def test_image_centre_is_preserved(image, camera):
    """A centred principal point stays centred at every level"""
    for level in build_pyramid(image, camera, 5):
        height, width = level.image.shape
        assert level.intrinsics.cx == pytest.approx((width - 1) / 2)
        assert level.intrinsics.cy == pytest.approx((height - 1) / 2)


def test_depth_is_not_rescaled(camera):
    depth = ImageGrid.from_array(np.full((240, 320), 1500.0))
    for level in build_pyramid(depth, camera, 5):
        np.testing.assert_allclose(level.image.values, 1500.0)


def test_odd_sizes_average_existing_pixels():
    coarse = downsample_area(ImageGrid.from_array(np.arange(1.0, 10.0).reshape(3, 3)))
    np.testing.assert_allclose(coarse.values, [[3.0, 4.5], [7.5, 9.0]])
    assert coarse.mask.all()


def test_invalid_pixel_invalidates_block():
    mask = np.ones((4, 4), dtype=bool)
    mask[0, 0] = False
    coarse = downsample_area(ImageGrid(data=np.ones((4, 4)), mask=mask))
    np.testing.assert_array_equal(coarse.mask, [[False, True], [True, True]])


def test_level_shapes():
    assert level_shapes(5, 7, 3) == [(2, 2), (3, 4), (5, 7)]


def test_too_many_levels(camera):
    with pytest.raises(ValueError):
        build_pyramid(ImageGrid.from_array(np.ones((4, 4))), camera, 4)
    with pytest.raises(ValueError):
        build_pyramid(ImageGrid.from_array(np.ones((4, 4))), camera, 0)
