"""Testing file formats and the dataset layout"""

import imageio.v3 as iio
import numpy as np
import pytest

from srframe.formats import load_dataset, read_pfm, write_dataset, write_pfm
from srframe.formats.dataset_io import MANIFEST_NAME, load_manifest
from srframe.formats.images import read_depth_png, read_mask, read_rgb, write_mask, write_rgb
from srframe.formats.tables import read_lighting, read_poses, write_table
from srframe.models import TwistPose
from srframe.utils.errors import DatasetError, MalformedFileError, MissingFileError, SizeMismatchError


@pytest.fixture
def float32_image():
    return np.random.default_rng(0).random((5, 7, 3)).astype(np.float32).astype(float)


def test_pfm_round_trip(tmp_path, float32_image):
    write_pfm(tmp_path / "color.pfm", float32_image)
    np.testing.assert_array_equal(read_pfm(tmp_path / "color.pfm"), float32_image)

    write_pfm(tmp_path / "gray.pfm", float32_image[..., 0])
    gray = read_pfm(tmp_path / "gray.pfm")
    assert gray.shape == (5, 7)
    np.testing.assert_array_equal(gray, float32_image[..., 0])


def test_pfm_rewrite_is_byte_identical(tmp_path, float32_image):
    write_pfm(tmp_path / "a.pfm", float32_image)
    write_pfm(tmp_path / "b.pfm", read_pfm(tmp_path / "a.pfm"))
    assert (tmp_path / "a.pfm").read_bytes() == (tmp_path / "b.pfm").read_bytes()


def test_pfm_rows_are_stored_bottom_up(tmp_path):
    write_pfm(tmp_path / "rows.pfm", np.array([[0.0, 1.0, 2.0], [3.0, 4.0, 5.0]]))
    content = (tmp_path / "rows.pfm").read_bytes()
    assert content.startswith(b"Pf\n3 2\n-1.0\n")
    payload = np.frombuffer(content[len(b"Pf\n3 2\n-1.0\n") :], dtype="<f4")
    np.testing.assert_array_equal(payload, [3.0, 4.0, 5.0, 0.0, 1.0, 2.0])


def test_big_endian_pfm(tmp_path):
    values = np.array([[1.5, -2.0], [0.25, 8.0]])
    payload = np.flipud(values).astype(">f4").tobytes()
    (tmp_path / "big.pfm").write_bytes(b"Pf\n2 2\n1.0\n" + payload)
    np.testing.assert_array_equal(read_pfm(tmp_path / "big.pfm"), values)


@pytest.mark.parametrize(
    "content",
    [
        b"P5\n2 2\n-1.0\n" + bytes(16),
        b"Pf\n2 two\n-1.0\n" + bytes(16),
        b"Pf\n2 2\nscale\n" + bytes(16),
        b"Pf\n2 2\n0\n" + bytes(16),
        b"Pf\n2 2\n-1.0\n" + bytes(12),
    ],
)
def test_malformed_pfm(tmp_path, content):
    (tmp_path / "bad.pfm").write_bytes(content)
    with pytest.raises(MalformedFileError) as error:
        read_pfm(tmp_path / "bad.pfm")
    assert error.value.path.endswith("bad.pfm")


def test_missing_files(tmp_path):
    with pytest.raises(MissingFileError):
        read_pfm(tmp_path / "absent.pfm")
    with pytest.raises(FileNotFoundError):
        read_rgb(tmp_path / "absent.png")
    with pytest.raises(MissingFileError):
        load_dataset(tmp_path / MANIFEST_NAME)


def test_pfm_rejects_two_channels(tmp_path):
    with pytest.raises(ValueError):
        write_pfm(tmp_path / "two.pfm", np.zeros((2, 2, 2)))


def test_16_bit_depth_png(tmp_path):
    iio.imwrite(tmp_path / "depth.png", np.array([[2000, 0], [1000, 65535]], dtype=np.uint16))
    depth = read_depth_png(tmp_path / "depth.png", 0.001)
    np.testing.assert_allclose(depth, [[2.0, 0.0], [1.0, 65.535]])


def test_rgb_and_mask_png(tmp_path):
    image = np.linspace(0.0, 1.0, 4 * 5 * 3).reshape(4, 5, 3)
    write_rgb(tmp_path / "rgb.png", image)
    np.testing.assert_allclose(read_rgb(tmp_path / "rgb.png"), image, atol=0.5 / 255 + 1e-12)

    mask = np.eye(4, 5, dtype=bool)
    write_mask(tmp_path / "mask.png", mask)
    np.testing.assert_array_equal(read_mask(tmp_path / "mask.png"), mask)


def test_rgb_must_be_8_bit(tmp_path):
    iio.imwrite(tmp_path / "wide.png", np.zeros((2, 2), dtype=np.uint16))
    with pytest.raises(MalformedFileError):
        read_rgb(tmp_path / "wide.png")


def test_pose_and_lighting_tables(tmp_path):
    poses = [TwistPose.identity(), TwistPose(xi=[0.1, -0.2, 0.3, 0.01, 0.02, -1 / 3])]
    lighting = np.array([[0.2, 0.0, 0.0, -1.0], [0.2, 0.1, 0.0, -0.9]])
    write_table(tmp_path / "table.txt", poses=poses, lighting=lighting)
    assert [pose.to_list() for pose in read_poses(tmp_path / "table.txt")] == [pose.to_list() for pose in poses]
    np.testing.assert_array_equal(read_lighting(tmp_path / "table.txt"), lighting)


def test_table_frames_in_order(tmp_path):
    (tmp_path / "table.txt").write_text("frame l1 l2 l3 l4\n1 0 0 0 -1\n0 0 0 0 -1\n")
    with pytest.raises(MalformedFileError):
        read_lighting(tmp_path / "table.txt")
    with pytest.raises(MalformedFileError):
        read_poses(tmp_path / "table.txt")


def test_dataset_round_trip(tmp_path, small_dataset):
    manifest = write_dataset(small_dataset, tmp_path, frame_format="pfm")
    loaded = load_dataset(manifest)
    assert loaded.n_frames == small_dataset.n_frames
    assert loaded.intrinsics == small_dataset.intrinsics
    np.testing.assert_array_equal(loaded.mask, small_dataset.mask)
    for a, b in zip(loaded.frames, small_dataset.frames):
        np.testing.assert_allclose(a.data, b.data, rtol=1e-6, atol=1e-7)
    np.testing.assert_array_equal(loaded.depth_lr.mask, small_dataset.depth_lr.mask)
    np.testing.assert_allclose(loaded.depth_lr.data, small_dataset.depth_lr.data, rtol=1e-6)

    truth, expected = loaded.ground_truth, small_dataset.ground_truth
    np.testing.assert_allclose(truth.depth.data, expected.depth.data, rtol=1e-6)
    np.testing.assert_allclose(truth.albedo.data, expected.albedo.data, rtol=1e-6, atol=1e-7)
    assert [pose.to_list() for pose in truth.poses] == [pose.to_list() for pose in expected.poses]
    np.testing.assert_array_equal(truth.lighting, expected.lighting)


def test_png_frames(tmp_path, small_dataset):
    loaded = load_dataset(write_dataset(small_dataset, tmp_path / "png"))
    assert sorted(path.name for path in (tmp_path / "png").glob("rgb_*.png")) == [
        f"rgb_{index:03d}.png" for index in range(small_dataset.n_frames)
    ]
    np.testing.assert_allclose(loaded.frames[1].data, np.clip(small_dataset.frames[1].data, 0, 1), atol=0.5 / 255)


def test_unwritable_dataset_directory(tmp_path, small_dataset):
    blocker = tmp_path / "blocker"
    blocker.write_text("a regular file")
    with pytest.raises(DatasetError) as error:
        write_dataset(small_dataset, blocker / "dataset")
    assert error.value.path == str(blocker / "dataset")


def test_lr_depth_size_mismatch(tmp_path, small_dataset):
    manifest = write_dataset(small_dataset, tmp_path, frame_format="pfm")
    write_pfm(tmp_path / "depth_lr.pfm", np.ones((10, 10)))
    with pytest.raises(SizeMismatchError) as error:
        load_dataset(manifest)
    assert error.value.path.endswith("depth_lr.pfm")


def test_frame_size_mismatch(tmp_path, small_dataset):
    manifest = write_dataset(small_dataset, tmp_path, frame_format="pfm")
    write_pfm(tmp_path / "rgb_002.pfm", np.ones((10, 10, 3)))
    with pytest.raises(SizeMismatchError) as error:
        load_dataset(manifest)
    assert error.value.path.endswith("rgb_002.pfm")


def test_manifest_errors(tmp_path):
    (tmp_path / "frame.pfm").write_bytes(b"")
    cases = {
        "no_glob.txt": "depth_lr = d.pfm\nf = 1\ncx = 0\ncy = 0\n",
        "no_focal.txt": "rgb_glob = *.pfm\ndepth_lr = d.pfm\ncx = 0\ncy = 0\n",
        "bad_focal.txt": "rgb_glob = *.pfm\ndepth_lr = d.pfm\nf = -1\ncx = 0\ncy = 0\n",
    }
    for name, content in cases.items():
        (tmp_path / name).write_text(content)
        with pytest.raises(MalformedFileError):
            load_manifest(tmp_path / name)

    (tmp_path / "no_match.txt").write_text("rgb_glob = *.png\ndepth_lr = d.pfm\nf = 1\ncx = 0\ncy = 0\n")
    with pytest.raises(MissingFileError):
        load_manifest(tmp_path / "no_match.txt")


def test_manifest_focal_pair(tmp_path):
    (tmp_path / "frame.pfm").write_bytes(b"")
    (tmp_path / MANIFEST_NAME).write_text(
        "rgb_glob = *.pfm\ndepth_lr = d.pfm\nfx = 300\nfy = 302\ncx = 160\ncy = 120\n"
    )
    manifest = load_manifest(tmp_path / MANIFEST_NAME)
    assert manifest.f == 301.0
    assert manifest.depth_lr == tmp_path / "d.pfm"
    assert manifest.rgb == [tmp_path / "frame.pfm"]
