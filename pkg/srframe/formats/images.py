from pathlib import Path

import imageio.v3 as iio
import numpy as np

from ..utils.errors import MalformedFileError, MissingFileError


def read_image(path: str | Path) -> np.ndarray:
    """Reads a PNG (or any format imageio handles) as a raw array, raising path-bearing errors."""
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(path, "image not found")
    try:
        return np.asarray(iio.imread(path))
    except Exception as error:
        raise MalformedFileError(path, f"unreadable image ({error})") from error


def read_rgb(path: str | Path) -> np.ndarray:
    """8-bit RGB image mapped to ``[0, 1]``; an alpha channel is dropped."""
    image = read_image(path)
    if image.dtype != np.uint8:
        raise MalformedFileError(path, f"RGB image should be 8-bit, got {image.dtype}")
    if image.ndim == 2:
        image = np.repeat(image[..., None], 3, axis=-1)
    if image.ndim != 3 or image.shape[2] not in (3, 4):
        raise MalformedFileError(path, f"RGB image has shape {image.shape}")
    return image[..., :3].astype(float) / 255.0


def write_rgb(path: str | Path, image: np.ndarray):
    """Clamps to ``[0, 1]`` and writes an 8-bit PNG."""
    quantized = np.round(np.clip(np.asarray(image, dtype=float), 0.0, 1.0) * 255.0).astype(np.uint8)
    iio.imwrite(path, quantized)


def read_mask(path: str | Path) -> np.ndarray:
    """Single-channel mask, nonzero meaning valid."""
    image = read_image(path)
    if image.ndim == 3:
        image = image[..., 0]
    if image.ndim != 2:
        raise MalformedFileError(path, f"mask has shape {image.shape}")
    return image != 0


def write_mask(path: str | Path, mask: np.ndarray):
    iio.imwrite(path, np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8))


def read_depth_png(path: str | Path, depth_scale: float) -> np.ndarray:
    """16-bit depth counts times ``depth_scale``; zero stays zero (invalid)."""
    image = read_image(path)
    if not np.issubdtype(image.dtype, np.integer) or image.ndim != 2:
        raise MalformedFileError(path, f"depth PNG should be single-channel integer, got {image.dtype} {image.shape}")
    return image.astype(float) * depth_scale


def write_depth_png(path: str | Path, depth: np.ndarray, depth_scale: float):
    counts = np.round(np.asarray(depth, dtype=float) / depth_scale)
    iio.imwrite(path, np.clip(counts, 0, np.iinfo(np.uint16).max).astype(np.uint16))
