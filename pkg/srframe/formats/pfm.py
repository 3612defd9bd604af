"""
Portable float map codec.

Only little-endian files are written (negative scale). Rows are stored bottom-to-top, as the format
prescribes.
"""

import re
from pathlib import Path

import numpy as np

from ..utils.errors import MalformedFileError, MissingFileError

_DIMENSIONS = re.compile(rb"^\s*(\d+)\s+(\d+)\s*$")


def write_pfm(path: str | Path, array: np.ndarray):
    """
    Writes a ``(H, W)`` array as ``Pf`` or a ``(H, W, 3)`` array as ``PF`` with float32 payload.
    """
    array = np.asarray(array)
    if array.ndim == 3 and array.shape[2] == 1:
        array = array[..., 0]
    if array.ndim == 2:
        header = b"Pf"
    elif array.ndim == 3 and array.shape[2] == 3:
        header = b"PF"
    else:
        raise ValueError(f"PFM stores 1 or 3 channels, got shape {array.shape}")
    height, width = array.shape[:2]
    payload = np.flipud(array).astype("<f4").tobytes()
    with open(path, "wb") as f:
        f.write(header + b"\n" + f"{width} {height}\n".encode() + b"-1.0\n" + payload)


def read_pfm(path: str | Path) -> np.ndarray:
    """
    Reads a PFM file.

    Returns
    -------
    np.ndarray
        ``(H, W)`` for ``Pf`` files, ``(H, W, 3)`` for ``PF`` files, as float64.

    Raises
    ------
    MissingFileError
        If the file does not exist.
    MalformedFileError
        If the header is invalid or the payload has the wrong length.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(path, "PFM file not found")
    with open(path, "rb") as f:
        kind = f.readline().strip()
        dimensions = _DIMENSIONS.match(f.readline())
        scale_line = f.readline()
        payload = f.read()

    if kind not in (b"PF", b"Pf"):
        raise MalformedFileError(path, f"unknown PFM type {kind!r}")
    if dimensions is None:
        raise MalformedFileError(path, "PFM dimensions line is malformed")
    try:
        scale = float(scale_line)
    except ValueError:
        raise MalformedFileError(path, "PFM scale line is malformed") from None
    if scale == 0:
        raise MalformedFileError(path, "PFM scale should be nonzero")

    width, height = int(dimensions.group(1)), int(dimensions.group(2))
    channels = 3 if kind == b"PF" else 1
    expected = width * height * channels * 4
    if len(payload) != expected:
        raise MalformedFileError(path, f"PFM payload has {len(payload)} bytes, expected {expected}")

    dtype = "<f4" if scale < 0 else ">f4"
    array = np.frombuffer(payload, dtype=dtype).reshape(height, width, channels)
    array = np.flipud(array).astype(float)
    return array[..., 0] if channels == 1 else array
