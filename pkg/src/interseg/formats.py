"""Bit-exact SGRID binary format plus 2D PNG/PGM image loading.

SGRID layout (little-endian): magic "SGRD", version 0x01, rank byte (2|3),
dtype byte (0x01 float32, 0x02 uint8), rank x uint32 dims (slowest axis
first), rank x float32 spacing, raw row-major payload.
"""

from __future__ import annotations

import io
import struct
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import IoError
from .grid import BinaryMask, ScalarGrid

MAGIC = b"SGRD"
VERSION = 1
DTYPE_FLOAT32 = 0x01
DTYPE_UINT8 = 0x02


def write_sgrid_bytes(grid: ScalarGrid | BinaryMask, dtype: int = DTYPE_FLOAT32) -> bytes:
    if isinstance(grid, BinaryMask):
        data = grid.data.astype(np.uint8)
        spacing = (1.0,) * grid.rank
        dtype = DTYPE_UINT8
    else:
        spacing = grid.spacing
        data = grid.data.astype(np.float32) if dtype == DTYPE_FLOAT32 else grid.data.astype(np.uint8)
    rank = data.ndim
    header = MAGIC + struct.pack("<BBB", VERSION, rank, dtype)
    header += struct.pack(f"<{rank}I", *data.shape)
    header += struct.pack(f"<{rank}f", *spacing)
    if dtype == DTYPE_FLOAT32:
        payload = data.astype("<f4").tobytes()
    else:
        payload = data.tobytes()
    return header + payload


def read_sgrid_bytes(raw: bytes) -> ScalarGrid:
    if len(raw) < 7 or raw[:4] != MAGIC:
        raise IoError("bad magic: not an SGRID payload")
    version, rank, dtype = struct.unpack("<BBB", raw[4:7])
    if version != VERSION:
        raise IoError(f"unsupported SGRID version {version}")
    if rank not in (2, 3):
        raise IoError(f"unsupported SGRID rank {rank}")
    if dtype not in (DTYPE_FLOAT32, DTYPE_UINT8):
        raise IoError(f"unsupported SGRID dtype 0x{dtype:02x}")
    offset = 7
    try:
        dims = struct.unpack_from(f"<{rank}I", raw, offset)
        offset += 4 * rank
        spacing = struct.unpack_from(f"<{rank}f", raw, offset)
        offset += 4 * rank
    except struct.error as exc:
        raise IoError(f"truncated SGRID header: {exc}") from exc
    count = int(np.prod(dims))
    item = 4 if dtype == DTYPE_FLOAT32 else 1
    if len(raw) - offset != count * item:
        raise IoError(
            f"SGRID payload size mismatch: expected {count * item} bytes, got {len(raw) - offset}"
        )
    np_dtype = "<f4" if dtype == DTYPE_FLOAT32 else np.uint8
    data = np.frombuffer(raw, dtype=np_dtype, count=count, offset=offset).reshape(dims)
    return ScalarGrid(data.astype(np.float64), tuple(float(s) for s in spacing))


def write_sgrid(path, grid: ScalarGrid | BinaryMask, dtype: int = DTYPE_FLOAT32) -> None:
    Path(path).write_bytes(write_sgrid_bytes(grid, dtype))


def read_sgrid(path) -> ScalarGrid:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    return read_sgrid_bytes(raw)


def load_image_bytes(raw: bytes) -> ScalarGrid:
    """Load an image payload: SGRID (2D/3D) or 8/16-bit grayscale PNG/PGM (2D)."""
    if raw[:4] == MAGIC:
        return read_sgrid_bytes(raw)
    try:
        img = Image.open(io.BytesIO(raw))
        img.load()
    except (UnidentifiedImageError, OSError) as exc:
        raise IoError(f"unrecognized image payload: {exc}") from exc
    if img.format not in ("PNG", "PPM"):
        raise IoError(f"unsupported image format {img.format} (PNG/PGM/SGRID only)")
    if img.mode in ("L", "I;16", "I"):
        arr = np.asarray(img, dtype=np.float64)
    elif img.mode in ("RGB", "RGBA", "LA"):
        arr = np.asarray(img.convert("L"), dtype=np.float64)
    else:
        raise IoError(f"unsupported image mode {img.mode}: grayscale required")
    return ScalarGrid(arr)


def load_image(path) -> ScalarGrid:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    return load_image_bytes(raw)


def mask_to_png_bytes(mask_slice: np.ndarray) -> bytes:
    """Encode a 2D boolean array as an 8-bit PNG (255 = foreground)."""
    img = Image.fromarray((mask_slice.astype(np.uint8)) * 255, mode="L")
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def image_to_png_bytes(image_slice: np.ndarray) -> bytes:
    """Encode a 2D scalar array as an 8-bit PNG, min/max rescaled for display."""
    arr = np.asarray(image_slice, dtype=np.float64)
    lo, hi = float(arr.min()), float(arr.max())
    if hi > lo:
        arr = (arr - lo) / (hi - lo)
    else:
        arr = np.zeros_like(arr)
    img = Image.fromarray((arr * 255).astype(np.uint8), mode="L")
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()
