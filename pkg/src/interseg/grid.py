"""Dense grid containers and geometry: crop, resample, normalize.

Conventions fixed here and relied on everywhere else:
- row-major storage, axis order (z,)y,x
- corner-aligned linear interpolation for resampling
- population standard deviation for normalization
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import ValidationError


@dataclass(frozen=True)
class ScalarGrid:
    """Dense 2D/3D scalar field with per-axis physical spacing (mm)."""

    data: np.ndarray
    spacing: tuple[float, ...] = ()

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim not in (2, 3):
            raise ValidationError(f"grid rank must be 2 or 3, got {arr.ndim}")
        if arr.size == 0:
            raise ValidationError("grid must be non-empty")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("grid values must be finite")
        spacing = self.spacing or (1.0,) * arr.ndim
        if len(spacing) != arr.ndim:
            raise ValidationError("spacing rank must match grid rank")
        if any(s <= 0 for s in spacing):
            raise ValidationError("spacing must be strictly positive")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "spacing", tuple(float(s) for s in spacing))

    @property
    def dims(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def rank(self) -> int:
        return self.data.ndim


@dataclass(frozen=True)
class BinaryMask:
    """Per-cell boolean grid annotating a ScalarGrid of the same dims."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data).astype(bool)
        if arr.ndim not in (2, 3):
            raise ValidationError(f"mask rank must be 2 or 3, got {arr.ndim}")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def rank(self) -> int:
        return self.data.ndim


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box with inclusive integer bounds."""

    lo: tuple[int, ...]
    hi: tuple[int, ...]

    def __post_init__(self):
        lo = tuple(int(v) for v in self.lo)
        hi = tuple(int(v) for v in self.hi)
        if len(lo) != len(hi):
            raise ValidationError("box lo/hi rank mismatch")
        if any(a > b for a, b in zip(lo, hi)):
            raise ValidationError(f"box lo {lo} exceeds hi {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def rank(self) -> int:
        return len(self.lo)

    def shape(self) -> tuple[int, ...]:
        return tuple(h - l + 1 for l, h in zip(self.lo, self.hi))

    def slices(self) -> tuple[slice, ...]:
        return tuple(slice(l, h + 1) for l, h in zip(self.lo, self.hi))

    def contains(self, coords) -> bool:
        return all(l <= int(c) <= h for c, l, h in zip(coords, self.lo, self.hi))

    def check_within(self, dims: tuple[int, ...]) -> None:
        if len(dims) != self.rank:
            raise ValidationError("box rank does not match grid rank")
        if any(l < 0 for l in self.lo) or any(h >= d for h, d in zip(self.hi, dims)):
            raise ValidationError(f"box {self.lo}..{self.hi} out of bounds for dims {dims}")


def crop(grid: ScalarGrid, box: BoundingBox) -> ScalarGrid:
    """Copy the sub-grid covered by `box` (inclusive bounds), spacing preserved."""
    box.check_within(grid.dims)
    return ScalarGrid(grid.data[box.slices()].copy(), grid.spacing)


def crop_mask(mask: BinaryMask, box: BoundingBox) -> BinaryMask:
    box.check_within(mask.dims)
    return BinaryMask(mask.data[box.slices()].copy())


def embed(grid: ScalarGrid, box: BoundingBox, full_dims: tuple[int, ...], fill: float = 0.0) -> ScalarGrid:
    """Paste `grid` into a fill-valued grid of `full_dims` at `box` (inverse of crop)."""
    box.check_within(full_dims)
    if grid.dims != box.shape():
        raise ValidationError(f"grid dims {grid.dims} do not match box shape {box.shape()}")
    out = np.full(full_dims, fill, dtype=np.float64)
    out[box.slices()] = grid.data
    return ScalarGrid(out, grid.spacing)


def _corner_aligned_coords(src_dim: int, dst_dim: int) -> np.ndarray:
    if dst_dim == 1:
        return np.array([0.0 if src_dim == 1 else (src_dim - 1) / 2.0])
    return np.arange(dst_dim, dtype=np.float64) * (src_dim - 1) / (dst_dim - 1)


def resample(grid: ScalarGrid, target_dims) -> ScalarGrid:
    """Corner-aligned bilinear/trilinear resampling to `target_dims`.

    Endpoints map exactly onto source corners, so resampling to the same
    dims is the identity and min/max never exceed the input range.
    """
    target_dims = tuple(int(d) for d in target_dims)
    if len(target_dims) != grid.rank:
        raise ValidationError(f"target rank {len(target_dims)} != grid rank {grid.rank}")
    if any(d <= 0 for d in target_dims):
        raise ValidationError("target dims must be positive")
    if target_dims == grid.dims:
        return ScalarGrid(grid.data.copy(), grid.spacing)
    axes = [_corner_aligned_coords(s, t) for s, t in zip(grid.dims, target_dims)]
    mesh = np.meshgrid(*axes, indexing="ij")
    out = ndimage.map_coordinates(grid.data, np.stack(mesh), order=1, mode="nearest")
    spacing = tuple(
        sp * (s - 1) / (t - 1) if t > 1 and s > 1 else sp
        for sp, s, t in zip(grid.spacing, grid.dims, target_dims)
    )
    return ScalarGrid(out, spacing)


def resample_mask(mask_prob: ScalarGrid, target_dims, threshold: float = 0.5) -> BinaryMask:
    """Linear resample of a mask-as-probability grid, then per-cell >= threshold."""
    if not (0.0 < threshold < 1.0):
        raise ValidationError(f"threshold must be in (0,1), got {threshold}")
    resampled = resample(mask_prob, target_dims)
    return BinaryMask(resampled.data >= threshold)


def normalize(grid: ScalarGrid) -> ScalarGrid:
    """Zero-mean unit-std (population) rescaling; constant input maps to all zeros."""
    std = float(grid.data.std())
    if std == 0.0:
        # degenerate: constant image, segmentation downstream still well-defined
        return ScalarGrid(np.zeros(grid.dims), grid.spacing)
    return ScalarGrid((grid.data - grid.data.mean()) / std, grid.spacing)


def mask_to_grid(mask: BinaryMask, spacing: tuple[float, ...] = ()) -> ScalarGrid:
    return ScalarGrid(mask.data.astype(np.float64), spacing)
