"""Click simulation: interior margin points, relaxed bounding boxes, and the
robot user that stands in for a human during reproducible evaluation.

Margin points follow two rules: they lie inside the object near its
boundary, and the bounding box they induce (after margin relaxation) covers
the whole object.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ValidationError
from .grid import BinaryMask, BoundingBox
from .metrics import surface_points
from .seeds import SeedLabel, SeedSet

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MarginPointConfig:
    """Simulation knobs; None selects the rank-based default at call time.

    near_extreme_count: boundary points near axis extremes (2D: 3-4, 3D: 5-6,
    sampled when None). extra_count_max: upper bound of the uniform extra-point
    count. inward_offset: cells to displace clicks inside (2D: 3, 3D: 2).
    bbox_margin: relaxation of the induced box (2D: 5, 3D: 3).
    """

    near_extreme_count: int | None = None
    extra_count_max: int = 5
    inward_offset: int | None = None
    bbox_margin: int | None = None
    rng_seed: int = 0

    def resolved(self, rank: int) -> tuple[int, int, int]:
        offset = self.inward_offset if self.inward_offset is not None else (3 if rank == 2 else 2)
        margin = self.bbox_margin if self.bbox_margin is not None else (5 if rank == 2 else 3)
        if self.extra_count_max < 0 or margin < 0:
            raise ValidationError("counts and margins must be non-negative")
        if offset < 1:
            raise ValidationError("inward_offset must be >= 1")
        return offset, margin, self.extra_count_max


def _boundary_depth(boundary: np.ndarray) -> np.ndarray:
    """Euclidean distance of every cell to the nearest boundary cell."""
    return ndimage.distance_transform_edt(~boundary)


def _inward_targets(fg: np.ndarray, depth: np.ndarray, offset: int) -> np.ndarray | None:
    """Per-cell coordinates of the nearest foreground cell at depth >= offset."""
    deep = fg & (depth >= offset)
    if not deep.any():
        return None
    return np.stack(
        ndimage.distance_transform_edt(~deep, return_indices=True, return_distances=False)
    )


def _displace_inward(
    start: tuple[int, ...], offset: int, fg: np.ndarray, targets: np.ndarray
) -> tuple[int, ...]:
    """Move `offset` cells from a boundary cell toward the nearest deep cell.

    The direction to the nearest cell at the target depth approximates the
    inward boundary normal; the result is clamped back onto the foreground.
    """
    p = np.asarray(start, dtype=np.float64)
    target = targets[(slice(None),) + tuple(start)].astype(np.float64)
    vec = target - p
    length = float(np.linalg.norm(vec))
    if length == 0.0:
        return tuple(start)
    # never move more than `offset` cells, even when the deep cell is closer:
    # jumping onto it could land deeper than the offset
    for t in range(offset, -1, -1):
        cand = tuple(int(round(c)) for c in p + t * vec / length)
        if all(0 <= c < d for c, d in zip(cand, fg.shape)) and fg[cand]:
            return cand
    return tuple(start)


def _gt_extreme_cells(fg: np.ndarray) -> list[tuple[int, ...]]:
    """One cell per (axis, side) extreme, lexicographically smallest when ambiguous.

    Ordered axis-major: (0,min),(0,max),(1,min),(1,max),...
    """
    coords = np.argwhere(fg)
    cells = []
    for axis in range(fg.ndim):
        for side_max in (False, True):
            val = coords[:, axis].max() if side_max else coords[:, axis].min()
            candidates = coords[coords[:, axis] == val]
            idx = np.lexsort(candidates.T[::-1])[0]
            cells.append(tuple(int(c) for c in candidates[idx]))
    return cells


def simulate_margin_points(gt: BinaryMask, cfg: MarginPointConfig) -> SeedSet:
    """Simulate interior margin points from a ground-truth mask.

    Boundary cells nearest the axis extremes plus a few random boundary
    cells, all displaced inward along the approximate boundary normal.
    Deterministic under cfg.rng_seed.
    """
    fg = gt.data
    if not fg.any():
        raise ValidationError("ground-truth mask is empty")
    rank = gt.rank
    offset, margin, extra_max = cfg.resolved(rank)
    rng = np.random.default_rng(cfg.rng_seed)

    surf = surface_points(gt)
    boundary = np.zeros(fg.shape, dtype=bool)
    boundary[tuple(surf.T)] = True
    depth = _boundary_depth(boundary)

    extremes = _gt_extreme_cells(fg)
    n_near = cfg.near_extreme_count
    if n_near is None:
        n_near = int(rng.integers(3, 5)) if rank == 2 else int(rng.integers(5, 7))
    n_near = max(1, min(n_near, len(extremes)))
    chosen_idx = sorted(rng.choice(len(extremes), size=n_near, replace=False).tolist())
    chosen = [extremes[i] for i in chosen_idx]

    n_extra = int(rng.integers(0, extra_max + 1))
    if n_extra > 0:
        pool = [tuple(int(c) for c in p) for p in surf]
        pool = [p for p in pool if p not in set(chosen)]
        if pool:
            take = min(n_extra, len(pool))
            chosen.extend(pool[i] for i in sorted(rng.choice(len(pool), size=take, replace=False).tolist()))

    # thin-mask fallback: reduce the offset until some cell is deep enough
    effective_offset = offset
    targets = _inward_targets(fg, depth, effective_offset)
    while targets is None and effective_offset > 0:
        effective_offset -= 1
        targets = _inward_targets(fg, depth, effective_offset)
    if effective_offset != offset:
        logger.warning(
            "mask too thin for inward offset %d; falling back to %d", offset, effective_offset
        )
    points: list[tuple[int, ...]] = []
    for cell in chosen:
        moved = (
            cell if targets is None else _displace_inward(cell, effective_offset, fg, targets)
        )
        if moved not in points:
            points.append(moved)

    # guarantee rule 2: the relaxed box must cover the whole object
    safe_offset = min(effective_offset, margin)
    safe_targets = _inward_targets(fg, depth, safe_offset) if safe_offset > 0 else None
    gt_lo = [int(v) for v in np.argwhere(fg).min(axis=0)]
    gt_hi = [int(v) for v in np.argwhere(fg).max(axis=0)]
    for axis in range(rank):
        for side_max in (False, True):
            extreme_cell = extremes[2 * axis + (1 if side_max else 0)]
            arr = np.array(points)
            covered = (
                int(arr[:, axis].max()) + margin >= gt_hi[axis]
                if side_max
                else int(arr[:, axis].min()) - margin <= gt_lo[axis]
            )
            if not covered:
                moved = (
                    extreme_cell
                    if safe_targets is None
                    else _displace_inward(extreme_cell, safe_offset, fg, safe_targets)
                )
                if moved not in points:
                    points.append(moved)

    return SeedSet(tuple(points), SeedLabel.FOREGROUND)


def infer_relaxed_bbox(seeds: SeedSet, margin: int, dims) -> BoundingBox:
    """Axis-aligned box of the seeds expanded by `margin` per side, clamped to dims."""
    if seeds.is_empty():
        raise ValidationError("cannot infer a bounding box from an empty seed set")
    dims = tuple(int(d) for d in dims)
    seeds.check_within(dims)
    arr = np.array(seeds.points)
    lo = tuple(max(0, int(v) - int(margin)) for v in arr.min(axis=0))
    hi = tuple(min(d - 1, int(v) + int(margin)) for v, d in zip(arr.max(axis=0), dims))
    return BoundingBox(lo, hi)


def robot_refine_clicks(
    pred: BinaryMask, gt: BinaryMask, k: int, rng_seed: int = 0
) -> tuple[SeedSet, SeedSet]:
    """Simulated refinement clicks: up to `k` error components, largest first,
    clicked at each component's inner pole (max distance to the component border).

    Under-segmented components yield foreground clicks, over-segmented ones
    background clicks. pred == gt yields two empty sets (convergence).
    Fully deterministic; rng_seed is accepted for interface symmetry.
    """
    if pred.dims != gt.dims:
        raise ValidationError(f"mask dims mismatch: {pred.dims} vs {gt.dims}")
    if k < 1:
        raise ValidationError("k must be >= 1")
    error = pred.data ^ gt.data
    fg_clicks: list[tuple[int, ...]] = []
    bg_clicks: list[tuple[int, ...]] = []
    if error.any():
        structure = ndimage.generate_binary_structure(error.ndim, 1)
        labels, n_comp = ndimage.label(error, structure=structure)
        sizes = ndimage.sum_labels(error, labels, index=range(1, n_comp + 1))
        order = sorted(range(1, n_comp + 1), key=lambda c: (-sizes[c - 1], c))
        for comp_id in order[:k]:
            comp = labels == comp_id
            inner = ndimage.distance_transform_edt(comp)
            pole = np.unravel_index(int(np.argmax(inner)), comp.shape)
            pole = tuple(int(c) for c in pole)
            if gt.data[pole]:
                fg_clicks.append(pole)
            else:
                bg_clicks.append(pole)
    return (
        SeedSet(tuple(fg_clicks), SeedLabel.FOREGROUND),
        SeedSet(tuple(bg_clicks), SeedLabel.BACKGROUND),
    )
