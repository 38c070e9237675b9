"""Evaluation measures: Dice overlap and average symmetric surface distance."""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from .errors import ValidationError
from .grid import BinaryMask


def _check_dims(pred: BinaryMask, gt: BinaryMask) -> None:
    if pred.dims != gt.dims:
        raise ValidationError(f"mask dims mismatch: {pred.dims} vs {gt.dims}")


def dice(pred: BinaryMask, gt: BinaryMask) -> float:
    """Overlap score 2|A∩B| / (|A|+|B|); both-empty defined as 1.0."""
    _check_dims(pred, gt)
    a, b = pred.data, gt.data
    total = int(a.sum()) + int(b.sum())
    if total == 0:
        return 1.0
    return 2.0 * int(np.logical_and(a, b).sum()) / total


def surface_points(mask: BinaryMask) -> np.ndarray:
    """Foreground cells with an orthogonal background neighbor (grid edge counts).

    Same orthogonal connectivity as the CRF pairwise edges.
    """
    data = mask.data
    boundary = np.zeros(data.shape, dtype=bool)
    for axis in range(data.ndim):
        lo = [slice(None)] * data.ndim
        hi = [slice(None)] * data.ndim
        lo[axis] = slice(None, -1)
        hi[axis] = slice(1, None)
        diff = data[tuple(lo)] != data[tuple(hi)]
        boundary[tuple(lo)] |= diff
        boundary[tuple(hi)] |= diff
        edge = [slice(None)] * data.ndim
        edge[axis] = 0
        boundary[tuple(edge)] = True
        edge[axis] = -1
        boundary[tuple(edge)] = True
    return np.argwhere(data & boundary)


def assd(pred: BinaryMask, gt: BinaryMask, spacing=None) -> float:
    """Average symmetric surface distance between boundary point sets.

    Exact nearest-surface-point Euclidean distances, spacing-scaled.
    """
    _check_dims(pred, gt)
    if not pred.data.any() or not gt.data.any():
        raise ValidationError("assd undefined for empty masks")
    spacing = np.asarray(spacing if spacing is not None else (1.0,) * pred.rank, dtype=np.float64)
    if spacing.shape[0] != pred.rank:
        raise ValidationError("spacing rank does not match mask rank")
    sp = surface_points(pred) * spacing
    sg = surface_points(gt) * spacing
    d_pg = cKDTree(sg).query(sp)[0]
    d_gp = cKDTree(sp).query(sg)[0]
    return float((d_pg.sum() + d_gp.sum()) / (len(sp) + len(sg)))
