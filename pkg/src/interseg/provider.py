"""Initial probability-pair providers: the slot a trained segmentation model
would occupy. A file provider ingests externally computed foreground maps; a
built-in statistical baseline (seed-affinity cue sharpened by an intensity
histogram likelihood) keeps the pipeline self-contained.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .formats import read_sgrid
from .grid import BoundingBox, ScalarGrid, crop, normalize
from .seeds import SeedSet
from .transforms import Connectivity, CueMap, egd

HISTOGRAM_BINS = 32
CUE_SPLIT = 0.5  # cue >= split counts as seed-like when building the histograms


@dataclass(frozen=True)
class ProbabilityPair:
    """Paired foreground/background maps; complementary within 1e-6."""

    fg: ScalarGrid
    bg: ScalarGrid

    def __post_init__(self):
        if self.fg.dims != self.bg.dims:
            raise ValidationError("fg/bg probability dims mismatch")
        for name, grid in (("fg", self.fg), ("bg", self.bg)):
            bad = np.argwhere((grid.data < 0) | (grid.data > 1))
            if bad.size:
                idx = tuple(int(c) for c in bad[0])
                raise ValidationError(
                    f"{name} probability out of [0,1] at index {idx}: {grid.data[idx]}"
                )
        if np.max(np.abs(self.fg.data + self.bg.data - 1.0)) > 1e-6:
            raise ValidationError("fg + bg must equal 1 element-wise")

    @property
    def dims(self) -> tuple[int, ...]:
        return self.fg.dims


def pair_from_fg(fg: ScalarGrid) -> ProbabilityPair:
    return ProbabilityPair(fg, ScalarGrid(1.0 - fg.data, fg.spacing))


def load_probability(path, expected_dims: tuple[int, ...] | None = None) -> ProbabilityPair:
    """Load a foreground map from a float SGRID file; bg is its complement."""
    fg = read_sgrid(path)
    bad = np.argwhere((fg.data < 0) | (fg.data > 1))
    if bad.size:
        idx = tuple(int(c) for c in bad[0])
        raise ValidationError(
            f"probability map {path} out of [0,1] at index {idx}: {fg.data[idx]}"
        )
    if expected_dims is not None and fg.dims != tuple(expected_dims):
        raise ValidationError(f"probability dims {fg.dims} do not match image dims {tuple(expected_dims)}")
    return pair_from_fg(fg)


def _histogram_likelihood(intensities: np.ndarray, cue: np.ndarray, bins: int) -> np.ndarray:
    """Sharpen a seed-affinity cue by Laplace-smoothed intensity likelihoods."""
    lo, hi = float(intensities.min()), float(intensities.max())
    if hi == lo:
        hi = lo + 1.0
    edges = np.linspace(lo, hi, bins + 1)
    which = np.clip(np.digitize(intensities, edges) - 1, 0, bins - 1)
    seedlike = cue >= CUE_SPLIT
    h_fg = np.bincount(which[seedlike], minlength=bins).astype(np.float64) + 1.0
    h_bg = np.bincount(which[~seedlike], minlength=bins).astype(np.float64) + 1.0
    h_fg /= h_fg.sum()
    h_bg /= h_bg.sum()
    num = cue * h_fg[which]
    den = num + (1.0 - cue) * h_bg[which]
    return num / den


def baseline_probability(
    image: ScalarGrid,
    margin_points: SeedSet,
    bbox: BoundingBox,
    cue: CueMap | None = None,
    connectivity: Connectivity = Connectivity.ORTHOGONAL,
) -> ProbabilityPair:
    """Statistical stand-in for a trained model.

    Inside `bbox`: the seed-affinity cue (by default the exponentialized
    geodesic cue of the margin points over the normalized crop) reweighted by
    32-bin intensity-histogram likelihoods. Outside: foreground probability 0.

    `cue` overrides the default encoding; it must live on the cropped grid.
    Deterministic: identical inputs give bit-identical outputs.
    """
    if margin_points.is_empty():
        raise ValidationError("baseline provider requires margin points")
    bbox.check_within(image.dims)
    for p in margin_points.points:
        if not bbox.contains(p):
            raise ValidationError(f"margin point {p} outside bounding box")

    sub = normalize(crop(image, bbox))
    local_points = SeedSet(
        tuple(tuple(c - l for c, l in zip(p, bbox.lo)) for p in margin_points.points),
        margin_points.label,
    )
    if cue is None:
        cue = egd(sub, local_points, connectivity)
    elif cue.grid.dims != sub.dims:
        raise ValidationError(f"cue dims {cue.grid.dims} do not match crop dims {sub.dims}")

    fg_local = _histogram_likelihood(sub.data.ravel(), cue.grid.data.ravel(), HISTOGRAM_BINS)
    fg = np.zeros(image.dims)
    fg[bbox.slices()] = fg_local.reshape(sub.dims)
    return pair_from_fg(ScalarGrid(fg, image.spacing))
