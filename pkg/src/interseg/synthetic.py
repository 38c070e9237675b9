"""Seeded synthetic corpus: smoothed-noise blob masks rendered as
two-intensity images with Gaussian noise. Stands in for clinical data in the
evaluation harness and benchmarks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .grid import BinaryMask, ScalarGrid

DEFAULT_FG_INTENSITY = 200.0
DEFAULT_BG_INTENSITY = 50.0
DEFAULT_NOISE_SIGMA = 10.0
DEFAULT_NOISE_CORRELATION = 1.0  # white noise is unrealistically hostile to path costs


@dataclass(frozen=True)
class CorpusItem:
    image: ScalarGrid
    gt: BinaryMask
    name: str


def make_blob_mask(
    shape: tuple[int, ...],
    rng: np.random.Generator,
    smooth: float = 6.0,
    fill_fraction: float = 0.25,
    min_cells: int = 40,
) -> BinaryMask:
    """Largest connected component of thresholded smoothed noise, holes filled.

    Retries with a lower threshold until the blob reaches `min_cells`.
    """
    fraction = fill_fraction
    for _ in range(8):
        noise = ndimage.gaussian_filter(rng.normal(size=shape), smooth)
        mask = noise > np.quantile(noise, 1.0 - fraction)
        labels, n = ndimage.label(mask)
        if n > 0:
            sizes = ndimage.sum_labels(mask, labels, index=range(1, n + 1))
            mask = labels == (1 + int(np.argmax(sizes)))
            mask = ndimage.binary_fill_holes(mask)
            if int(mask.sum()) >= min_cells:
                return BinaryMask(mask)
        fraction = min(0.9, fraction * 1.5)
    raise RuntimeError("failed to generate a usable blob mask")


def render_two_intensity(
    gt: BinaryMask,
    rng: np.random.Generator,
    fg_intensity: float = DEFAULT_FG_INTENSITY,
    bg_intensity: float = DEFAULT_BG_INTENSITY,
    noise_sigma: float = DEFAULT_NOISE_SIGMA,
    noise_correlation: float = DEFAULT_NOISE_CORRELATION,
) -> ScalarGrid:
    data = np.where(gt.data, fg_intensity, bg_intensity)
    noise = rng.normal(size=gt.dims)
    if noise_correlation > 0:
        noise = ndimage.gaussian_filter(noise, noise_correlation)
        std = noise.std()
        if std > 0:
            noise /= std
    return ScalarGrid(data + noise_sigma * noise)


def make_corpus(
    n: int,
    shape: tuple[int, ...] = (64, 64),
    seed: int = 0,
    noise_sigma: float = DEFAULT_NOISE_SIGMA,
) -> list[CorpusItem]:
    """Deterministic corpus of two-intensity blobs with Gaussian noise."""
    rng = np.random.default_rng(seed)
    items = []
    for i in range(n):
        gt = make_blob_mask(shape, rng)
        image = render_two_intensity(gt, rng, noise_sigma=noise_sigma)
        items.append(CorpusItem(image=image, gt=gt, name=f"blob_{i:03d}"))
    return items
