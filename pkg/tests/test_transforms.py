"""Encoding transform tests: geodesic/EGD semantics, Euclidean and Gaussian
encodings, and rescale-truncation."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from interseg.errors import ValidationError
from interseg.grid import ScalarGrid
from interseg.seeds import SeedLabel, SeedSet
from interseg.transforms import (
    Connectivity,
    egd,
    euclidean_distance,
    gaussian_heatmap,
    geodesic_distance,
    truncate_rescale,
)


def _seeds(*points):
    return SeedSet(tuple(points), SeedLabel.FOREGROUND)


def test_geodesic_requires_seeds():
    grid = ScalarGrid(np.zeros((3, 3)))
    with pytest.raises(ValidationError):
        geodesic_distance(grid, SeedSet((), SeedLabel.FOREGROUND))


def test_geodesic_constant_image():
    grid = ScalarGrid(np.full((4, 6), 2.0))
    dist = geodesic_distance(grid, _seeds((1, 1)))
    assert np.all(dist.grid.data == 0.0)


def test_geodesic_step_image():
    # 1D profile: crossing the step costs exactly the jump, once
    grid = ScalarGrid(np.array([[0.0, 0.0, 5.0, 5.0]]))
    dist = geodesic_distance(grid, _seeds((0, 0)))
    np.testing.assert_allclose(dist.grid.data[0], [0.0, 0.0, 5.0, 5.0])


def test_geodesic_ignores_spacing():
    rng = np.random.default_rng(0)
    data = rng.normal(size=(5, 5))
    a = geodesic_distance(ScalarGrid(data), _seeds((2, 2)))
    b = geodesic_distance(ScalarGrid(data, spacing=(3.0, 0.25)), _seeds((2, 2)))
    np.testing.assert_array_equal(a.grid.data, b.grid.data)


def test_geodesic_full_connectivity_never_longer():
    rng = np.random.default_rng(1)
    grid = ScalarGrid(rng.normal(size=(6, 6)))
    ortho = geodesic_distance(grid, _seeds((0, 0)), Connectivity.ORTHOGONAL)
    full = geodesic_distance(grid, _seeds((0, 0)), Connectivity.FULL)
    assert np.all(full.grid.data <= ortho.grid.data + 1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_geodesic_adding_seeds_never_increases(seed):
    rng = np.random.default_rng(seed)
    shape = tuple(rng.integers(2, 7, size=2))
    grid = ScalarGrid(rng.normal(size=shape))
    cells = [tuple(int(c) for c in p) for p in np.argwhere(np.ones(shape))]
    picks = rng.choice(len(cells), size=3, replace=False)
    one = geodesic_distance(grid, _seeds(cells[picks[0]]))
    more = geodesic_distance(grid, _seeds(*(cells[p] for p in picks)))
    assert np.all(more.grid.data <= one.grid.data + 1e-12)


def test_egd_is_exp_of_distance_and_one_at_seeds():
    rng = np.random.default_rng(2)
    grid = ScalarGrid(rng.normal(size=(5, 7)))
    seeds = _seeds((1, 2), (4, 6))
    dist = geodesic_distance(grid, seeds)
    cue = egd(grid, seeds)
    np.testing.assert_allclose(cue.grid.data, np.exp(-dist.grid.data))
    for p in seeds.points:
        assert cue.grid.data[p] == 1.0


def test_euclidean_distance_spacing():
    dist = euclidean_distance((3, 3), (2.0, 1.0), _seeds((0, 0)))
    np.testing.assert_allclose(dist.grid.data[2, 2], np.hypot(4.0, 2.0))
    assert dist.grid.data[0, 0] == 0.0


def test_gaussian_heatmap_max_over_seeds():
    cue = gaussian_heatmap((1, 9), _seeds((0, 0), (0, 8)), sigma=2.0)
    assert cue.grid.data[0, 0] == 1.0 and cue.grid.data[0, 8] == 1.0
    expected = np.exp(-(4.0**2) / (2 * 2.0**2))
    np.testing.assert_allclose(cue.grid.data[0, 4], expected)
    with pytest.raises(ValidationError):
        gaussian_heatmap((1, 9), _seeds((0, 0)), sigma=0.0)


def test_truncate_rescale_example():
    from interseg.transforms import DistanceMap

    dmap = DistanceMap(ScalarGrid(np.array([[0.0, 2.0, 4.0, 8.0]])))
    out = truncate_rescale(dmap, 0.5)
    np.testing.assert_allclose(out.grid.data[0], [0.0, 0.5, 1.0, 1.0])
    zero = truncate_rescale(DistanceMap(ScalarGrid(np.zeros((2, 2)))), 0.5)
    assert np.all(zero.grid.data == 0.0)
    with pytest.raises(ValidationError):
        truncate_rescale(dmap, 0.0)
