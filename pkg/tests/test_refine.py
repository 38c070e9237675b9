"""Fusion algebra and exact CRF minimization tests."""

import numpy as np
import pytest

from interseg.errors import ValidationError
from interseg.grid import ScalarGrid
from interseg.provider import pair_from_fg
from interseg.refine import (
    CalibratedPair,
    CrfParams,
    FusionInputs,
    fuse,
    labeling_energy_scaled,
    solve_crf,
)
from interseg.seeds import SeedLabel, SeedSet
from oracles import enumerate_crf_minimum, labeling_energy


def _fg(*pts):
    return SeedSet(tuple(pts), SeedLabel.FOREGROUND)


def _bg(*pts):
    return SeedSet(tuple(pts), SeedLabel.BACKGROUND)


def _random_inputs(rng, shape):
    image = ScalarGrid(rng.normal(size=shape))
    prob = pair_from_fg(ScalarGrid(rng.uniform(0.0, 1.0, size=shape)))
    cells = [tuple(int(c) for c in p) for p in np.argwhere(np.ones(shape))]
    picks = rng.choice(len(cells), size=3, replace=False)
    margin = _fg(cells[picks[0]])
    fg_clicks = _fg(cells[picks[1]])
    bg_clicks = _bg(cells[picks[2]])
    return FusionInputs(prob, fg_clicks, bg_clicks, margin, image)


def test_fusion_complementary_and_click_behavior():
    rng = np.random.default_rng(0)
    for _ in range(20):
        shape = tuple(rng.integers(3, 8, size=2))
        inputs = _random_inputs(rng, shape)
        cal = fuse(inputs)
        np.testing.assert_allclose(cal.fg.data + cal.bg.data, 1.0, atol=1e-9)
        for p in inputs.fg_clicks.points:
            assert cal.alpha.data[p] == 1.0
            assert cal.fg.data[p] >= 0.5
        for p in inputs.bg_clicks.points:
            assert cal.alpha.data[p] == 1.0
            assert cal.bg.data[p] >= 0.5


def test_fusion_missing_side_uses_constant():
    rng = np.random.default_rng(1)
    image = ScalarGrid(rng.normal(size=(4, 4)))
    prob = pair_from_fg(ScalarGrid(rng.uniform(size=(4, 4))))
    cal = fuse(FusionInputs(prob, _fg(), _bg(), _fg((1, 1)), image))
    # only the margin-point side exists; alpha still peaks at that point
    assert cal.alpha.data[1, 1] == pytest.approx(1.0)
    assert cal.fg.data[1, 1] > 0.99


def test_fusion_requires_click_source():
    image = ScalarGrid(np.zeros((3, 3)))
    prob = pair_from_fg(ScalarGrid(np.full((3, 3), 0.5)))
    with pytest.raises(ValidationError):
        fuse(FusionInputs(prob, _fg(), _bg(), _fg(), image))


def test_fusion_far_from_clicks_keeps_prior():
    # constant bright band forces a huge geodesic distance to the far corner
    data = np.zeros((1, 9))
    data[0, 4] = 1000.0
    image = ScalarGrid(data)
    prob = pair_from_fg(ScalarGrid(np.full((1, 9), 0.37)))
    cal = fuse(FusionInputs(prob, _fg(), _bg(), _fg((0, 0)), image))
    np.testing.assert_allclose(cal.fg.data[0, 8], 0.37, atol=1e-9)


def test_crf_params_validation():
    with pytest.raises(ValidationError):
        CrfParams(sigma=0.0)
    with pytest.raises(ValidationError):
        CrfParams(lam=-1.0)


def _calibrated_from_fg(fg_data, spacing=None):
    fg = ScalarGrid(fg_data, spacing)
    return CalibratedPair(fg, ScalarGrid(1.0 - fg.data, spacing), ScalarGrid(np.zeros_like(fg_data), spacing))


def test_solve_crf_matches_enumeration_small():
    rng = np.random.default_rng(2)
    params = CrfParams()
    for trial in range(15):
        shape = (3, 3) if trial % 2 == 0 else (2, 2, 2)
        image = ScalarGrid(rng.normal(size=shape))
        r = rng.uniform(0.02, 0.98, size=shape)
        cells = [tuple(int(c) for c in p) for p in np.argwhere(np.ones(shape))]
        picks = rng.choice(len(cells), size=2, replace=False)
        fg_clicks = _fg(cells[picks[0]])
        bg_clicks = _bg(cells[picks[1]])
        labeling = solve_crf(image, _calibrated_from_fg(r), fg_clicks, bg_clicks, params)
        want, _ = enumerate_crf_minimum(
            image.data, r, fg_clicks.points, bg_clicks.points,
            params.lam, params.sigma, params.capacity_scale, params.prob_clamp_epsilon,
        )
        got = labeling_energy(
            image.data, r, labeling.mask.data.astype(int),
            params.lam, params.sigma, params.capacity_scale, params.prob_clamp_epsilon,
        )
        assert got == want
        assert labeling.energy_scaled == got
        for p in fg_clicks.points:
            assert labeling.mask.data[p]
        for p in bg_clicks.points:
            assert not labeling.mask.data[p]


def test_solve_crf_contradictory_clicks():
    image = ScalarGrid(np.zeros((2, 2)))
    cal = _calibrated_from_fg(np.full((2, 2), 0.5))
    with pytest.raises(ValidationError, match="contradictory"):
        solve_crf(image, cal, _fg((0, 0)), _bg((0, 0)), CrfParams())


def test_solve_crf_hard_constraint_overrides_unary():
    # probability says background everywhere, a fg click flips its cell
    image = ScalarGrid(np.zeros((3, 3)))
    cal = _calibrated_from_fg(np.full((3, 3), 0.01))
    labeling = solve_crf(image, cal, _fg((1, 1)), _bg(), CrfParams(lam=0.0001))
    assert labeling.mask.data[1, 1]
    assert labeling.mask.data.sum() == 1


def test_energy_accessor_consistent():
    rng = np.random.default_rng(3)
    image = ScalarGrid(rng.normal(size=(3, 3)))
    cal = _calibrated_from_fg(rng.uniform(0.1, 0.9, size=(3, 3)))
    params = CrfParams()
    labeling = solve_crf(image, cal, _fg((0, 0)), _bg((2, 2)), params)
    assert labeling.energy == pytest.approx(labeling.energy_scaled / params.capacity_scale)
    recomputed = labeling_energy_scaled(labeling.mask, cal, image, params)
    assert recomputed == labeling.energy_scaled
