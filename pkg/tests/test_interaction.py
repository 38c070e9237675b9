"""Margin-point simulation, bbox inference, and robot-user click tests."""

import numpy as np
import pytest

from interseg.errors import ValidationError
from interseg.grid import BinaryMask
from interseg.interaction import (
    MarginPointConfig,
    infer_relaxed_bbox,
    robot_refine_clicks,
    simulate_margin_points,
)
from interseg.seeds import SeedLabel, SeedSet
from interseg.synthetic import make_blob_mask
from oracles import check_margin_point_rules


def test_simulate_requires_nonempty_gt():
    with pytest.raises(ValidationError):
        simulate_margin_points(BinaryMask(np.zeros((4, 4), dtype=bool)), MarginPointConfig())


def test_simulate_deterministic():
    gt = make_blob_mask((32, 32), np.random.default_rng(0))
    a = simulate_margin_points(gt, MarginPointConfig(rng_seed=5))
    b = simulate_margin_points(gt, MarginPointConfig(rng_seed=5))
    assert a.points == b.points
    c = simulate_margin_points(gt, MarginPointConfig(rng_seed=6))
    assert a.points != c.points or len(a.points) == len(c.points)  # seeds vary the draw


def test_simulate_rules_on_blobs():
    rng = np.random.default_rng(1)
    cfg = MarginPointConfig(rng_seed=3)
    for _ in range(10):
        gt = make_blob_mask((32, 32), rng)
        pts = simulate_margin_points(gt, cfg)
        offset, margin, _ = cfg.resolved(gt.rank)
        ok, why = check_margin_point_rules(pts.points, gt.data, offset, margin)
        assert ok, why


def test_simulate_thin_mask_falls_back():
    # 2-cell-wide bar cannot host an offset-3 interior point
    data = np.zeros((16, 16), dtype=bool)
    data[7:9, 2:14] = True
    pts = simulate_margin_points(BinaryMask(data), MarginPointConfig(rng_seed=0))
    for p in pts.points:
        assert data[p]


def test_infer_relaxed_bbox_clamps():
    seeds = SeedSet(((1, 1), (5, 9)), SeedLabel.FOREGROUND)
    box = infer_relaxed_bbox(seeds, 3, (8, 12))
    assert box.lo == (0, 0) and box.hi == (7, 11)
    with pytest.raises(ValidationError):
        infer_relaxed_bbox(SeedSet((), SeedLabel.FOREGROUND), 3, (8, 12))


def test_robot_converged_emits_nothing():
    gt = BinaryMask(np.eye(5, dtype=bool))
    fg, bg = robot_refine_clicks(gt, gt, 3)
    assert fg.is_empty() and bg.is_empty()


def test_robot_clicks_largest_components_first():
    pred = np.zeros((8, 8), dtype=bool)
    gt = np.zeros((8, 8), dtype=bool)
    gt[1:5, 1:5] = True  # missed 4x4 block -> under-segmentation
    pred[6:8, 6:8] = True  # spurious 2x2 block -> over-segmentation
    fg, bg = robot_refine_clicks(BinaryMask(pred), BinaryMask(gt), 1)
    # only the largest error component (the missed block) is clicked
    assert len(fg) == 1 and bg.is_empty()
    assert gt[fg.points[0]]
    fg2, bg2 = robot_refine_clicks(BinaryMask(pred), BinaryMask(gt), 2)
    assert len(fg2) == 1 and len(bg2) == 1
    assert not gt[bg2.points[0]]


def test_robot_click_at_inner_pole():
    pred = np.zeros((9, 9), dtype=bool)
    gt = np.zeros((9, 9), dtype=bool)
    gt[1:8, 1:8] = True
    fg, bg = robot_refine_clicks(BinaryMask(pred), BinaryMask(gt), 1)
    assert fg.points == ((4, 4),)  # center of the missed square


def test_robot_validates_inputs():
    a = BinaryMask(np.zeros((3, 3), dtype=bool))
    b = BinaryMask(np.zeros((4, 4), dtype=bool))
    with pytest.raises(ValidationError):
        robot_refine_clicks(a, b, 1)
    with pytest.raises(ValidationError):
        robot_refine_clicks(a, a, 0)
