"""End-to-end orchestration: the two-stage interactive pipeline, the robot
evaluation harness, and the encoding-method benchmark sweep.

Stage 1: margin points -> relaxed bbox -> crop -> normalize -> resample to
the working size -> seed cue -> probability provider -> thresholded mask.
Stage 2 (repeatable): fuse accumulated clicks with the initial probabilities
and re-solve the hard-constrained CRF, pasting the result back to native
resolution.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ValidationError
from .grid import (
    BinaryMask,
    BoundingBox,
    ScalarGrid,
    crop,
    normalize,
    resample,
    resample_mask,
)
from .interaction import MarginPointConfig, infer_relaxed_bbox, robot_refine_clicks, simulate_margin_points
from .metrics import assd, dice
from .provider import ProbabilityPair, baseline_probability, load_probability, pair_from_fg
from .refine import CalibratedPair, CrfParams, FusionInputs, DEFAULT_MISSING_DISTANCE, fuse, solve_crf
from .seeds import SeedLabel, SeedSet, empty_seeds
from .synthetic import CorpusItem
from .transforms import (
    Connectivity,
    CueMap,
    egd,
    euclidean_distance,
    gaussian_heatmap,
    geodesic_distance,
    truncate_rescale,
)

DEFAULT_WORKING_2D = (64, 64)
DEFAULT_WORKING_3D = (64, 96, 96)

ENCODING_SWEEP = {
    "euclidean": [0.2, 0.4, 0.6, 0.8],
    "gaussian": [3.0, 6.0, 9.0, 12.0],
    "geodesic": [0.2, 0.4, 0.6, 0.8],
    "egd": [None],  # parameter-free
}


@dataclass(frozen=True)
class PipelineConfig:
    working_dims: tuple[int, ...] | None = None  # default by rank
    margin: MarginPointConfig = field(default_factory=MarginPointConfig)
    crf: CrfParams = field(default_factory=CrfParams)
    missing_distance: float = DEFAULT_MISSING_DISTANCE
    fusion: bool = True  # False reproduces the no-fusion graph-cut ablation
    threshold: float = 0.5
    connectivity: Connectivity = Connectivity.ORTHOGONAL

    def working_dims_for(self, rank: int) -> tuple[int, ...]:
        if self.working_dims is not None:
            if len(self.working_dims) != rank:
                raise ValidationError("working_dims rank mismatch")
            return tuple(int(d) for d in self.working_dims)
        return DEFAULT_WORKING_2D if rank == 2 else DEFAULT_WORKING_3D


def map_to_working(
    point: tuple[int, ...], bbox: BoundingBox, working_dims: tuple[int, ...]
) -> tuple[int, ...]:
    """Native grid index -> working-resolution index (corner-aligned scaling).

    Points outside the box are clamped onto it first.
    """
    out = []
    for c, lo, hi, w in zip(point, bbox.lo, bbox.hi, working_dims):
        local = min(max(int(c), lo), hi) - lo
        span = hi - lo
        out.append(int(round(local * (w - 1) / span)) if span > 0 else 0)
    return tuple(out)


def _map_seeds(seeds: SeedSet, bbox: BoundingBox, working_dims) -> SeedSet:
    mapped = list(dict.fromkeys(map_to_working(p, bbox, working_dims) for p in seeds.points))
    return SeedSet(tuple(mapped), seeds.label)


def working_mask_to_native(
    mask_w: BinaryMask, bbox: BoundingBox, native_dims: tuple[int, ...]
) -> BinaryMask:
    """Resample a working-resolution mask back into a full-size native mask.

    Everything outside the bounding box is background (the pipeline only
    segments within the crop).
    """
    as_prob = ScalarGrid(mask_w.data.astype(np.float64))
    local = resample_mask(as_prob, bbox.shape())
    full = np.zeros(native_dims, dtype=bool)
    full[bbox.slices()] = local.data
    return BinaryMask(full)


@dataclass(frozen=True)
class SegContext:
    """One segmentation in progress: the crop, its working-resolution data,
    the initial probabilities, and all clicks accumulated so far."""

    image: ScalarGrid
    bbox: BoundingBox
    working: ScalarGrid  # normalized, resampled crop
    working_points: SeedSet
    prob: ProbabilityPair
    config: PipelineConfig
    fg_clicks: SeedSet = field(default_factory=lambda: empty_seeds(SeedLabel.FOREGROUND))
    bg_clicks: SeedSet = field(default_factory=lambda: empty_seeds(SeedLabel.BACKGROUND))
    native_fg: tuple[tuple[int, ...], ...] = ()
    native_bg: tuple[tuple[int, ...], ...] = ()

    def stage1_mask(self) -> BinaryMask:
        mask_w = BinaryMask(self.prob.fg.data >= self.config.threshold)
        return working_mask_to_native(mask_w, self.bbox, self.image.dims)


def make_baseline_provider(connectivity: Connectivity = Connectivity.ORTHOGONAL):
    """Provider backed by the built-in statistical baseline."""

    def provide(working: ScalarGrid, working_points: SeedSet, cue: CueMap, **_ignored) -> ProbabilityPair:
        full_box = BoundingBox((0,) * working.rank, tuple(d - 1 for d in working.dims))
        return baseline_probability(working, working_points, full_box, cue=cue, connectivity=connectivity)

    return provide


def make_file_provider(path):
    """Provider reading an externally computed foreground map (float SGRID).

    The map may live at native resolution (it is cropped and resampled to the
    working grid) or directly at working resolution.
    """

    def provide(
        working: ScalarGrid,
        working_points: SeedSet,
        cue: CueMap,
        native: ScalarGrid | None = None,
        bbox: BoundingBox | None = None,
    ) -> ProbabilityPair:
        pair = load_probability(path)
        # native interpretation first: when native and working dims coincide,
        # the map must still be cropped to the bounding box
        if native is not None and pair.dims == native.dims:
            sub = crop(pair.fg, bbox)
            fg = resample(sub, working.dims)
            fg = ScalarGrid(np.clip(fg.data, 0.0, 1.0), fg.spacing)
            return pair_from_fg(fg)
        if pair.dims == working.dims:
            return pair
        raise ValidationError(
            f"probability dims {pair.dims} match neither image {None if native is None else native.dims}"
            f" nor working {working.dims}"
        )

    return provide


def stage1(
    image: ScalarGrid,
    margin_points: SeedSet,
    provider,
    config: PipelineConfig,
    cue_override=None,
) -> tuple[SegContext, BinaryMask, dict[str, float]]:
    """Run the first stage; returns the session context, the native-resolution
    mask, and per-stage wall-clock timings.

    `cue_override(working, working_points) -> CueMap` replaces the default
    exponentialized-geodesic encoding (used by the encoding benchmark).
    """
    if margin_points.is_empty():
        raise ValidationError("stage 1 requires margin points")
    margin_points.check_within(image.dims)
    timings: dict[str, float] = {}

    t = time.perf_counter()
    _, bbox_margin, _ = config.margin.resolved(image.rank)
    bbox = infer_relaxed_bbox(margin_points, bbox_margin, image.dims)
    timings["bbox"] = time.perf_counter() - t

    t = time.perf_counter()
    working_dims = config.working_dims_for(image.rank)
    working = resample(normalize(crop(image, bbox)), working_dims)
    working_points = _map_seeds(margin_points, bbox, working_dims)
    timings["preprocess"] = time.perf_counter() - t

    t = time.perf_counter()
    if cue_override is None:
        cue = egd(working, working_points, config.connectivity)
    else:
        cue = cue_override(working, working_points)
    timings["encode"] = time.perf_counter() - t

    t = time.perf_counter()
    prob = provider(working=working, working_points=working_points, cue=cue, native=image, bbox=bbox)
    timings["provider"] = time.perf_counter() - t

    ctx = SegContext(
        image=image,
        bbox=bbox,
        working=working,
        working_points=working_points,
        prob=prob,
        config=config,
    )
    t = time.perf_counter()
    mask = ctx.stage1_mask()
    timings["paste"] = time.perf_counter() - t
    return ctx, mask, timings


def refine_step(
    ctx: SegContext,
    fg_new: tuple[tuple[int, ...], ...] = (),
    bg_new: tuple[tuple[int, ...], ...] = (),
) -> tuple[SegContext, BinaryMask, dict[str, float]]:
    """Fuse accumulated clicks with the initial probabilities, solve the CRF
    at working resolution, and paste the result back to native resolution.

    Clicked native cells keep their clicked labels in the returned mask.
    Zero new clicks is a no-op returning the thresholded initial mask.
    """
    timings: dict[str, float] = {}
    fg_new = tuple(tuple(int(c) for c in p) for p in fg_new)
    bg_new = tuple(tuple(int(c) for c in p) for p in bg_new)
    if not fg_new and not bg_new:
        return ctx, ctx.stage1_mask(), {"noop": 0.0}
    if set(fg_new) & set(bg_new):
        raise ValidationError("contradictory clicks: same cell labeled fg and bg in one batch")
    for p in fg_new + bg_new:
        if len(p) != ctx.image.rank:
            raise ValidationError(f"click {p} rank does not match image")
        if any(not (0 <= c < d) for c, d in zip(p, ctx.image.dims)):
            raise ValidationError(f"click {p} out of bounds for dims {ctx.image.dims}")

    working_dims = ctx.working.dims
    fg_w = list(ctx.fg_clicks.points)
    bg_w = list(ctx.bg_clicks.points)
    for p in fg_new:
        w = map_to_working(p, ctx.bbox, working_dims)
        if w not in fg_w:
            fg_w.append(w)
    for p in bg_new:
        w = map_to_working(p, ctx.bbox, working_dims)
        if w not in bg_w:
            bg_w.append(w)
    conflict = set(fg_w) & set(bg_w)
    if conflict:
        raise ValidationError(
            f"contradictory clicks at working cell {sorted(conflict)[0]} (maps to both labels)"
        )
    fg_clicks = SeedSet(tuple(fg_w), SeedLabel.FOREGROUND)
    bg_clicks = SeedSet(tuple(bg_w), SeedLabel.BACKGROUND)

    t = time.perf_counter()
    if ctx.config.fusion:
        calibrated = fuse(
            FusionInputs(
                prob=ctx.prob,
                fg_clicks=fg_clicks,
                bg_clicks=bg_clicks,
                margin_points=ctx.working_points,
                image=ctx.working,
                missing_distance=ctx.config.missing_distance,
                connectivity=ctx.config.connectivity,
            )
        )
    else:
        # ablation: naive graph cut on the raw initial probabilities
        calibrated = CalibratedPair(
            fg=ctx.prob.fg,
            bg=ctx.prob.bg,
            alpha=ScalarGrid(np.zeros(working_dims), ctx.working.spacing),
        )
    timings["fuse"] = time.perf_counter() - t

    t = time.perf_counter()
    labeling = solve_crf(ctx.working, calibrated, fg_clicks, bg_clicks, ctx.config.crf)
    timings["crf"] = time.perf_counter() - t

    t = time.perf_counter()
    mask = working_mask_to_native(labeling.mask, ctx.bbox, ctx.image.dims)
    data = mask.data.copy()
    new_ctx = replace(
        ctx,
        fg_clicks=fg_clicks,
        bg_clicks=bg_clicks,
        native_fg=ctx.native_fg + tuple(p for p in fg_new if p not in ctx.native_fg),
        native_bg=ctx.native_bg + tuple(p for p in bg_new if p not in ctx.native_bg),
    )
    # hard constraints propagate to native resolution
    for p in new_ctx.native_fg:
        data[p] = True
    for p in new_ctx.native_bg:
        data[p] = False
    timings["paste"] = time.perf_counter() - t
    return new_ctx, BinaryMask(data), timings


def run_pipeline(
    image: ScalarGrid,
    margin_points: SeedSet,
    provider,
    config: PipelineConfig,
    gt: BinaryMask | None = None,
    refine_rounds: int = 0,
    clicks_per_round: int = 3,
) -> tuple[BinaryMask, dict]:
    """Full two-stage run with optional robot-user refinement (needs gt).

    Returns the final mask and a report with per-stage timings and, when
    ground truth is supplied, the Dice/ASSD trajectory.
    """
    ctx, mask, timings = stage1(image, margin_points, provider, config)
    report: dict = {"timings": timings, "rounds": []}
    trajectory = []
    if gt is not None:
        trajectory.append(dice(mask, gt))
    for _ in range(refine_rounds):
        if gt is None:
            break
        fg_c, bg_c = robot_refine_clicks(mask, gt, clicks_per_round)
        if fg_c.is_empty() and bg_c.is_empty():
            break  # converged
        ctx, mask, step_t = refine_step(ctx, fg_c.points, bg_c.points)
        report["rounds"].append(
            {"fg_clicks": len(fg_c), "bg_clicks": len(bg_c), "timings": step_t}
        )
        trajectory.append(dice(mask, gt))
    if gt is not None:
        report["dice"] = trajectory[-1]
        report["dice_trajectory"] = trajectory
        if mask.data.any() and gt.data.any():
            report["assd"] = assd(mask, gt, image.spacing)
    return mask, report


def _encoding_cue_factory(method: str, parameter: float | None, connectivity: Connectivity):
    """Seed-affinity cue for an encoding method. Distance-based encodings are
    inverted after rescale-truncation so 1 always means seed-like."""

    def factory(working: ScalarGrid, points: SeedSet) -> CueMap:
        if method == "egd":
            return egd(working, points, connectivity)
        if method == "gaussian":
            return gaussian_heatmap(working.dims, points, parameter)
        if method == "euclidean":
            dmap = euclidean_distance(working.dims, working.spacing, points)
        elif method == "geodesic":
            dmap = geodesic_distance(working, points, connectivity)
        else:
            raise ValidationError(f"unknown encoding method {method!r}")
        truncated = truncate_rescale(dmap, parameter)
        return CueMap(ScalarGrid(1.0 - truncated.grid.data, truncated.grid.spacing))

    return factory


def benchmark_encodings(
    corpus: list[CorpusItem],
    config: PipelineConfig | None = None,
    sweep: dict | None = None,
) -> list[dict]:
    """Stage-1 Dice/ASSD for every encoding x parameter cell of the sweep."""
    if not corpus:
        raise ValidationError("benchmark requires a non-empty corpus")
    config = config or PipelineConfig()
    sweep = sweep or ENCODING_SWEEP
    provider = make_baseline_provider(config.connectivity)
    rows = []
    for item in corpus:
        points = simulate_margin_points(item.gt, config.margin)
        for method, parameters in sweep.items():
            for parameter in parameters:
                factory = _encoding_cue_factory(method, parameter, config.connectivity)
                _, mask, _ = stage1(item.image, points, provider, config, cue_override=factory)
                row = {
                    "image": item.name,
                    "method": method,
                    "parameter": "" if parameter is None else parameter,
                    "dice": dice(mask, item.gt),
                }
                row["assd"] = (
                    assd(mask, item.gt, item.image.spacing)
                    if mask.data.any() and item.gt.data.any()
                    else float("nan")
                )
                rows.append(row)
    return rows


def benchmark_rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=["image", "method", "parameter", "dice", "assd"])
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _mean_std(values) -> dict:
    arr = np.asarray(values, dtype=np.float64)
    return {
        "mean": float(arr.mean()),
        "std": float(arr.std()),
        "formatted": f"{arr.mean():.4f}±{arr.std():.4f}",
    }


def robot_eval(
    corpus: list[CorpusItem],
    rounds: int = 5,
    k_clicks: int = 3,
    config: PipelineConfig | None = None,
) -> dict:
    """Robot-user evaluation: per-image Dice/ASSD trajectories across
    refinement rounds plus a clicks-to-convergence histogram."""
    if not corpus:
        raise ValidationError("robot evaluation requires a non-empty corpus")
    config = config or PipelineConfig()
    provider = make_baseline_provider(config.connectivity)
    per_image = []
    for item in corpus:
        points = simulate_margin_points(item.gt, config.margin)
        mask, report = run_pipeline(
            item.image, points, provider, config, gt=item.gt,
            refine_rounds=rounds, clicks_per_round=k_clicks,
        )
        clicks = sum(r["fg_clicks"] + r["bg_clicks"] for r in report["rounds"])
        per_image.append(
            {
                "image": item.name,
                "dice_trajectory": report["dice_trajectory"],
                "final_dice": report["dice"],
                "final_assd": report.get("assd"),
                "refinement_clicks": clicks,
                "rounds_used": len(report["rounds"]),
            }
        )
    histogram: dict[int, int] = {}
    for entry in per_image:
        histogram[entry["refinement_clicks"]] = histogram.get(entry["refinement_clicks"], 0) + 1
    return {
        "images": per_image,
        "stage1_dice": _mean_std([e["dice_trajectory"][0] for e in per_image]),
        "final_dice": _mean_std([e["final_dice"] for e in per_image]),
        "clicks_to_convergence_histogram": {str(k): v for k, v in sorted(histogram.items())},
        "non_decreasing_fraction": float(
            np.mean(
                [
                    all(b >= a - 1e-12 for a, b in zip(e["dice_trajectory"], e["dice_trajectory"][1:]))
                    for e in per_image
                ]
            )
        ),
    }
