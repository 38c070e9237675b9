"""Command-line interface.

Subcommands: pipeline, encode, refine, simulate-clicks, metrics, bench,
robot-eval, serve. Options may be preloaded from a JSON config file passed
via --config; explicit flags override file values. Exit codes: 0 success,
2 validation error, 3 I/O error.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from .errors import IoError, ValidationError
from .formats import DTYPE_UINT8, load_image, read_sgrid, write_sgrid, write_sgrid_bytes
from .grid import BinaryMask, ScalarGrid
from .interaction import MarginPointConfig, robot_refine_clicks, simulate_margin_points
from .metrics import assd, dice
from .pipeline import (
    ENCODING_SWEEP,
    PipelineConfig,
    benchmark_encodings,
    benchmark_rows_to_csv,
    make_baseline_provider,
    make_file_provider,
    refine_step,
    robot_eval,
    run_pipeline,
    stage1,
)
from .refine import CrfParams
from .seeds import load_seeds, seeds_to_json
from .synthetic import make_corpus
from .transforms import (
    DEFAULT_GAUSSIAN_SIGMA,
    Connectivity,
    egd,
    euclidean_distance,
    gaussian_heatmap,
    geodesic_distance,
    truncate_rescale,
)

EXIT_VALIDATION = 2
EXIT_IO = 3


def _exit_codes(fn):
    """Map domain errors onto the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ValidationError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_VALIDATION)
        except (IoError, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_IO)

    return wrapper


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        obj = json.loads(Path(path).read_text())
    except OSError as exc:
        raise IoError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid config JSON in {path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise ValidationError("config JSON must be an object")
    return obj


def _resolve(ctx: click.Context, cfg: dict, **defaults):
    """Flag > config file > default, per option name."""
    out = {}
    for name, default in defaults.items():
        value = ctx.params.get(name)
        source = ctx.get_parameter_source(name)
        if value is not None and source == click.core.ParameterSource.COMMANDLINE:
            out[name] = value
        elif name in cfg:
            out[name] = cfg[name]
        elif value is not None:
            out[name] = value
        else:
            out[name] = default
    return out


def _parse_dims(text: str | None) -> tuple[int, ...] | None:
    if text is None:
        return None
    try:
        dims = tuple(int(v) for v in str(text).replace("x", ",").split(",") if v != "")
    except ValueError as exc:
        raise ValidationError(f"cannot parse dims {text!r}: {exc}") from exc
    if not dims or any(d < 1 for d in dims):
        raise ValidationError(f"dims must be positive integers, got {text!r}")
    return dims


def _parse_spacing(text: str | None) -> tuple[float, ...] | None:
    if text is None:
        return None
    try:
        return tuple(float(v) for v in str(text).split(",") if v != "")
    except ValueError as exc:
        raise ValidationError(f"cannot parse spacing {text!r}: {exc}") from exc


def _provider_from_spec(spec: str):
    if spec == "baseline":
        return make_baseline_provider()
    if spec.startswith("file:"):
        return make_file_provider(spec[len("file:"):])
    raise ValidationError(f"unknown provider {spec!r} (use 'baseline' or 'file:PATH')")


def _pipeline_config(opts: dict) -> PipelineConfig:
    connectivity = Connectivity(opts.get("connectivity", "orthogonal"))
    return PipelineConfig(
        working_dims=_parse_dims(opts.get("working_dims")),
        margin=MarginPointConfig(rng_seed=int(opts.get("seed", 0))),
        crf=CrfParams(
            lam=float(opts.get("lam", 5.0)),
            sigma=float(opts.get("sigma", 0.1)),
            connectivity=connectivity,
        ),
        fusion=not bool(opts.get("no_fusion", False)),
        connectivity=connectivity,
    )


def _load_mask(path) -> BinaryMask:
    grid = read_sgrid(path)
    return BinaryMask(grid.data > 0.5)


@click.group()
@click.option("--config", "config_path", type=str, default=None, help="JSON file of option defaults.")
@click.pass_context
def main(ctx, config_path):
    """Interactive grid segmentation: geodesic click encoding, probability
    fusion, and exact graph-cut refinement."""
    ctx.ensure_object(dict)
    ctx.obj["config"] = _load_config(config_path)


@main.command()
@click.option("--image", required=True, help="Input image (SGRID/PNG/PGM).")
@click.option("--seeds", required=True, help="Margin points JSON.")
@click.option("--out", required=True, help="Output mask path (SGRID).")
@click.option("--gt", default=None, help="Ground-truth mask SGRID (enables metrics/refinement).")
@click.option("--rounds", type=int, default=0, help="Robot refinement rounds (needs --gt).")
@click.option("--clicks-per-round", type=int, default=3)
@click.option("--prob", default="baseline", help="Provider: 'baseline' or 'file:PATH'.")
@click.option("--report", default=None, help="Write the run report JSON here.")
@click.option("--working-dims", default=None, help="Override working size, e.g. 64,64.")
@click.option("--connectivity", type=click.Choice(["orthogonal", "full"]), default="orthogonal")
@click.option("--lam", type=float, default=5.0, help="CRF pairwise weight.")
@click.option("--sigma", type=float, default=0.1, help="CRF intensity sensitivity.")
@click.option("--no-fusion", is_flag=True, default=False, help="Ablation: skip click fusion.")
@click.pass_context
@_exit_codes
def pipeline(ctx, **_kw):
    """Two-stage segmentation: margin points -> initial mask -> refinement."""
    opts = _resolve(
        ctx, ctx.obj["config"],
        image=None, seeds=None, out=None, gt=None, rounds=0, clicks_per_round=3,
        prob="baseline", report=None, working_dims=None, connectivity="orthogonal",
        lam=5.0, sigma=0.1, no_fusion=False,
    )
    image = load_image(opts["image"])
    fg, bg = load_seeds(opts["seeds"])
    if not bg.is_empty():
        raise ValidationError("margin points must all be labeled fg")
    gt = _load_mask(opts["gt"]) if opts["gt"] else None
    mask, report = run_pipeline(
        image, fg, _provider_from_spec(opts["prob"]), _pipeline_config(opts),
        gt=gt, refine_rounds=int(opts["rounds"]), clicks_per_round=int(opts["clicks_per_round"]),
    )
    write_sgrid(opts["out"], mask)
    if opts["report"]:
        Path(opts["report"]).write_text(json.dumps(report, indent=2))
    if gt is not None:
        click.echo(json.dumps({"dice": report["dice"], "assd": report.get("assd")}))


@main.command()
@click.option("--image", required=True)
@click.option("--seeds", required=True, help="Seeds JSON (fg entries used).")
@click.option("--out", required=True, help="Output cue map (float SGRID).")
@click.option("--method", type=click.Choice(["egd", "geodesic", "euclidean", "gaussian"]), default="egd")
@click.option("--threshold", type=float, default=None, help="Truncation threshold for distance methods.")
@click.option("--sigma", type=float, default=DEFAULT_GAUSSIAN_SIGMA, help="Gaussian heatmap sigma.")
@click.option("--connectivity", type=click.Choice(["orthogonal", "full"]), default="orthogonal")
@click.pass_context
@_exit_codes
def encode(ctx, **_kw):
    """Encode seed clicks as a cue or distance map."""
    opts = _resolve(
        ctx, ctx.obj["config"],
        image=None, seeds=None, out=None, method="egd", threshold=None,
        sigma=DEFAULT_GAUSSIAN_SIGMA, connectivity="orthogonal",
    )
    image = load_image(opts["image"])
    fg, bg = load_seeds(opts["seeds"])
    seeds = fg if not fg.is_empty() else bg
    connectivity = Connectivity(opts["connectivity"])
    method = opts["method"]
    if method == "egd":
        out_grid = egd(image, seeds, connectivity).grid
    elif method == "gaussian":
        out_grid = gaussian_heatmap(image.dims, seeds, float(opts["sigma"])).grid
    else:
        dmap = (
            geodesic_distance(image, seeds, connectivity)
            if method == "geodesic"
            else euclidean_distance(image.dims, image.spacing, seeds)
        )
        if opts["threshold"] is not None:
            out_grid = truncate_rescale(dmap, float(opts["threshold"])).grid
        else:
            out_grid = dmap.grid
    write_sgrid(opts["out"], out_grid)


@main.command()
@click.option("--image", required=True)
@click.option("--prob", default="baseline", help="Provider: 'baseline' or 'file:PATH'.")
@click.option("--seeds", required=True, help="Margin points JSON (fg).")
@click.option("--clicks", required=True, help="Refinement clicks JSON (fg/bg).")
@click.option("--lam", "--lambda", type=float, default=5.0)
@click.option("--sigma", type=float, default=0.1)
@click.option("--out", required=True, help="Output mask path (SGRID).")
@click.option("--working-dims", default=None)
@click.option("--connectivity", type=click.Choice(["orthogonal", "full"]), default="orthogonal")
@click.option("--no-fusion", is_flag=True, default=False)
@click.pass_context
@_exit_codes
def refine(ctx, **_kw):
    """One refinement round: stage-1 from margin points, then click-constrained
    graph-cut refinement."""
    opts = _resolve(
        ctx, ctx.obj["config"],
        image=None, prob="baseline", seeds=None, clicks=None, lam=5.0, sigma=0.1,
        out=None, working_dims=None, connectivity="orthogonal", no_fusion=False,
    )
    image = load_image(opts["image"])
    margin_fg, margin_bg = load_seeds(opts["seeds"])
    if not margin_bg.is_empty():
        raise ValidationError("margin points must all be labeled fg")
    fg_clicks, bg_clicks = load_seeds(opts["clicks"])
    if fg_clicks.is_empty() and bg_clicks.is_empty():
        raise ValidationError("refinement requires at least one click")
    config = _pipeline_config(opts)
    ctx1, _, _ = stage1(image, margin_fg, _provider_from_spec(opts["prob"]), config)
    _, mask, _ = refine_step(ctx1, fg_clicks.points, bg_clicks.points)
    write_sgrid(opts["out"], mask)


@main.command("simulate-clicks")
@click.option("--gt", required=True, help="Ground-truth mask SGRID.")
@click.option("--out", default=None, help="Output seeds JSON (stdout if omitted).")
@click.option("--seed", type=int, default=0)
@click.option("--inward-offset", type=int, default=None)
@click.option("--bbox-margin", type=int, default=None)
@click.option("--near-extreme-count", type=int, default=None)
@click.option("--extra-count-max", type=int, default=5)
@click.pass_context
@_exit_codes
def simulate_clicks(ctx, **_kw):
    """Simulate interior margin points from a ground-truth mask."""
    opts = _resolve(
        ctx, ctx.obj["config"],
        gt=None, out=None, seed=0, inward_offset=None, bbox_margin=None,
        near_extreme_count=None, extra_count_max=5,
    )
    gt = _load_mask(opts["gt"])
    cfg = MarginPointConfig(
        near_extreme_count=opts["near_extreme_count"],
        extra_count_max=int(opts["extra_count_max"]),
        inward_offset=opts["inward_offset"],
        bbox_margin=opts["bbox_margin"],
        rng_seed=int(opts["seed"]),
    )
    text = seeds_to_json(simulate_margin_points(gt, cfg))
    if opts["out"]:
        Path(opts["out"]).write_text(text)
    else:
        click.echo(text)


@main.command()
@click.option("--pred", required=True, help="Predicted mask SGRID.")
@click.option("--gt", required=True, help="Ground-truth mask SGRID.")
@click.option("--spacing", default=None, help="Override spacing, e.g. 1.0,0.5,0.5.")
@click.pass_context
@_exit_codes
def metrics(ctx, **_kw):
    """Print {dice, assd} for a prediction against ground truth."""
    opts = _resolve(ctx, ctx.obj["config"], pred=None, gt=None, spacing=None)
    pred = _load_mask(opts["pred"])
    gt_grid = read_sgrid(opts["gt"])
    gt = BinaryMask(gt_grid.data > 0.5)
    spacing = _parse_spacing(opts["spacing"]) or gt_grid.spacing
    result = {"dice": dice(pred, gt)}
    result["assd"] = (
        assd(pred, gt, spacing) if pred.data.any() and gt.data.any() else None
    )
    click.echo(json.dumps(result))


@main.command()
@click.option("--kind", type=click.Choice(["encodings", "kernels"]), default="encodings")
@click.option("--out", default=None, help="Output CSV path (stdout if omitted).")
@click.option("--corpus-size", type=int, default=20)
@click.option("--shape", default="64,64", help="Corpus image shape, e.g. 64,64 or 24,48,48.")
@click.option("--seed", type=int, default=0)
@click.pass_context
@_exit_codes
def bench(ctx, **_kw):
    """Benchmarks: the encoding-method sweep, or compiled-vs-pure kernels."""
    opts = _resolve(
        ctx, ctx.obj["config"],
        kind="encodings", out=None, corpus_size=20, shape="64,64", seed=0,
    )
    if opts["kind"] == "kernels":
        from .benchmark_kernels import kernel_benchmark_csv

        text = kernel_benchmark_csv()
    else:
        corpus = make_corpus(int(opts["corpus_size"]), _parse_dims(opts["shape"]), int(opts["seed"]))
        text = benchmark_rows_to_csv(benchmark_encodings(corpus))
    if opts["out"]:
        Path(opts["out"]).write_text(text)
    else:
        click.echo(text, nl=False)


@main.command("robot-eval")
@click.option("--out", default=None, help="Output summary JSON (stdout if omitted).")
@click.option("--corpus-size", type=int, default=30)
@click.option("--shape", default="64,64")
@click.option("--seed", type=int, default=0)
@click.option("--rounds", type=int, default=5)
@click.option("--clicks-per-round", type=int, default=3)
@click.pass_context
@_exit_codes
def robot_eval_cmd(ctx, **_kw):
    """Robot-user evaluation over a seeded synthetic corpus."""
    opts = _resolve(
        ctx, ctx.obj["config"],
        out=None, corpus_size=30, shape="64,64", seed=0, rounds=5, clicks_per_round=3,
    )
    corpus = make_corpus(int(opts["corpus_size"]), _parse_dims(opts["shape"]), int(opts["seed"]))
    summary = robot_eval(
        corpus, rounds=int(opts["rounds"]), k_clicks=int(opts["clicks_per_round"])
    )
    text = json.dumps(summary, indent=2)
    if opts["out"]:
        Path(opts["out"]).write_text(text)
    else:
        click.echo(text)


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=None, help="Default: $INTERSEG_PORT or 8008.")
@click.option("--session-dir", default=None, help="Write-through persistence directory.")
@click.option("--ttl-secs", type=float, default=None)
@click.pass_context
@_exit_codes
def serve(ctx, **_kw):
    """Run the HTTP session service."""
    opts = _resolve(
        ctx, ctx.obj["config"], host="127.0.0.1", port=None, session_dir=None, ttl_secs=None
    )
    from .service import run_server

    run_server(
        host=opts["host"],
        port=opts["port"],
        session_dir=opts["session_dir"],
        ttl_secs=opts["ttl_secs"],
    )


if __name__ == "__main__":
    main()
