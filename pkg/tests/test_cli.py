"""CLI tests via CliRunner: subcommand behavior and exit codes."""

import json

import numpy as np
import pytest
from click.testing import CliRunner

from interseg.cli import main
from interseg.formats import read_sgrid, write_sgrid
from interseg.grid import ScalarGrid
from interseg.synthetic import make_corpus


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    item = make_corpus(1, (64, 64), seed=9)[0]
    write_sgrid(d / "img.sgrid", item.image)
    write_sgrid(d / "gt.sgrid", item.gt)
    return d


def _run(*args):
    return CliRunner().invoke(main, [str(a) for a in args])


def test_simulate_clicks_and_pipeline(workdir):
    r = _run("simulate-clicks", "--gt", workdir / "gt.sgrid", "--out", workdir / "seeds.json")
    assert r.exit_code == 0, r.output
    seeds = json.loads((workdir / "seeds.json").read_text())
    assert all(e["label"] == "fg" for e in seeds)

    r = _run(
        "pipeline", "--image", workdir / "img.sgrid", "--seeds", workdir / "seeds.json",
        "--out", workdir / "mask.sgrid", "--gt", workdir / "gt.sgrid",
        "--rounds", 3, "--report", workdir / "report.json",
    )
    assert r.exit_code == 0, r.output
    result = json.loads(r.output.strip().splitlines()[-1])
    assert result["dice"] > 0.9
    report = json.loads((workdir / "report.json").read_text())
    assert "timings" in report and "dice_trajectory" in report


def test_metrics_command(workdir):
    r = _run("metrics", "--pred", workdir / "mask.sgrid", "--gt", workdir / "gt.sgrid")
    assert r.exit_code == 0, r.output
    out = json.loads(r.output)
    assert 0.0 <= out["dice"] <= 1.0 and out["assd"] >= 0.0


def test_encode_methods(workdir):
    for method, extra in [
        ("egd", []),
        ("geodesic", ["--threshold", "0.6"]),
        ("euclidean", ["--threshold", "0.4"]),
        ("gaussian", ["--sigma", "6"]),
    ]:
        out = workdir / f"cue_{method}.sgrid"
        r = _run("encode", "--image", workdir / "img.sgrid", "--seeds", workdir / "seeds.json",
                 "--out", out, "--method", method, *extra)
        assert r.exit_code == 0, r.output
        cue = read_sgrid(out)
        assert cue.dims == (64, 64)
        assert cue.data.min() >= 0.0 and cue.data.max() <= 1.0


def test_refine_command(workdir):
    (workdir / "clicks.json").write_text(json.dumps([{"coords": [2, 2], "label": "bg"}]))
    r = _run("refine", "--image", workdir / "img.sgrid", "--seeds", workdir / "seeds.json",
             "--clicks", workdir / "clicks.json", "--out", workdir / "refined.sgrid")
    assert r.exit_code == 0, r.output
    mask = read_sgrid(workdir / "refined.sgrid")
    assert mask.data[2, 2] == 0.0


def test_bench_row_count():
    r = _run("bench", "--corpus-size", 2)
    assert r.exit_code == 0, r.output
    lines = [l for l in r.output.splitlines() if l]
    assert len(lines) == 1 + 2 * 13
    assert lines[0] == "image,method,parameter,dice,assd"
    egd_rows = [l for l in lines[1:] if ",egd," in l]
    assert all(l.split(",")[2] == "" for l in egd_rows)  # parameter-free


def test_robot_eval_command():
    r = _run("robot-eval", "--corpus-size", 2, "--rounds", 2)
    assert r.exit_code == 0, r.output
    summary = json.loads(r.output)
    assert "stage1_dice" in summary and len(summary["images"]) == 2


def test_exit_code_validation_error(workdir):
    # gaussian sigma must be positive -> validation -> exit 2
    r = _run("encode", "--image", workdir / "img.sgrid", "--seeds", workdir / "seeds.json",
             "--out", workdir / "x.sgrid", "--method", "gaussian", "--sigma", "-1")
    assert r.exit_code == 2


def test_exit_code_io_error(workdir):
    r = _run("metrics", "--pred", workdir / "nonexistent.sgrid", "--gt", workdir / "gt.sgrid")
    assert r.exit_code == 3


def test_config_file_defaults_and_flag_override(workdir, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"corpus_size": 1}))
    r = CliRunner().invoke(main, ["--config", str(cfg), "bench"])
    assert r.exit_code == 0, r.output
    assert len([l for l in r.output.splitlines() if l]) == 1 + 13
    # explicit flag wins over the file value
    r = CliRunner().invoke(main, ["--config", str(cfg), "bench", "--corpus-size", "2"])
    assert len([l for l in r.output.splitlines() if l]) == 1 + 2 * 13
