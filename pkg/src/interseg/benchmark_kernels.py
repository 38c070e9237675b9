"""Compiled-vs-pure kernel benchmark.

Times the geodesic-distance sweep and the grid max-flow on identical inputs
under both backends and verifies the outputs agree exactly.
"""

from __future__ import annotations

import csv
import importlib
import io
import os
import time

import numpy as np

BENCH_CASES_2D = [(64, 64), (128, 128), (256, 256)]
BENCH_CASES_3D = [(32, 48, 48), (64, 96, 96)]
REPEATS = 3


def _reload_kernels(pure: bool):
    os.environ["INTERSEG_PURE_PYTHON"] = "1" if pure else ""
    from interseg import _kernels

    return importlib.reload(_kernels)


def _geodesic_inputs(shape, seed=0):
    rng = np.random.default_rng(seed)
    image = rng.normal(size=shape)
    n_seeds = 4
    flat = rng.choice(int(np.prod(shape)), size=n_seeds, replace=False).astype(np.int64)
    return image, flat


def _maxflow_inputs(shape, seed=0):
    from interseg.grid import ScalarGrid
    from interseg.provider import pair_from_fg
    from interseg.refine import CalibratedPair, CrfParams, _pairwise_caps, _unary_caps

    rng = np.random.default_rng(seed)
    image = ScalarGrid(rng.normal(size=shape))
    fg = ScalarGrid(rng.uniform(0.05, 0.95, size=shape))
    pair = pair_from_fg(fg)
    calibrated = CalibratedPair(pair.fg, pair.bg, ScalarGrid(np.zeros(shape)))
    params = CrfParams()
    src, snk = _unary_caps(calibrated, params)
    edge_u, edge_v, edge_cap = _pairwise_caps(image, params)
    return src, snk, edge_u, edge_v, edge_cap


def _best_of(fn, repeats=REPEATS):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def kernel_benchmark_rows() -> list[dict]:
    rows = []
    for shape in BENCH_CASES_2D + BENCH_CASES_3D:
        image, flat = _geodesic_inputs(shape)
        mf_inputs = _maxflow_inputs(shape)
        results = {}
        for backend_pure in (False, True):
            kernels = _reload_kernels(backend_pure)
            name = kernels.backend_name()
            t_geo, d = _best_of(lambda: kernels.geodesic_distance(image, flat, False))
            t_flow, labels = _best_of(lambda: kernels.grid_maxflow(*mf_inputs))
            results[name] = (t_geo, t_flow, d, labels)
            rows.append(
                {
                    "shape": "x".join(str(s) for s in shape),
                    "backend": name,
                    "geodesic_s": round(t_geo, 6),
                    "maxflow_s": round(t_flow, 6),
                }
            )
        (_, _, d_a, l_a), (_, _, d_b, l_b) = results.values()
        if not (np.allclose(d_a, d_b, atol=1e-9) and np.array_equal(l_a, l_b)):
            raise AssertionError(f"backend outputs disagree at shape {shape}")
    _reload_kernels(False)  # restore the default backend
    return rows


def kernel_benchmark_csv() -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=["shape", "backend", "geodesic_s", "maxflow_s"])
    writer.writeheader()
    writer.writerows(kernel_benchmark_rows())
    return buf.getvalue()
