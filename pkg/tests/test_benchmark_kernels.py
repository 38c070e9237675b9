"""Smoke test for the compiled-vs-pure kernel benchmark (tiny shapes)."""

from interseg import benchmark_kernels


def test_kernel_benchmark_rows(monkeypatch):
    monkeypatch.setattr(benchmark_kernels, "BENCH_CASES_2D", [(8, 8)])
    monkeypatch.setattr(benchmark_kernels, "BENCH_CASES_3D", [(4, 6, 6)])
    monkeypatch.setattr(benchmark_kernels, "REPEATS", 1)
    rows = benchmark_kernels.kernel_benchmark_rows()
    assert len(rows) == 4  # 2 shapes x 2 backends
    backends = {r["backend"] for r in rows}
    assert "pure" in backends
    for r in rows:
        assert r["geodesic_s"] >= 0.0 and r["maxflow_s"] >= 0.0

    csv_text = benchmark_kernels.kernel_benchmark_csv()
    assert csv_text.splitlines()[0] == "shape,backend,geodesic_s,maxflow_s"
