"""Pure-Python fallback kernels, semantically identical to the compiled core.

Selected at import when the Cython extension is unavailable, or forced via
INTERSEG_PURE_PYTHON=1. Correct but slow; the compiled core is required to
meet the interactive timing targets.
"""

from __future__ import annotations

import heapq
import itertools

import numpy as np


def _neighbor_deltas(rank: int, full_connectivity: bool) -> list[tuple[int, ...]]:
    if not full_connectivity:
        deltas = []
        for axis in range(rank):
            for step in (-1, 1):
                d = [0] * rank
                d[axis] = step
                deltas.append(tuple(d))
        return deltas
    return [d for d in itertools.product((-1, 0, 1), repeat=rank) if any(d)]


def geodesic_distance(image: np.ndarray, seeds: np.ndarray, full_connectivity: bool = False) -> np.ndarray:
    """Multi-source Dijkstra with edge cost |I_u - I_v| between grid neighbors."""
    img = np.asarray(image, dtype=np.float64)
    shape = img.shape
    flat = img.ravel()
    strides = [1] * img.ndim
    for k in range(img.ndim - 2, -1, -1):
        strides[k] = strides[k + 1] * shape[k + 1]
    deltas = _neighbor_deltas(img.ndim, full_connectivity)
    flat_deltas = [sum(d[k] * strides[k] for k in range(img.ndim)) for d in deltas]

    dist = np.full(flat.shape[0], np.inf)
    heap: list[tuple[float, int]] = []
    for u in np.asarray(seeds, dtype=np.int64):
        u = int(u)
        if dist[u] > 0.0:
            dist[u] = 0.0
            heapq.heappush(heap, (0.0, u))
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        coords = np.unravel_index(u, shape)
        for delta, fd in zip(deltas, flat_deltas):
            if any(not (0 <= coords[k] + delta[k] < shape[k]) for k in range(img.ndim)):
                continue
            v = u + fd
            nd = d + abs(flat[u] - flat[v])
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist.reshape(shape)


def grid_maxflow(
    src_cap: np.ndarray,
    snk_cap: np.ndarray,
    edge_u: np.ndarray,
    edge_v: np.ndarray,
    edge_cap: np.ndarray,
) -> np.ndarray:
    """Exact integer s/t min-cut (Dinic) over symmetric inter-node edges.

    Returns uint8 labels: 1 = source side. Same tie-break as the compiled
    core: nodes unreachable in the final residual graph go to the sink side.
    """
    src_cap = np.asarray(src_cap, dtype=np.int64)
    snk_cap = np.asarray(snk_cap, dtype=np.int64)
    n = src_cap.shape[0]
    s, t = n, n + 1
    n_nodes = n + 2

    arc_to: list[int] = []
    arc_cap: list[int] = []
    adj: list[list[int]] = [[] for _ in range(n_nodes)]

    def add_arc_pair(u: int, v: int, cap_uv: int, cap_vu: int) -> None:
        adj[u].append(len(arc_to))
        arc_to.append(v)
        arc_cap.append(int(cap_uv))
        adj[v].append(len(arc_to))
        arc_to.append(u)
        arc_cap.append(int(cap_vu))

    for u, v, c in zip(edge_u, edge_v, edge_cap):
        add_arc_pair(int(u), int(v), int(c), int(c))
    for i in range(n):
        add_arc_pair(s, i, int(src_cap[i]), 0)
        add_arc_pair(i, t, int(snk_cap[i]), 0)

    level = [0] * n_nodes
    it = [0] * n_nodes

    def bfs() -> bool:
        for i in range(n_nodes):
            level[i] = -1
        level[s] = 0
        queue = [s]
        for u in queue:
            for arc in adj[u]:
                v = arc_to[arc]
                if arc_cap[arc] > 0 and level[v] < 0:
                    level[v] = level[u] + 1
                    queue.append(v)
        return level[t] >= 0

    def dfs(u: int, pushed: int) -> int:
        if u == t:
            return pushed
        while it[u] < len(adj[u]):
            arc = adj[u][it[u]]
            v = arc_to[arc]
            if arc_cap[arc] > 0 and level[v] == level[u] + 1:
                got = dfs(v, min(pushed, arc_cap[arc]))
                if got > 0:
                    arc_cap[arc] -= got
                    arc_cap[arc ^ 1] += got
                    return got
            it[u] += 1
        level[u] = -1
        return 0

    import sys

    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, n_nodes + 100))
    try:
        while bfs():
            it = [0] * n_nodes
            while dfs(s, 1 << 62):
                pass
    finally:
        sys.setrecursionlimit(old_limit)

    label = np.zeros(n, dtype=np.uint8)
    seen = [False] * n_nodes
    seen[s] = True
    queue = [s]
    for u in queue:
        for arc in adj[u]:
            v = arc_to[arc]
            if arc_cap[arc] > 0 and not seen[v]:
                seen[v] = True
                queue.append(v)
    for i in range(n):
        label[i] = 1 if seen[i] else 0
    return label
