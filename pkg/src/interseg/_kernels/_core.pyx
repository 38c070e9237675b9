# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: multi-source grid Dijkstra and integer max-flow.

Semantics must stay identical to interseg._kernels.pure, which is the
import-time fallback when this extension is unavailable.
"""

import numpy as np

cimport numpy as cnp
from libc.stdlib cimport free, malloc

cnp.import_array()

DEF INF_DIST = 1e300


cdef struct Heap:
    double *key
    long *node
    long size
    long capacity


cdef inline void heap_push(Heap *h, double key, long node) noexcept nogil:
    cdef long i, parent
    if h.size == h.capacity:
        h.capacity *= 2
        h.key = <double *> realloc_d(h.key, h.capacity)
        h.node = <long *> realloc_l(h.node, h.capacity)
    i = h.size
    h.size += 1
    while i > 0:
        parent = (i - 1) >> 1
        if h.key[parent] <= key:
            break
        h.key[i] = h.key[parent]
        h.node[i] = h.node[parent]
        i = parent
    h.key[i] = key
    h.node[i] = node


cdef inline void heap_pop(Heap *h, double *key, long *node) noexcept nogil:
    cdef long i = 0, child
    cdef double last_key
    cdef long last_node
    key[0] = h.key[0]
    node[0] = h.node[0]
    h.size -= 1
    last_key = h.key[h.size]
    last_node = h.node[h.size]
    while True:
        child = 2 * i + 1
        if child >= h.size:
            break
        if child + 1 < h.size and h.key[child + 1] < h.key[child]:
            child += 1
        if h.key[child] >= last_key:
            break
        h.key[i] = h.key[child]
        h.node[i] = h.node[child]
        i = child
    h.key[i] = last_key
    h.node[i] = last_node


cdef void *realloc_d(double *p, long n) noexcept nogil:
    cdef double *q = <double *> malloc(n * sizeof(double))
    # caller guarantees old size == n / 2
    cdef long i
    for i in range(n // 2):
        q[i] = p[i]
    free(p)
    return q


cdef void *realloc_l(long *p, long n) noexcept nogil:
    cdef long *q = <long *> malloc(n * sizeof(long))
    cdef long i
    for i in range(n // 2):
        q[i] = p[i]
    free(p)
    return q


def geodesic_distance(object image, seeds, bint full_connectivity=False):
    """Exact multi-source shortest-path distance with edge cost |I_u - I_v|.

    image: float64 array of rank 2 or 3; seeds: flat indices (int64).
    Orthogonal connectivity (4/6) by default; full adds diagonals (8/26).
    """
    arr = np.ascontiguousarray(image, dtype=np.float64)
    cdef tuple shape = arr.shape
    cdef long rank = arr.ndim

    # pad a one-cell sentinel border: neighbors of interior cells are always
    # in-bounds and border cells carry dist = -1 so they are never relaxed
    padded = np.pad(arr, 1, mode="edge")
    cdef cnp.ndarray[cnp.float64_t, ndim=1] img = padded.ravel()
    cdef cnp.ndarray[cnp.int64_t, ndim=1] seed_idx = np.ascontiguousarray(seeds, dtype=np.int64)

    cdef long[3] dims
    cdef long[3] pstrides
    cdef long k
    for k in range(rank):
        dims[k] = shape[k]
    pstrides[rank - 1] = 1
    for k in range(rank - 2, -1, -1):
        pstrides[k] = pstrides[k + 1] * (dims[k + 1] + 2)

    # neighbor coordinate deltas
    cdef long[78] deltas  # up to 26 neighbors * 3 axes
    cdef long n_nb = 0
    cdef long a, dz, dy, dx
    if not full_connectivity:
        for a in range(rank):
            for dx in (-1, 1):
                for k in range(rank):
                    deltas[n_nb * rank + k] = dx if k == a else 0
                n_nb += 1
    else:
        if rank == 2:
            for dy in (-1, 0, 1):
                for dx in (-1, 0, 1):
                    if dy == 0 and dx == 0:
                        continue
                    deltas[n_nb * 2] = dy
                    deltas[n_nb * 2 + 1] = dx
                    n_nb += 1
        else:
            for dz in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    for dx in (-1, 0, 1):
                        if dz == 0 and dy == 0 and dx == 0:
                            continue
                        deltas[n_nb * 3] = dz
                        deltas[n_nb * 3 + 1] = dy
                        deltas[n_nb * 3 + 2] = dx
                        n_nb += 1

    # flat neighbor offsets in the padded layout
    cdef long[26] flat_off
    cdef long nb
    for nb in range(n_nb):
        flat_off[nb] = 0
        for k in range(rank):
            flat_off[nb] += deltas[nb * rank + k] * pstrides[k]

    cdef long n_pad = img.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dist = np.empty(n_pad, dtype=np.float64)
    # -1 sentinel everywhere, INF on the interior
    dist_nd = dist.reshape(padded.shape)
    dist_nd.fill(-1.0)
    dist_nd[(slice(1, -1),) * rank] = INF_DIST
    cdef double[::1] dist_v = dist
    cdef double[::1] img_v = img

    cdef Heap h
    h.capacity = max(4 * n_pad, 64)
    h.size = 0
    h.key = <double *> malloc(h.capacity * sizeof(double))
    h.node = <long *> malloc(h.capacity * sizeof(long))

    cdef long i, u, v
    cdef long[3] coords
    cdef double d, nd, iu

    for i in range(seed_idx.shape[0]):
        # map interior flat index to padded flat index
        u = seed_idx[i]
        v = 0
        for k in range(rank - 1, -1, -1):
            v += (u % dims[k] + 1) * pstrides[k]
            u //= dims[k]
        if dist_v[v] > 0.0:
            dist_v[v] = 0.0
            heap_push(&h, 0.0, v)

    with nogil:
        while h.size > 0:
            heap_pop(&h, &d, &u)
            if d > dist_v[u]:
                continue
            iu = img_v[u]
            for nb in range(n_nb):
                v = u + flat_off[nb]
                nd = d + (iu - img_v[v] if iu >= img_v[v] else img_v[v] - iu)
                if nd < dist_v[v]:
                    dist_v[v] = nd
                    heap_push(&h, nd, v)

    free(h.key)
    free(h.node)
    out = dist_nd[(slice(1, -1),) * rank]
    return np.ascontiguousarray(out)


def grid_maxflow(cnp.ndarray src_cap, cnp.ndarray snk_cap,
                 cnp.ndarray edge_u, cnp.ndarray edge_v, cnp.ndarray edge_cap):
    """Exact s/t min-cut on a node set with symmetric inter-node edges.

    src_cap[i] / snk_cap[i]: terminal capacities (int64, >= 0).
    edge_u/edge_v/edge_cap: undirected edges with capacity charged when cut.
    Returns uint8 labels: 1 = source side (reachable in final residual).
    Deterministic Dinic; ties resolve to the sink side.
    """
    cdef cnp.ndarray[cnp.int64_t, ndim=1] sc = np.ascontiguousarray(src_cap, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] tc = np.ascontiguousarray(snk_cap, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] eu = np.ascontiguousarray(edge_u, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ev = np.ascontiguousarray(edge_v, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ec = np.ascontiguousarray(edge_cap, dtype=np.int64)

    cdef long n = sc.shape[0]
    cdef long m_edges = eu.shape[0]
    cdef long n_nodes = n + 2
    cdef long s = n, t = n + 1
    cdef long m_arcs = 2 * m_edges + 4 * n

    cdef cnp.ndarray[cnp.int64_t, ndim=1] arc_to = np.empty(m_arcs, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] arc_cap = np.empty(m_arcs, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] deg = np.zeros(n_nodes + 1, dtype=np.int64)
    cdef long[::1] arc_to_v = arc_to
    cdef long[::1] arc_cap_v = arc_cap

    # arc i and i^1 are mutual reverses (built in adjacent pairs)
    cdef long i, a
    cdef cnp.ndarray[cnp.int64_t, ndim=1] arc_from = np.empty(m_arcs, dtype=np.int64)
    a = 0
    for i in range(m_edges):
        arc_from[a] = eu[i]; arc_to_v[a] = ev[i]; arc_cap_v[a] = ec[i]; a += 1
        arc_from[a] = ev[i]; arc_to_v[a] = eu[i]; arc_cap_v[a] = ec[i]; a += 1
    for i in range(n):
        arc_from[a] = s; arc_to_v[a] = i; arc_cap_v[a] = sc[i]; a += 1
        arc_from[a] = i; arc_to_v[a] = s; arc_cap_v[a] = 0; a += 1
        arc_from[a] = i; arc_to_v[a] = t; arc_cap_v[a] = tc[i]; a += 1
        arc_from[a] = t; arc_to_v[a] = i; arc_cap_v[a] = 0; a += 1

    # CSR adjacency over arc ids
    for i in range(m_arcs):
        deg[arc_from[i] + 1] += 1
    for i in range(n_nodes):
        deg[i + 1] += deg[i]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] adj = np.empty(m_arcs, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] fill = deg[:n_nodes].copy()
    cdef long[::1] adj_v = adj
    cdef long[::1] deg_v = deg
    cdef long[::1] fill_v = fill
    for i in range(m_arcs):
        adj_v[fill_v[arc_from[i]]] = i
        fill_v[arc_from[i]] += 1

    cdef cnp.ndarray[cnp.int64_t, ndim=1] level = np.empty(n_nodes, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] it = np.empty(n_nodes, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] queue = np.empty(n_nodes, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] path = np.empty(n_nodes + 1, dtype=np.int64)
    cdef long[::1] level_v = level
    cdef long[::1] it_v = it
    cdef long[::1] queue_v = queue
    cdef long[::1] path_v = path

    cdef long qh, qt, u, v, arc, path_len, j
    cdef long bottleneck
    cdef bint found

    with nogil:
        while True:
            # BFS levels on residual graph
            for i in range(n_nodes):
                level_v[i] = -1
            level_v[s] = 0
            queue_v[0] = s
            qh = 0; qt = 1
            while qh < qt:
                u = queue_v[qh]; qh += 1
                for j in range(deg_v[u], deg_v[u + 1]):
                    arc = adj_v[j]
                    v = arc_to_v[arc]
                    if arc_cap_v[arc] > 0 and level_v[v] < 0:
                        level_v[v] = level_v[u] + 1
                        queue_v[qt] = v; qt += 1
            if level_v[t] < 0:
                break
            for i in range(n_nodes):
                it_v[i] = deg_v[i]
            # blocking flow via iterative DFS
            u = s
            path_len = 0
            while True:
                if u == t:
                    bottleneck = arc_cap_v[path_v[0]]
                    for j in range(1, path_len):
                        if arc_cap_v[path_v[j]] < bottleneck:
                            bottleneck = arc_cap_v[path_v[j]]
                    for j in range(path_len):
                        arc = path_v[j]
                        arc_cap_v[arc] -= bottleneck
                        arc_cap_v[arc ^ 1] += bottleneck
                    # retreat to tail of first saturated arc
                    u = s
                    for j in range(path_len):
                        if arc_cap_v[path_v[j]] == 0:
                            path_len = j
                            break
                        u = arc_to_v[path_v[j]]
                    continue
                found = False
                while it_v[u] < deg_v[u + 1]:
                    arc = adj_v[it_v[u]]
                    v = arc_to_v[arc]
                    if arc_cap_v[arc] > 0 and level_v[v] == level_v[u] + 1:
                        path_v[path_len] = arc
                        path_len += 1
                        u = v
                        found = True
                        break
                    it_v[u] += 1
                if found:
                    continue
                level_v[u] = -1  # dead end
                if u == s:
                    break
                path_len -= 1
                u = s if path_len == 0 else arc_to_v[path_v[path_len - 1]]
                it_v[u] += 1

    # source side = residual-reachable from s
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] label = np.zeros(n, dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] seen = np.zeros(n_nodes, dtype=np.uint8)
    cdef unsigned char[::1] label_v = label
    cdef unsigned char[::1] seen_v = seen
    seen_v[s] = 1
    queue_v[0] = s
    qh = 0; qt = 1
    with nogil:
        while qh < qt:
            u = queue_v[qh]; qh += 1
            for j in range(deg_v[u], deg_v[u + 1]):
                arc = adj_v[j]
                v = arc_to_v[arc]
                if arc_cap_v[arc] > 0 and not seen_v[v]:
                    seen_v[v] = 1
                    queue_v[qt] = v; qt += 1
    for i in range(n):
        label_v[i] = seen_v[i]
    return label
