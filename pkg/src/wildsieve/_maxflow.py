"""Exact s-t max-flow / min-cut on float-capacity graphs.

Dinic's algorithm over a CSR adjacency, JIT-compiled with numba so GrabCut
can solve pixel-grid graphs (hundreds of thousands of edges) in well under a
second.  Single-threaded and fully deterministic.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .errors import InvalidArgumentError


@njit(cache=True, nogil=True)
def _dinic(indptr, dst, cap, rev, source, sink):  # pragma: no cover - jitted
    n = indptr.shape[0] - 1
    level = np.empty(n, dtype=np.int32)
    iters = np.empty(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    path = np.empty(n + 1, dtype=np.int64)
    total = 0.0
    while True:
        # BFS: build the level graph over positive-residual edges.
        level[:] = -1
        level[source] = 0
        queue[0] = source
        qhead, qtail = 0, 1
        while qhead < qtail:
            u = queue[qhead]
            qhead += 1
            for e in range(indptr[u], indptr[u + 1]):
                v = dst[e]
                if cap[e] > 0.0 and level[v] < 0:
                    level[v] = level[u] + 1
                    queue[qtail] = v
                    qtail += 1
        if level[sink] < 0:
            return total
        for u in range(n):
            iters[u] = indptr[u]
        # DFS with current-arc: repeatedly extend a path, augment at the sink.
        depth = 0
        u = source
        while True:
            if u == sink:
                bottleneck = np.inf
                for i in range(depth):
                    e = path[i]
                    if cap[e] < bottleneck:
                        bottleneck = cap[e]
                for i in range(depth):
                    e = path[i]
                    cap[e] -= bottleneck
                    cap[rev[e]] += bottleneck
                total += bottleneck
                new_depth = depth
                for i in range(depth):
                    if cap[path[i]] <= 0.0:
                        new_depth = i
                        break
                depth = new_depth
                u = source if depth == 0 else dst[path[depth - 1]]
                continue
            advanced = False
            e = iters[u]
            while e < indptr[u + 1]:
                v = dst[e]
                if cap[e] > 0.0 and level[v] == level[u] + 1:
                    iters[u] = e
                    path[depth] = e
                    depth += 1
                    u = v
                    advanced = True
                    break
                e += 1
                iters[u] = e
            if advanced:
                continue
            # Dead end: prune the node and retreat.
            level[u] = -1
            if u == source:
                break
            depth -= 1
            parent = source if depth == 0 else dst[path[depth - 1]]
            iters[parent] = path[depth] + 1
            u = parent


@njit(cache=True, nogil=True)
def _reachable_from(indptr, dst, cap, source):  # pragma: no cover - jitted
    n = indptr.shape[0] - 1
    seen = np.zeros(n, dtype=np.uint8)
    queue = np.empty(n, dtype=np.int64)
    seen[source] = 1
    queue[0] = source
    qhead, qtail = 0, 1
    while qhead < qtail:
        u = queue[qhead]
        qhead += 1
        for e in range(indptr[u], indptr[u + 1]):
            v = dst[e]
            if cap[e] > 0.0 and seen[v] == 0:
                seen[v] = 1
                queue[qtail] = v
                qtail += 1
    return seen


def min_cut(node_count: int, terminal_caps, edges) -> tuple[np.ndarray, float]:
    """Exact s-t min cut of a graph with per-node terminal capacities.

    ``terminal_caps`` is (n, 2): per node the (source, sink) link capacity.
    ``edges`` is an (m, 3) array of undirected edges (u, v, cap) carrying
    capacity ``cap`` in both directions.  Returns a boolean array (True =
    source side) and the cut value, which equals the max flow.
    """
    if node_count < 1:
        raise InvalidArgumentError("min_cut needs at least one node")
    term = np.asarray(terminal_caps, dtype=np.float64).reshape(node_count, 2)
    edges = np.asarray(edges, dtype=np.float64).reshape(-1, 3)
    if term.min() < 0 or (edges.size and edges[:, 2].min() < 0):
        raise InvalidArgumentError("capacities must be non-negative")
    if not (np.all(np.isfinite(term)) and np.all(np.isfinite(edges))):
        raise InvalidArgumentError("capacities must be finite")
    m = edges.shape[0]
    if m:
        eu = edges[:, 0].astype(np.int64)
        ev = edges[:, 1].astype(np.int64)
        if eu.min() < 0 or ev.min() < 0 or eu.max() >= node_count or ev.max() >= node_count:
            raise InvalidArgumentError("edge endpoint out of range")
    else:
        eu = ev = np.empty(0, dtype=np.int64)

    source = node_count
    sink = node_count + 1
    total_nodes = node_count + 2
    nodes = np.arange(node_count, dtype=np.int64)

    # Paired terminal links saturate against each other: remove the common
    # part up front and add it back to the cut value.  Labels are unchanged.
    common = np.minimum(term[:, 0], term[:, 1])
    term = term - common[:, None]
    base_value = float(common.sum())

    # Directed edge list; consecutive pairs (2i, 2i+1) are mutual reverses.
    src = np.concatenate(
        [
            np.stack([eu, ev], axis=1).ravel(),
            np.stack([np.full(node_count, source, dtype=np.int64), nodes], axis=1).ravel(),
            np.stack([nodes, np.full(node_count, sink, dtype=np.int64)], axis=1).ravel(),
        ]
    )
    dst = np.concatenate(
        [
            np.stack([ev, eu], axis=1).ravel(),
            np.stack([nodes, np.full(node_count, source, dtype=np.int64)], axis=1).ravel(),
            np.stack([np.full(node_count, sink, dtype=np.int64), nodes], axis=1).ravel(),
        ]
    )
    cap = np.concatenate(
        [
            np.repeat(edges[:, 2], 2),
            np.stack([term[:, 0], np.zeros(node_count)], axis=1).ravel(),
            np.stack([term[:, 1], np.zeros(node_count)], axis=1).ravel(),
        ]
    )

    n_edges = src.shape[0]
    perm = np.argsort(src, kind="stable")
    pos = np.empty(n_edges, dtype=np.int64)
    pos[perm] = np.arange(n_edges)
    dst_s = dst[perm]
    cap_s = cap[perm].copy()
    rev_s = pos[perm ^ 1]
    indptr = np.zeros(total_nodes + 1, dtype=np.int64)
    np.cumsum(np.bincount(src[perm], minlength=total_nodes), out=indptr[1:])

    flow = _dinic(indptr, dst_s, cap_s, rev_s, source, sink)
    seen = _reachable_from(indptr, dst_s, cap_s, source)
    return seen[:node_count].astype(bool), base_value + float(flow)
