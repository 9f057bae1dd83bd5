"""Deterministic K-means with seeded k-means++ initialization.

Shared by batch patch clustering and GrabCut's color-model initialization.
Single-threaded on purpose: results must not depend on worker counts.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidArgumentError


def _sq_distances(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """(n, k) squared euclidean distances, clipped at zero."""
    d = (
        np.sum(points**2, axis=1)[:, None]
        - 2.0 * points @ centers.T
        + np.sum(centers**2, axis=1)[None, :]
    )
    return np.maximum(d, 0.0)


def kmeans_plusplus_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Seeded k-means++ center selection."""
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]), dtype=np.float64)
    centers[0] = points[rng.integers(n)]
    if k == 1:
        return centers
    best = _sq_distances(points, centers[:1])[:, 0]
    for i in range(1, k):
        total = best.sum()
        if total <= 0.0:
            # All remaining mass is on already-chosen points; duplicate one.
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=best / total))
        centers[i] = points[idx]
        best = np.minimum(best, _sq_distances(points, centers[i : i + 1])[:, 0])
    return centers


def kmeans(
    points,
    k: int,
    seed,
    max_iter: int = 100,
    tol: float = 1e-4,
) -> tuple[np.ndarray, np.ndarray, float, int]:
    """Lloyd's algorithm; returns (centroids, labels, inertia, iterations).

    ``seed`` may be an int or a ``numpy.random.SeedSequence``.  Iteration
    stops when the relative inertia improvement drops below ``tol`` or
    assignments stop changing.  Empty clusters are re-seeded on the point
    currently farthest from its centroid, keeping every cluster nonempty.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] == 0:
        raise InvalidArgumentError(f"expected (n, d) points, got shape {points.shape}")
    n = points.shape[0]
    if not 1 <= k <= n:
        raise InvalidArgumentError(f"k must be in [1, {n}], got {k}")
    rng = np.random.default_rng(seed)
    centers = kmeans_plusplus_init(points, k, rng)
    labels = np.full(n, -1, dtype=np.int64)
    inertia = np.inf
    iterations = 0
    for iterations in range(1, max_iter + 1):
        dists = _sq_distances(points, centers)
        new_labels = np.argmin(dists, axis=1)
        point_cost = dists[np.arange(n), new_labels]
        counts = np.bincount(new_labels, minlength=k)
        for j in range(k):  # re-seed empty clusters deterministically
            if counts[j] > 0:
                continue
            # Steal the farthest point whose cluster keeps another member
            # (duplicate-heavy inputs may leave nothing stealable).
            order = np.argsort(-point_cost, kind="stable")
            for far in order:
                if counts[new_labels[far]] > 1:
                    counts[new_labels[far]] -= 1
                    counts[j] += 1
                    centers[j] = points[far]
                    new_labels[far] = j
                    point_cost[far] = 0.0
                    break
        new_inertia = float(point_cost.sum())
        converged = np.array_equal(new_labels, labels) or (
            np.isfinite(inertia) and inertia - new_inertia <= tol * max(inertia, 1e-12)
        )
        labels = new_labels
        inertia = new_inertia
        for j in range(k):
            if counts[j] > 0:
                centers[j] = points[labels == j].mean(axis=0)
        if converged:
            break
    return centers, labels, inertia, iterations
