"""Pseudo motion-mask construction from rendering residuals.

Given a batch of observed frames, their static renderings, and patch features
for both, the pipeline (1) gates frames by rendering PSNR, (2) fuses semantic
and appearance dissimilarity into a patch-resolution saliency grid, (3)
clusters patch features across the batch, (4) selects consistently salient
clusters, and (5) rasterizes, cleans, and GrabCut-refines the selection into
per-frame binary masks.  Everything before rasterization runs at patch
resolution, never at pixel resolution.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .clustering import kmeans
from .errors import InvalidArgumentError, InvalidDimensionError
from .grabcut import GrabcutParams, grabcut_refine, trimap_from_mask
from .grids import filter_small_components, morph, nearest_upsample
from .metrics import psnr
from .saliency import (
    FusionWeights,
    SsimParams,
    adaptive_weights,
    dino_dissimilarity,
    fuse_saliency,
    l2_normalize_features,
    ssim_dissimilarity,
    zero_norm_patches,
)


@dataclass
class ClusterModel:
    """Batch K-means over L2-normalized patch features."""

    k: int
    centroids: np.ndarray  # (k, d)
    assignments: list[np.ndarray]  # per frame, (h, w) cluster indices
    requested_k: int
    inertia: float


@dataclass(frozen=True)
class ClusterSelectionParams:
    """Foreground-cluster selection rule knobs."""

    top_fraction: float = 0.05
    saliency_percentile: float = 75.0
    min_frames: int = 4

    def __post_init__(self):
        if not 0.0 < self.top_fraction <= 1.0:
            raise InvalidArgumentError("top_fraction must lie in (0, 1]")
        if not 0.0 <= self.saliency_percentile <= 100.0:
            raise InvalidArgumentError("saliency_percentile must lie in [0, 100]")
        if self.min_frames < 1:
            raise InvalidArgumentError("min_frames must be >= 1")


@dataclass(frozen=True)
class PseudoMaskConfig:
    """Full pipeline configuration with the stage defaults."""

    k_clusters: int = 24
    psnr_gate_db: float = 17.0
    dilate_kernel: int = 3
    dilate_iterations: int = 1
    min_component_fraction: float = 0.0025
    grabcut: GrabcutParams = field(default_factory=GrabcutParams)
    selection: ClusterSelectionParams = field(default_factory=ClusterSelectionParams)
    ssim: SsimParams = field(default_factory=SsimParams)
    seed: int = 0

    def __post_init__(self):
        if self.k_clusters < 1:
            raise InvalidArgumentError("k_clusters must be >= 1")
        if not np.isfinite(self.psnr_gate_db):
            raise InvalidArgumentError("psnr_gate_db must be finite")


@dataclass
class FramePseudoMask:
    """Per-frame outcome: either a binary mask or a gated-out marker."""

    mask: np.ndarray | None
    gated: bool
    psnr_db: float
    saturated: bool


@dataclass
class PseudoMaskResult:
    frames: list[FramePseudoMask]
    selected_clusters: list[int]
    cluster_mean_saliency: np.ndarray | None
    weights: FusionWeights | None
    all_gated: bool
    diagnostics: dict


def cluster_patches(features, k: int, seed) -> ClusterModel:
    """K-means over all patch embeddings of a batch, L2-normalized internally.

    Deterministic given the seed.  If the batch holds fewer distinct feature
    vectors than ``k``, the cluster count is reduced to the distinct count and
    the requested value is kept for diagnostics.
    """
    if not features:
        raise InvalidArgumentError("cluster_patches needs at least one feature map")
    shapes = {np.asarray(f).shape for f in features}
    grids = [np.asarray(f, dtype=np.float64) for f in features]
    if any(g.ndim != 3 for g in grids) or len({g.shape[2] for g in grids}) != 1:
        raise InvalidDimensionError(f"feature maps must share an (h,w,d) depth, got {shapes}")
    h, w, d = grids[0].shape
    if any(g.shape != (h, w, d) for g in grids):
        raise InvalidDimensionError(f"feature maps must share one grid shape, got {shapes}")
    points = np.concatenate([l2_normalize_features(g).reshape(-1, d) for g in grids], axis=0)
    if points.shape[0] < k:
        raise InvalidArgumentError(f"total patch count {points.shape[0]} is below k={k}")
    requested = k
    distinct = np.unique(points, axis=0).shape[0]
    k = min(k, distinct)
    centroids, labels, inertia, _ = kmeans(points, k, seed, max_iter=100, tol=1e-4)
    per_frame = [
        labels[i * h * w : (i + 1) * h * w].reshape(h, w) for i in range(len(grids))
    ]
    return ClusterModel(
        k=k, centroids=centroids, assignments=per_frame, requested_k=requested, inertia=inertia
    )


def select_motion_clusters(
    model: ClusterModel, saliency, params: ClusterSelectionParams = ClusterSelectionParams()
) -> list[int]:
    """Clusters marked as motion by the top-rank + cross-frame consistency rule.

    A cluster is selected iff (a) its mean fused saliency over all member
    patches across all frames ranks within the top ceil(top_fraction * K)
    clusters, and (b) its per-frame mean saliency strictly exceeds that
    frame's ``saliency_percentile`` threshold in at least min(min_frames, B)
    frames.  Returns sorted cluster ids.
    """
    if len(saliency) != len(model.assignments):
        raise InvalidDimensionError("need one saliency grid per clustered frame")
    k = model.k
    n_frames = len(saliency)
    total_sum = np.zeros(k)
    total_count = np.zeros(k)
    salient_frames = np.zeros(k, dtype=np.int64)
    for assign, sal in zip(model.assignments, saliency):
        sal = np.asarray(sal, dtype=np.float64)
        if sal.shape != assign.shape:
            raise InvalidDimensionError(
                f"saliency shape {sal.shape} does not match assignments {assign.shape}"
            )
        flat = assign.ravel()
        vals = sal.ravel()
        sums = np.bincount(flat, weights=vals, minlength=k)
        counts = np.bincount(flat, minlength=k)
        total_sum += sums
        total_count += counts
        threshold = np.percentile(vals, params.saliency_percentile)
        present = counts > 0
        frame_mean = np.divide(sums, counts, out=np.zeros(k), where=present)
        salient_frames += (present & (frame_mean > threshold)).astype(np.int64)

    populated = total_count > 0
    mean_saliency = np.divide(total_sum, total_count, out=np.full(k, -np.inf), where=populated)
    top_n = max(1, math.ceil(params.top_fraction * k))
    order = sorted(range(k), key=lambda j: (-mean_saliency[j], j))
    top_set = set(order[:top_n])
    needed = min(params.min_frames, n_frames)
    return sorted(j for j in top_set if salient_frames[j] >= needed)


def cluster_mean_saliency(model: ClusterModel, saliency) -> np.ndarray:
    """Mean fused saliency per cluster over all frames (NaN for empty clusters)."""
    k = model.k
    total_sum = np.zeros(k)
    total_count = np.zeros(k)
    for assign, sal in zip(model.assignments, saliency):
        total_sum += np.bincount(assign.ravel(), weights=np.asarray(sal).ravel(), minlength=k)
        total_count += np.bincount(assign.ravel(), minlength=k)
    return np.divide(total_sum, total_count, out=np.full(k, np.nan), where=total_count > 0)


def _refine_frame(observed_img, raster_mask, cfg: PseudoMaskConfig, frame_seed):
    """Morphology + component filtering + GrabCut for one rasterized mask."""
    mask = morph(raster_mask, "dilate", cfg.dilate_kernel, cfg.dilate_iterations)
    mask = filter_small_components(mask, cfg.min_component_fraction)
    if not mask.any():
        return mask
    seed_mask = morph(mask, "erode", 3, 2)
    if not seed_mask.any():
        seed_mask = mask  # erosion emptied the seed; fall back to the mask
    trimap = trimap_from_mask(mask, seed_mask)
    return grabcut_refine(observed_img, trimap, cfg.grabcut, seed=frame_seed)


def build_pseudo_masks(
    observed,
    rendered,
    features_observed,
    features_rendered,
    cfg: PseudoMaskConfig = PseudoMaskConfig(),
    threads: int = 1,
) -> PseudoMaskResult:
    """Run the full pseudo-mask pipeline over an aligned batch of frames.

    Frames whose full-frame rendering PSNR is at or below the gate produce no
    mask and are excluded from clustering and from the batch-mean PSNR that
    drives the fusion weights.  Deterministic for a fixed config seed; the
    thread count never changes results.
    """
    batch = len(observed)
    if batch == 0:
        raise InvalidArgumentError("empty batch")
    if not (len(rendered) == len(features_observed) == len(features_rendered) == batch):
        raise InvalidArgumentError("observed/rendered/feature lists must have equal length")

    psnr_db = []
    saturated = []
    for obs, ren in zip(observed, rendered):
        db, sat = psnr(obs, ren)
        psnr_db.append(db)
        saturated.append(sat)
    gated = [db <= cfg.psnr_gate_db for db in psnr_db]
    active = [i for i in range(batch) if not gated[i]]

    diagnostics = {
        "psnr_db": list(psnr_db),
        "gated": list(gated),
        "requested_k": cfg.k_clusters,
    }
    if not active:
        frames = [
            FramePseudoMask(mask=None, gated=True, psnr_db=psnr_db[i], saturated=saturated[i])
            for i in range(batch)
        ]
        return PseudoMaskResult(
            frames=frames,
            selected_clusters=[],
            cluster_mean_saliency=None,
            weights=None,
            all_gated=True,
            diagnostics=diagnostics,
        )

    weights = adaptive_weights(float(np.mean([psnr_db[i] for i in active])))
    feats0 = np.asarray(features_observed[active[0]])
    grid_h, grid_w = feats0.shape[0], feats0.shape[1]

    fused = []
    zero_norm = 0
    for i in active:
        d_dino = dino_dissimilarity(features_observed[i], features_rendered[i])
        d_ssim = ssim_dissimilarity(observed[i], rendered[i], grid_h, grid_w, cfg.ssim)
        fused.append(fuse_saliency(d_dino, d_ssim, weights))
        zero_norm += zero_norm_patches(features_observed[i])
        zero_norm += zero_norm_patches(features_rendered[i])

    root = np.random.SeedSequence([int(cfg.seed)])
    model = cluster_patches([features_observed[i] for i in active], cfg.k_clusters, root.spawn(1)[0])
    selected = select_motion_clusters(model, fused, cfg.selection)
    sbar = cluster_mean_saliency(model, fused)

    diagnostics.update(
        {
            "effective_k": model.k,
            "selected_clusters": list(selected),
            "zero_norm_feature_patches": zero_norm,
            "fusion_weights": {"w_dino": weights.w_dino, "w_ssim": weights.w_ssim},
            "patch_elements_per_frame": grid_h * grid_w,
            "patch_elements_touched": len(active) * grid_h * grid_w,
        }
    )

    height = np.asarray(observed[active[0]]).shape[0]
    width = np.asarray(observed[active[0]]).shape[1]
    frame_seeds = {i: np.random.SeedSequence([int(cfg.seed), 1, i]) for i in active}

    def _build_one(position: int) -> np.ndarray:
        i = active[position]
        patch_sel = np.isin(model.assignments[position], selected)
        if not patch_sel.any():
            return np.zeros((height, width), dtype=np.uint8)
        raster = nearest_upsample(patch_sel.astype(np.uint8), height, width)
        return _refine_frame(observed[i], raster, cfg, frame_seeds[i])

    if threads > 1 and len(active) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            masks = list(pool.map(_build_one, range(len(active))))
    else:
        masks = [_build_one(p) for p in range(len(active))]

    by_index = dict(zip(active, masks))
    frames = []
    for i in range(batch):
        if gated[i]:
            frames.append(
                FramePseudoMask(mask=None, gated=True, psnr_db=psnr_db[i], saturated=saturated[i])
            )
        else:
            frames.append(
                FramePseudoMask(
                    mask=by_index[i], gated=False, psnr_db=psnr_db[i], saturated=saturated[i]
                )
            )
    return PseudoMaskResult(
        frames=frames,
        selected_clusters=list(selected),
        cluster_mean_saliency=sbar,
        weights=weights,
        all_gated=False,
        diagnostics=diagnostics,
    )
