"""Dissimilarity maps between an observed frame and its static rendering.

Two complementary cues feed the motion-mask pipeline: a semantic map from
patch-feature cosine distance and an appearance map from SSIM, pooled to the
patch grid.  Both are standardized (z-score) and blended with weights that
track rendering fidelity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, InvalidDimensionError
from .grids import area_pool, rgb_to_gray, zscore


@dataclass(frozen=True)
class SsimParams:
    """Gaussian-window SSIM constants for images in [0,1]."""

    window_size: int = 11
    sigma: float = 1.5
    c1: float = 0.01**2
    c2: float = 0.03**2

    def __post_init__(self):
        if self.window_size < 1 or self.window_size % 2 == 0:
            raise InvalidArgumentError(f"window_size must be odd, got {self.window_size}")
        if not (self.sigma > 0 and self.c1 > 0 and self.c2 > 0):
            raise InvalidArgumentError("sigma, c1, c2 must all be positive")


@dataclass(frozen=True)
class FusionWeights:
    """Convex blend weights for (semantic, appearance) dissimilarity."""

    w_dino: float
    w_ssim: float

    def __post_init__(self):
        if not (0.0 <= self.w_dino <= 1.0 and 0.0 <= self.w_ssim <= 1.0):
            raise InvalidArgumentError("fusion weights must lie in [0, 1]")
        if abs(self.w_dino + self.w_ssim - 1.0) > 1e-9:
            raise InvalidArgumentError("fusion weights must sum to 1")


def l2_normalize_features(feats: np.ndarray) -> np.ndarray:
    """Unit-normalize feature vectors along the last axis; zero stays zero."""
    feats = np.asarray(feats, dtype=np.float64)
    norms = np.linalg.norm(feats, axis=-1, keepdims=True)
    safe = np.where(norms > 0.0, norms, 1.0)
    return feats / safe


def dino_dissimilarity(feats_observed, feats_rendered) -> np.ndarray:
    """Per-patch 1 - cosine similarity between observed and rendered features.

    Features are L2-normalized internally; a zero-norm vector contributes a
    cosine of 0, so its dissimilarity is 1 (maximal uncertainty).
    """
    fo = np.asarray(feats_observed, dtype=np.float64)
    fr = np.asarray(feats_rendered, dtype=np.float64)
    if fo.shape != fr.shape or fo.ndim != 3:
        raise InvalidDimensionError(
            f"feature grids must share an (h,w,d) shape, got {fo.shape} vs {fr.shape}"
        )
    cos = np.sum(l2_normalize_features(fo) * l2_normalize_features(fr), axis=-1)
    return 1.0 - cos


def zero_norm_patches(feats) -> int:
    """Count of zero-norm feature vectors, for pipeline diagnostics."""
    feats = np.asarray(feats, dtype=np.float64)
    return int(np.count_nonzero(np.linalg.norm(feats, axis=-1) == 0.0))


def _gaussian_kernel(window_size: int, sigma: float) -> np.ndarray:
    r = (window_size - 1) / 2.0
    x = np.arange(window_size, dtype=np.float64) - r
    k = np.exp(-(x**2) / (2.0 * sigma**2))
    return k / k.sum()  # renormalized after truncation


def _valid_filter(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Separable valid-mode correlation with a symmetric 1-D kernel."""
    from numpy.lib.stride_tricks import sliding_window_view

    t = sliding_window_view(img, kernel.size, axis=1) @ kernel
    return sliding_window_view(t, kernel.size, axis=0) @ kernel


def ssim_map(observed, rendered, params: SsimParams = SsimParams()) -> np.ndarray:
    """Per-pixel SSIM via valid-mode Gaussian-window local statistics.

    Inputs are converted to grayscale; the output has shape
    (H - window + 1, W - window + 1) and values in [-1, 1].
    """
    a = rgb_to_gray(np.asarray(observed, dtype=np.float64))
    b = rgb_to_gray(np.asarray(rendered, dtype=np.float64))
    if a.shape != b.shape:
        raise InvalidDimensionError(f"image shapes differ: {a.shape} vs {b.shape}")
    h, w = a.shape
    win = params.window_size
    if h < win or w < win:
        raise InvalidDimensionError(f"image {a.shape} smaller than SSIM window {win}")
    kernel = _gaussian_kernel(win, params.sigma)
    mu_a = _valid_filter(a, kernel)
    mu_b = _valid_filter(b, kernel)
    var_a = _valid_filter(a * a, kernel) - mu_a**2
    var_b = _valid_filter(b * b, kernel) - mu_b**2
    cov = _valid_filter(a * b, kernel) - mu_a * mu_b
    c1, c2 = params.c1, params.c2
    return ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) / (
        (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
    )


def ssim_dissimilarity(
    observed, rendered, grid_h: int, grid_w: int, params: SsimParams = SsimParams()
) -> np.ndarray:
    """1 - SSIM, re-expanded to full resolution and area-pooled to the patch grid.

    The valid-mode SSIM map is padded back to H x W by edge replication so the
    pooled grid is exactly (grid_h, grid_w).
    """
    d = 1.0 - ssim_map(observed, rendered, params)
    r = (params.window_size - 1) // 2
    full = np.pad(d, r, mode="edge")
    return area_pool(full, grid_h, grid_w)


def adaptive_weights(
    batch_mean_psnr: float,
    pivot_db: float = 15.0,
    slope_per_db: float = 0.1,
    clamp: tuple[float, float] = (0.2, 0.8),
) -> FusionWeights:
    """Fidelity-dependent fusion weights.

    The appearance weight grows linearly with rendering PSNR,
    w_ssim = clamp((psnr - pivot) * slope, lo, hi), shifting trust from the
    semantic cue to the photometric cue as renderings improve.
    """
    if not np.isfinite(batch_mean_psnr):
        raise InvalidArgumentError("batch mean PSNR must be finite")
    lo, hi = clamp
    w_ssim = float(np.clip((batch_mean_psnr - pivot_db) * slope_per_db, lo, hi))
    return FusionWeights(w_dino=1.0 - w_ssim, w_ssim=w_ssim)


def fuse_saliency(d_dino, d_ssim, weights: FusionWeights) -> np.ndarray:
    """Weighted sum of z-scored semantic and appearance dissimilarity maps."""
    d_dino = np.asarray(d_dino, dtype=np.float64)
    d_ssim = np.asarray(d_ssim, dtype=np.float64)
    if d_dino.shape != d_ssim.shape:
        raise InvalidDimensionError(
            f"saliency grids must share a shape, got {d_dino.shape} vs {d_ssim.shape}"
        )
    return weights.w_dino * zscore(d_dino) + weights.w_ssim * zscore(d_ssim)
