"""Raster and grid primitives shared by every stage of the pipeline.

Conventions used throughout the package:

* images are ``(H, W)`` or ``(H, W, C)`` float arrays with values in [0, 1],
  row-major, channel-last;
* soft masks are ``(H, W)`` float arrays in [0, 1];
* binary masks are ``(H, W)`` arrays whose values are exactly 0 or 1
  (stored as ``uint8``);
* patch-feature maps are ``(h, w, d)`` float arrays on the patch grid.

Files store 32-bit floats; computation here is 64-bit.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .errors import InvalidArgumentError, InvalidDimensionError

# Population-sigma guard below which a grid is treated as constant.
ZSCORE_SIGMA_FLOOR = 1e-8

_GRAY_WEIGHTS = np.array([0.299, 0.587, 0.114])


def as_image(arr) -> np.ndarray:
    """Validate an image grid: (H,W) or (H,W,3), finite, values in [0,1]."""
    img = np.asarray(arr, dtype=np.float64)
    if img.ndim == 2:
        img = img[:, :, None]
    if img.ndim != 3 or img.shape[2] not in (1, 3):
        raise InvalidDimensionError(f"expected (H,W) or (H,W,1|3) image, got shape {np.shape(arr)}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise InvalidDimensionError(f"zero-sized image: {img.shape}")
    if not np.all(np.isfinite(img)):
        raise InvalidArgumentError("image contains non-finite values")
    if img.min() < 0.0 or img.max() > 1.0:
        raise InvalidArgumentError("image values must lie in [0, 1]")
    return img


def as_soft_mask(arr) -> np.ndarray:
    """Validate a soft mask: (H,W), finite, values in [0,1]."""
    m = np.asarray(arr, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise InvalidDimensionError(f"expected nonempty (H,W) mask, got shape {np.shape(arr)}")
    if not np.all(np.isfinite(m)):
        raise InvalidArgumentError("mask contains non-finite values")
    if m.min() < 0.0 or m.max() > 1.0:
        raise InvalidArgumentError("soft mask values must lie in [0, 1]")
    return m


def as_binary_mask(arr) -> np.ndarray:
    """Validate a binary mask: (H,W) with values exactly 0 or 1; returns uint8."""
    m = np.asarray(arr)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise InvalidDimensionError(f"expected nonempty (H,W) mask, got shape {np.shape(arr)}")
    vals = np.unique(m)
    if not np.all(np.isin(vals, (0, 1))):
        raise InvalidArgumentError("binary mask values must be exactly 0 or 1")
    return m.astype(np.uint8)


def rgb_to_gray(img: np.ndarray) -> np.ndarray:
    """Luma conversion 0.299 R + 0.587 G + 0.114 B; grayscale passes through."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        return img
    if img.shape[2] == 1:
        return img[:, :, 0]
    return img @ _GRAY_WEIGHTS


def _overlap_weights(n_src: int, n_tgt: int) -> np.ndarray:
    """(n_tgt, n_src) matrix of fractional interval overlaps, rows summing to 1.

    Target cell i spans [i*s, (i+1)*s) in source coordinates with s = n_src/n_tgt;
    entry (i, j) is the overlap length with source cell [j, j+1) divided by s.
    """
    s = n_src / n_tgt
    i = np.arange(n_tgt, dtype=np.float64)
    j = np.arange(n_src, dtype=np.float64)
    lo = np.maximum(i[:, None] * s, j[None, :])
    hi = np.minimum((i[:, None] + 1.0) * s, j[None, :] + 1.0)
    return np.clip(hi - lo, 0.0, None) / s


def area_pool(src, target_h: int, target_w: int) -> np.ndarray:
    """Pool a 2-D grid to (target_h, target_w) by exact area-weighted averaging.

    Each output cell is the mean of the source region its back-projected
    rectangle covers, with fractional cell coverage handled exactly, so
    non-divisible sizes are fine and constants are preserved.
    """
    src = np.asarray(src, dtype=np.float64)
    if src.ndim != 2:
        raise InvalidDimensionError(f"area_pool expects a 2-D grid, got shape {src.shape}")
    h, w = src.shape
    if h < 1 or w < 1 or target_h < 1 or target_w < 1:
        raise InvalidDimensionError("area_pool: zero-sized grid")
    if target_h > h or target_w > w:
        raise InvalidDimensionError(
            f"area_pool target ({target_h},{target_w}) exceeds source ({h},{w})"
        )
    return _overlap_weights(h, target_h) @ src @ _overlap_weights(w, target_w).T


def zscore(src) -> np.ndarray:
    """Standardize a grid to mean 0 / population std 1.

    A near-constant grid (population sigma below ``ZSCORE_SIGMA_FLOOR``) maps
    to all zeros: flat saliency carries no evidence.
    """
    src = np.asarray(src, dtype=np.float64)
    if src.size == 0:
        raise InvalidDimensionError("zscore of an empty grid")
    if not np.all(np.isfinite(src)):
        raise InvalidArgumentError("zscore input contains non-finite values")
    mu = src.mean()
    sigma = src.std()  # population (ddof=0)
    if sigma < ZSCORE_SIGMA_FLOOR:
        return np.zeros_like(src)
    return (src - mu) / sigma


def threshold_mask(src, tau: float) -> np.ndarray:
    """Binarize with a strict ``> tau`` rule (value == tau stays background)."""
    if not np.isfinite(tau):
        raise InvalidArgumentError("threshold must be finite")
    src = np.asarray(src, dtype=np.float64)
    return (src > tau).astype(np.uint8)


def morph(src, mode: str, kernel: int = 3, iterations: int = 1) -> np.ndarray:
    """Binary dilation/erosion with a square structuring element.

    ``kernel`` must be odd; pixels beyond the border count as background, so
    erosion shrinks masks that touch the frame edge.
    """
    if kernel < 1 or kernel % 2 == 0:
        raise InvalidArgumentError(f"kernel must be odd and >= 1, got {kernel}")
    if iterations < 0:
        raise InvalidArgumentError("iterations must be >= 0")
    m = as_binary_mask(src).astype(bool)
    if iterations == 0 or kernel == 1:
        return m.astype(np.uint8)
    structure = np.ones((kernel, kernel), dtype=bool)
    if mode == "dilate":
        out = ndimage.binary_dilation(m, structure=structure, iterations=iterations)
    elif mode == "erode":
        out = ndimage.binary_erosion(m, structure=structure, iterations=iterations, border_value=0)
    else:
        raise InvalidArgumentError(f"mode must be 'dilate' or 'erode', got {mode!r}")
    return out.astype(np.uint8)


def connected_components(src) -> tuple[np.ndarray, int]:
    """Label 8-connected foreground components; returns (labels, count)."""
    m = as_binary_mask(src)
    structure = np.ones((3, 3), dtype=bool)
    labels, count = ndimage.label(m, structure=structure)
    return labels, int(count)


def filter_small_components(src, min_area_fraction: float) -> np.ndarray:
    """Drop 8-connected components with pixel count < min_area_fraction * H * W."""
    if not 0.0 <= min_area_fraction <= 1.0:
        raise InvalidArgumentError("min_area_fraction must lie in [0, 1]")
    m = as_binary_mask(src)
    if min_area_fraction == 0.0:
        return m.copy()
    labels, count = connected_components(m)
    if count == 0:
        return m.copy()
    threshold = min_area_fraction * m.shape[0] * m.shape[1]
    sizes = np.bincount(labels.ravel(), minlength=count + 1)
    keep = sizes >= threshold
    keep[0] = False
    return keep[labels].astype(np.uint8)


def nearest_upsample(src, height: int, width: int) -> np.ndarray:
    """Nearest-neighbor upsampling of a coarse grid to (height, width)."""
    src = np.asarray(src)
    if src.ndim != 2:
        raise InvalidDimensionError(f"nearest_upsample expects a 2-D grid, got {src.shape}")
    h, w = src.shape
    if height < h or width < w:
        raise InvalidDimensionError("nearest_upsample target must not shrink the grid")
    rows = np.minimum((np.arange(height) * h) // height, h - 1)
    cols = np.minimum((np.arange(width) * w) // width, w - 1)
    return src[np.ix_(rows, cols)]
