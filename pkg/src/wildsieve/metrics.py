"""Masked image-quality metrics and motion-mask quality metrics.

PSNR/SSIM/LPIPS are restricted to spatial regions given by real-valued masks
M in [0,1]^(HxW), so static and transient regions can be scored separately.
All three masked metrics are ratios, hence invariant to positive scaling of
the mask.  Perceptual difference maps arrive pre-computed as WRZL layer
stacks (see ``fileio``); the layer sum here is unweighted, so any learned
layer weighting must already be baked into the maps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyMaskError, InvalidArgumentError, InvalidDimensionError
from .grids import area_pool
from .saliency import SsimParams, ssim_map

# MSE floor <-> 100 dB cap: identical frame pairs occur in paired
# transient/clean captures and JSON cannot carry infinity.
MSE_FLOOR = 1e-10
PSNR_CAP_DB = 100.0


def psnr(observed, rendered) -> tuple[float, bool]:
    """Full-frame PSNR in dB with the saturation cap; returns (dB, saturated)."""
    a = np.asarray(observed, dtype=np.float64)
    b = np.asarray(rendered, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidDimensionError(f"image shapes differ: {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse < MSE_FLOOR:
        return PSNR_CAP_DB, True
    return -10.0 * math.log10(mse), False


def masked_psnr(observed, rendered, mask) -> tuple[float, bool]:
    """PSNR over a soft mask: MSE_M = sum((I-Ih)^2 M) / (C sum M).

    Returns (dB, saturated); MSE below ``MSE_FLOOR`` caps at 100 dB with the
    flag set.  An all-zero mask raises ``EmptyMaskError``.
    """
    a = np.asarray(observed, dtype=np.float64)
    b = np.asarray(rendered, dtype=np.float64)
    m = np.asarray(mask, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidDimensionError(f"image shapes differ: {a.shape} vs {b.shape}")
    if m.shape != a.shape[:2]:
        raise InvalidDimensionError(f"mask shape {m.shape} does not match image {a.shape[:2]}")
    total = float(m.sum())
    if total <= 0.0:
        raise EmptyMaskError("mask has zero total weight")
    sq = (a - b) ** 2
    if sq.ndim == 2:
        sq = sq[:, :, None]
    channels = sq.shape[2]
    mse = float(np.sum(sq * m[:, :, None]) / (channels * total))
    if mse < MSE_FLOOR:
        return PSNR_CAP_DB, True
    return -10.0 * math.log10(mse), False


def masked_ssim(observed, rendered, mask, params: SsimParams = SsimParams()) -> float:
    """Mask-weighted mean of the SSIM map.

    The SSIM map is valid-mode (H' = H - window + 1); the mask is symmetric
    center-cropped by the window margin to the same resolution before
    weighting, then area-pooled (an identity at matching sizes).
    """
    s = ssim_map(observed, rendered, params)
    m = np.asarray(mask, dtype=np.float64)
    a = np.asarray(observed)
    if m.shape != a.shape[:2]:
        raise InvalidDimensionError(f"mask shape {m.shape} does not match image {a.shape[:2]}")
    r = (params.window_size - 1) // 2
    cropped = m[r : m.shape[0] - r, r : m.shape[1] - r]
    pooled = area_pool(cropped, s.shape[0], s.shape[1])
    total = float(pooled.sum())
    if total <= 0.0:
        raise EmptyMaskError("mask is empty after pooling to the SSIM resolution")
    return float(np.sum(s * pooled) / total)


def masked_lpips(layer_diffs, mask) -> float:
    """Masked perceptual distance: per-layer masked means of D summed over layers.

    ``layer_diffs`` is a list of non-negative (H_l, W_l) difference maps; the
    mask is area-pooled to each layer resolution.
    """
    if not layer_diffs:
        raise InvalidArgumentError("need at least one layer difference map")
    m = np.asarray(mask, dtype=np.float64)
    total = 0.0
    for i, layer in enumerate(layer_diffs):
        d = np.asarray(layer, dtype=np.float64)
        if d.ndim != 2:
            raise InvalidDimensionError(f"layer {i} must be 2-D, got shape {d.shape}")
        pooled = area_pool(m, d.shape[0], d.shape[1])
        denom = float(pooled.sum())
        if denom <= 0.0:
            raise EmptyMaskError(f"mask is empty after pooling to layer {i} resolution")
        total += float(np.sum(d * pooled) / denom)
    return total


def mask_iou_recall(pred, gt) -> tuple[float, float]:
    """IoU and recall of a predicted binary mask against ground truth.

    Both metrics are 1.0 on an empty denominator (both masks empty / empty gt).
    """
    p = np.asarray(pred).astype(bool)
    g = np.asarray(gt).astype(bool)
    if p.shape != g.shape:
        raise InvalidDimensionError(f"mask shapes differ: {p.shape} vs {g.shape}")
    inter = int(np.count_nonzero(p & g))
    union = int(np.count_nonzero(p | g))
    gt_count = int(np.count_nonzero(g))
    iou = 1.0 if union == 0 else inter / union
    recall = 1.0 if gt_count == 0 else inter / gt_count
    return iou, recall


@dataclass
class FrameMetrics:
    """Masked-metric results for one frame."""

    frame: str
    psnr_masked: float | None = None
    ssim_masked: float | None = None
    lpips_masked: float | None = None
    saturated: bool = False
    iou: float | None = None
    recall: float | None = None


@dataclass
class MetricsReport:
    """Per-frame results plus arithmetic-mean aggregates."""

    per_frame: list[FrameMetrics] = field(default_factory=list)

    @staticmethod
    def _mean(values) -> float | None:
        values = [v for v in values if v is not None]
        return float(np.mean(values)) if values else None

    def summary(self) -> dict:
        return {
            "psnr": self._mean(f.psnr_masked for f in self.per_frame),
            "ssim": self._mean(f.ssim_masked for f in self.per_frame),
            "lpips": self._mean(f.lpips_masked for f in self.per_frame),
            "miou": self._mean(f.iou for f in self.per_frame),
            "recall": self._mean(f.recall for f in self.per_frame),
        }

    def to_dict(self) -> dict:
        per_frame = []
        for f in self.per_frame:
            entry = {
                "frame": f.frame,
                "psnr_masked": f.psnr_masked,
                "ssim_masked": f.ssim_masked,
                "lpips_masked": f.lpips_masked,
                "saturated": f.saturated,
            }
            if f.iou is not None:
                entry["iou"] = f.iou
            if f.recall is not None:
                entry["recall"] = f.recall
            per_frame.append(entry)
        return {"per_frame": per_frame, "summary": self.summary()}
