"""Copy-paste transient augmentation and token-mask generation.

Sprites from an RGBA object bank are composited into otherwise-static views
to synthesize labeled transients, with the paste geometry and probability
rules enforced exactly: 1-2 objects per augmented scene, sprite longer side
in [0.25, 0.35] of min(H, W), bounding box at least 15% of the image side
from every border, Gaussian-feathered compositing, and sharp (un-feathered)
supervision masks.  RNG streams are keyed by (seed, scene, view) so adding
views never perturbs earlier draws.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np
from PIL import Image
from scipy import ndimage

from .errors import InvalidArgumentError, InvalidDimensionError
from .grids import area_pool, threshold_mask


@dataclass
class PasteObject:
    """An RGBA sprite with a tight alpha bounding box."""

    rgb: np.ndarray  # (h, w, 3) float in [0,1]
    alpha: np.ndarray  # (h, w) float in [0,1]
    category: str = ""

    def __post_init__(self):
        rgb = np.asarray(self.rgb, dtype=np.float64)
        alpha = np.asarray(self.alpha, dtype=np.float64)
        if rgb.ndim != 3 or rgb.shape[2] != 3 or alpha.shape != rgb.shape[:2]:
            raise InvalidDimensionError("sprite needs (h,w,3) rgb and matching (h,w) alpha")
        ys, xs = np.nonzero(alpha > 0)
        if ys.size == 0:
            raise InvalidArgumentError("sprite alpha is empty")
        # Tighten to the alpha bounding box so scale rules see the true extent.
        rgb = rgb[ys.min() : ys.max() + 1, xs.min() : xs.max() + 1]
        alpha = alpha[ys.min() : ys.max() + 1, xs.min() : xs.max() + 1]
        object.__setattr__(self, "rgb", rgb)
        object.__setattr__(self, "alpha", alpha)


@dataclass(frozen=True)
class PasteConfig:
    objects_min: int = 1
    objects_max: int = 2
    scale_range: tuple[float, float] = (0.25, 0.35)
    margin_fraction: float = 0.15
    blur_sigma: float = 3.0
    scene_probability: float = 0.5
    per_view_probability: float = 0.8
    seed: int = 0
    max_placement_attempts: int = 100

    def __post_init__(self):
        if self.objects_min < 1 or self.objects_max < self.objects_min:
            raise InvalidArgumentError("object count range must be ordered and >= 1")
        if not (0.0 < self.scale_range[0] <= self.scale_range[1] <= 1.0):
            raise InvalidArgumentError("scale_range must be ordered within (0, 1]")
        for p in (self.scene_probability, self.per_view_probability):
            if not 0.0 <= p <= 1.0:
                raise InvalidArgumentError("probabilities must lie in [0, 1]")


@dataclass
class Placement:
    """One realized paste: sprite index, scaled size, and top-left corner."""

    object_index: int
    top: int
    left: int
    height: int
    width: int
    longer_side: int
    target_side: float  # the continuous scale draw, before pixel rounding


@dataclass
class PasteReport:
    """What copy_paste actually did, for diagnostics and statistics."""

    augmented: bool
    per_view: bool | None = None
    object_count: int = 0
    placements: list[list[Placement]] = field(default_factory=list)  # per view
    skipped_objects: int = 0


def _stable_hash(text: str) -> int:
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "little")


def _resize_float(arr: np.ndarray, height: int, width: int) -> np.ndarray:
    """Bilinear resize of a float image/alpha via PIL, channel by channel."""
    if arr.ndim == 2:
        im = Image.fromarray(arr.astype(np.float32), mode="F")
        return np.asarray(im.resize((width, height), Image.BILINEAR), dtype=np.float64)
    return np.stack(
        [_resize_float(arr[:, :, c], height, width) for c in range(arr.shape[2])], axis=2
    )


def _draw_placements(rng, count, bank, height, width, cfg: PasteConfig):
    """Sample object choices, scales, and positions obeying margin rules."""
    side = min(height, width)
    margin_y = cfg.margin_fraction * height
    margin_x = cfg.margin_fraction * width
    placements = []
    skipped = 0
    for _ in range(count):
        placed = False
        for _attempt in range(cfg.max_placement_attempts):
            obj_idx = int(rng.integers(len(bank)))
            obj = bank[obj_idx]
            target = rng.uniform(cfg.scale_range[0], cfg.scale_range[1]) * side
            sh, sw = obj.alpha.shape
            scale = target / max(sh, sw)
            new_h = max(1, int(round(sh * scale)))
            new_w = max(1, int(round(sw * scale)))
            lo_y, hi_y = int(np.ceil(margin_y)), int(np.floor(height - margin_y - new_h))
            lo_x, hi_x = int(np.ceil(margin_x)), int(np.floor(width - margin_x - new_w))
            if hi_y < lo_y or hi_x < lo_x:
                continue  # does not fit under the margin; resample
            top = int(rng.integers(lo_y, hi_y + 1))
            left = int(rng.integers(lo_x, hi_x + 1))
            placements.append(
                Placement(
                    object_index=obj_idx,
                    top=top,
                    left=left,
                    height=new_h,
                    width=new_w,
                    longer_side=max(new_h, new_w),
                    target_side=float(target),
                )
            )
            placed = True
            break
        if not placed:
            skipped += 1
    return placements, skipped


def _composite(img: np.ndarray, bank, placements, cfg: PasteConfig):
    """Paste sprites with feathered alpha; returns (image, sharp paste mask)."""
    out = img.copy()
    paste_mask = np.zeros(img.shape[:2], dtype=np.uint8)
    for pl in placements:
        obj = bank[pl.object_index]
        rgb = _resize_float(obj.rgb, pl.height, pl.width)
        alpha = np.clip(_resize_float(obj.alpha, pl.height, pl.width), 0.0, 1.0)
        feathered = np.clip(ndimage.gaussian_filter(alpha, sigma=cfg.blur_sigma), 0.0, 1.0)
        ys = slice(pl.top, pl.top + pl.height)
        xs = slice(pl.left, pl.left + pl.width)
        out[ys, xs] = out[ys, xs] * (1.0 - feathered[:, :, None]) + np.clip(rgb, 0.0, 1.0) * (
            feathered[:, :, None]
        )
        paste_mask[ys, xs] |= (alpha > 0.5).astype(np.uint8)
    return out, paste_mask


def copy_paste(views, bank, cfg: PasteConfig = PasteConfig(), scene_id: str = "scene"):
    """Copy-paste augmentation for one scene's views.

    With probability ``scene_probability`` the scene is augmented, otherwise
    the views come back unchanged with empty masks.  An augmented scene draws
    an object count once; with probability ``per_view_probability`` each view
    then draws its own objects and placements, otherwise a single draw is
    shared across views.  Returns (augmented views, per-view paste masks,
    report).
    """
    if not bank:
        raise InvalidArgumentError("object bank is empty")
    views = [np.asarray(v, dtype=np.float64) for v in views]
    if not views:
        raise InvalidArgumentError("need at least one view")
    if len({v.shape for v in views}) != 1 or views[0].ndim != 3:
        raise InvalidDimensionError("all views must be (H,W,3) and equally sized")
    height, width = views[0].shape[:2]

    scene_key = _stable_hash(scene_id)
    scene_rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, scene_key]))
    empty = [np.zeros((height, width), dtype=np.uint8) for _ in views]
    if scene_rng.random() >= cfg.scene_probability:
        return [v.copy() for v in views], empty, PasteReport(augmented=False)

    count = int(scene_rng.integers(cfg.objects_min, cfg.objects_max + 1))
    per_view = bool(scene_rng.random() < cfg.per_view_probability)

    report = PasteReport(augmented=True, per_view=per_view, object_count=count)
    out_views, out_masks = [], []
    shared = None
    if not per_view:
        shared, skipped = _draw_placements(scene_rng, count, bank, height, width, cfg)
        report.skipped_objects += skipped
    for view_index, img in enumerate(views):
        if per_view:
            view_rng = np.random.default_rng(
                np.random.SeedSequence([cfg.seed, scene_key, view_index])
            )
            placements, skipped = _draw_placements(view_rng, count, bank, height, width, cfg)
            report.skipped_objects += skipped
        else:
            placements = shared
        composed, mask = _composite(img, bank, placements, cfg)
        report.placements.append(placements)
        out_views.append(composed)
        out_masks.append(mask)
    return out_views, out_masks, report


def clustered_token_mask(h: int, w: int, ratio: float, seed) -> np.ndarray:
    """A 4-connected blob of round(ratio * h * w) masked tokens.

    Grown by seeded BFS from a uniformly random token with randomized frontier
    order; connectivity holds by construction.  ratio 0 gives an empty mask,
    ratio 1 the full grid.
    """
    if not 0.0 <= ratio <= 1.0:
        raise InvalidArgumentError("ratio must lie in [0, 1]")
    if h < 1 or w < 1:
        raise InvalidDimensionError("token grid must be nonempty")
    n = int(np.floor(ratio * h * w + 0.5))
    mask = np.zeros((h, w), dtype=np.uint8)
    if n == 0:
        return mask
    rng = np.random.default_rng(seed)
    start = int(rng.integers(h * w))
    in_frontier = np.zeros(h * w, dtype=bool)
    selected = np.zeros(h * w, dtype=bool)
    frontier = [start]
    in_frontier[start] = True
    taken = 0
    while taken < n:
        pick = int(rng.integers(len(frontier)))
        frontier[pick], frontier[-1] = frontier[-1], frontier[pick]
        node = frontier.pop()
        selected[node] = True
        taken += 1
        y, x = divmod(node, w)
        for ny, nx in ((y - 1, x), (y + 1, x), (y, x - 1), (y, x + 1)):
            if 0 <= ny < h and 0 <= nx < w:
                nb = ny * w + nx
                if not selected[nb] and not in_frontier[nb]:
                    in_frontier[nb] = True
                    frontier.append(nb)
    mask.ravel()[selected] = 1
    return mask


def random_token_mask(h: int, w: int, ratio: float, seed) -> np.ndarray:
    """Uniformly random token mask with the same exact count rule (baseline)."""
    if not 0.0 <= ratio <= 1.0:
        raise InvalidArgumentError("ratio must lie in [0, 1]")
    n = int(np.floor(ratio * h * w + 0.5))
    rng = np.random.default_rng(seed)
    mask = np.zeros(h * w, dtype=np.uint8)
    mask[rng.choice(h * w, size=n, replace=False)] = 1
    return mask.reshape(h, w)


def dynamic_token_mask(motion_prob, patch_size: int, tau: float = 0.5) -> np.ndarray:
    """Patch-level dynamic-token mask from a pixel motion-probability map.

    The map is area-pooled to the token grid and thresholded strictly above
    ``tau``; zeroing the flagged tokens is the consumer's job.
    """
    prob = np.asarray(motion_prob, dtype=np.float64)
    if prob.ndim != 2:
        raise InvalidDimensionError(f"expected (H,W) probability map, got {prob.shape}")
    h, w = prob.shape
    if patch_size < 1 or h % patch_size or w % patch_size:
        raise InvalidDimensionError(
            f"image dims {prob.shape} must be divisible by patch_size {patch_size}"
        )
    pooled = area_pool(prob, h // patch_size, w // patch_size)
    return threshold_mask(pooled, tau)
