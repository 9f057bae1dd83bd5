"""wildsieve: transient-aware scene analysis toolkit.

Non-neural core of a transient-aware novel-view-synthesis pipeline:
self-supervised pseudo motion masks from rendering residuals, masked
image-quality metrics, motion-mask evaluation, copy-paste transient
augmentation, token-grid masking, and Plucker-ray camera geometry.
"""

from .augment import (
    PasteConfig,
    PasteObject,
    PasteReport,
    clustered_token_mask,
    copy_paste,
    dynamic_token_mask,
    random_token_mask,
)
from .camera import (
    Intrinsics,
    PluckerRayMap,
    Pose,
    TrajectorySegment,
    load_camera_json,
    matrix_to_rot6d,
    plucker_ray_map,
    rot6d_to_matrix,
    segment_trajectory,
)
from .errors import (
    DegenerateRotationError,
    EmptyMaskError,
    FileFormatError,
    InvalidArgumentError,
    InvalidDimensionError,
    WildsieveError,
)
from .grabcut import (
    TRIMAP_BG,
    TRIMAP_FG,
    TRIMAP_PROB_BG,
    TRIMAP_PROB_FG,
    Gmm,
    GrabcutParams,
    fit_gmm,
    grabcut_refine,
    trimap_from_mask,
)
from ._maxflow import min_cut
from .grids import (
    area_pool,
    connected_components,
    filter_small_components,
    morph,
    nearest_upsample,
    rgb_to_gray,
    threshold_mask,
    zscore,
)
from .metrics import (
    FrameMetrics,
    MetricsReport,
    mask_iou_recall,
    masked_lpips,
    masked_psnr,
    masked_ssim,
    psnr,
)
from .pseudomask import (
    ClusterModel,
    ClusterSelectionParams,
    FramePseudoMask,
    PseudoMaskConfig,
    PseudoMaskResult,
    build_pseudo_masks,
    cluster_patches,
    select_motion_clusters,
)
from .saliency import (
    FusionWeights,
    SsimParams,
    adaptive_weights,
    dino_dissimilarity,
    fuse_saliency,
    ssim_dissimilarity,
    ssim_map,
)

__version__ = "0.1.0"

__all__ = [
    "PasteConfig",
    "PasteObject",
    "PasteReport",
    "clustered_token_mask",
    "copy_paste",
    "dynamic_token_mask",
    "random_token_mask",
    "Intrinsics",
    "PluckerRayMap",
    "Pose",
    "TrajectorySegment",
    "load_camera_json",
    "matrix_to_rot6d",
    "plucker_ray_map",
    "rot6d_to_matrix",
    "segment_trajectory",
    "DegenerateRotationError",
    "EmptyMaskError",
    "FileFormatError",
    "InvalidArgumentError",
    "InvalidDimensionError",
    "WildsieveError",
    "TRIMAP_BG",
    "TRIMAP_FG",
    "TRIMAP_PROB_BG",
    "TRIMAP_PROB_FG",
    "Gmm",
    "GrabcutParams",
    "fit_gmm",
    "grabcut_refine",
    "trimap_from_mask",
    "min_cut",
    "area_pool",
    "connected_components",
    "filter_small_components",
    "morph",
    "nearest_upsample",
    "rgb_to_gray",
    "threshold_mask",
    "zscore",
    "FrameMetrics",
    "MetricsReport",
    "mask_iou_recall",
    "masked_lpips",
    "masked_psnr",
    "masked_ssim",
    "psnr",
    "ClusterModel",
    "ClusterSelectionParams",
    "FramePseudoMask",
    "PseudoMaskConfig",
    "PseudoMaskResult",
    "build_pseudo_masks",
    "cluster_patches",
    "select_motion_clusters",
    "FusionWeights",
    "SsimParams",
    "adaptive_weights",
    "dino_dissimilarity",
    "fuse_saliency",
    "ssim_dissimilarity",
    "ssim_map",
]
