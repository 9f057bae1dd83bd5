"""Command-line frontend wiring the library into batch pipelines.

Subcommands: pseudomask, metrics, evalmask, augment, raymap, tokenmask,
grabcut-debug.  Frames are paired across directories by sorted filename stem;
every run writes ``config.echo.json`` next to its outputs so reruns are
reproducible bit for bit.  Exit codes: 0 success, 1 validation error, 2 I/O
error.  Set ``WILDSIEVE_LOG`` to error/warn/info/debug to control logging.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import fileio
from .augment import PasteConfig, PasteObject, clustered_token_mask, copy_paste
from .camera import load_camera_json, plucker_ray_map
from .errors import FileFormatError, InvalidArgumentError, WildsieveError
from .grabcut import (
    TRIMAP_BG,
    TRIMAP_FG,
    TRIMAP_PROB_BG,
    TRIMAP_PROB_FG,
    GrabcutParams,
    grabcut_refine,
)
from .metrics import (
    FrameMetrics,
    MetricsReport,
    mask_iou_recall,
    masked_lpips,
    masked_psnr,
    masked_ssim,
)
from .pseudomask import PseudoMaskConfig, build_pseudo_masks

logger = logging.getLogger("wildsieve")

_LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad flags; the contract here is exit 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise _UsageError(message)


def _configure_logging() -> None:
    level = _LOG_LEVELS.get(os.environ.get("WILDSIEVE_LOG", "warn").lower(), logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _stems(directory, suffixes) -> dict[str, Path]:
    return {p.stem: p for p in fileio.list_grid_files(directory, suffixes)}


def _paired_stems(named_dirs: dict[str, dict[str, Path]]) -> list[str]:
    """Common sorted stems; raises listing the difference if the sets differ."""
    sets = {name: set(stems) for name, stems in named_dirs.items()}
    reference_name = next(iter(sets))
    reference = sets[reference_name]
    problems = []
    for name, stems in sets.items():
        missing = sorted(reference - stems)
        extra = sorted(stems - reference)
        if missing:
            problems.append(f"{name} is missing: {', '.join(missing)}")
        if extra:
            problems.append(f"{name} has extra: {', '.join(extra)}")
    if problems:
        raise InvalidArgumentError("frame sets do not match; " + "; ".join(problems))
    if not reference:
        raise InvalidArgumentError(f"no frames found in --{reference_name}")
    return sorted(reference)


def _write_json(path, payload) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _echo_config(out_dir, subcommand: str, args: argparse.Namespace) -> None:
    options = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items() if k != "func"}
    _write_json(Path(out_dir) / "config.echo.json", {"subcommand": subcommand, "options": options})


def _default_threads() -> int:
    return os.cpu_count() or 1


# ---------------------------------------------------------------- pseudomask


def _cmd_pseudomask(args) -> int:
    dirs = {
        "observed": _stems(args.observed, (".png",)),
        "rendered": _stems(args.rendered, (".png",)),
        "features": _stems(args.features, (".wrzf",)),
        "rendered-features": _stems(args.rendered_features, (".wrzf",)),
    }
    stems = _paired_stems(dirs)
    observed = [fileio.read_image_png(dirs["observed"][s]) for s in stems]
    rendered = [fileio.read_image_png(dirs["rendered"][s]) for s in stems]
    feats_obs = [fileio.read_feature_file(dirs["features"][s]) for s in stems]
    feats_ren = [fileio.read_feature_file(dirs["rendered-features"][s]) for s in stems]

    cfg = PseudoMaskConfig(
        k_clusters=args.k,
        psnr_gate_db=args.psnr_gate,
        dilate_kernel=args.dilate_kernel,
        dilate_iterations=args.dilate_iterations,
        min_component_fraction=args.min_component_fraction,
        grabcut=GrabcutParams(gamma=args.gamma, iterations=args.grabcut_iterations),
        seed=args.seed,
    )
    result = build_pseudo_masks(observed, rendered, feats_obs, feats_ren, cfg, threads=args.threads)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    per_frame = []
    for stem, frame in zip(stems, result.frames):
        if frame.gated:
            logger.info("frame %s gated (PSNR %.2f dB)", stem, frame.psnr_db)
        else:
            fileio.write_mask_png(out / f"{stem}.png", frame.mask)
        per_frame.append(
            {
                "frame": stem,
                "gated": frame.gated,
                "psnr_db": frame.psnr_db,
                "saturated": frame.saturated,
                "foreground_pixels": None if frame.mask is None else int(frame.mask.sum()),
            }
        )
    diagnostics = dict(result.diagnostics)
    diagnostics["per_frame"] = per_frame
    diagnostics["all_gated"] = result.all_gated
    if result.cluster_mean_saliency is not None:
        sbar = result.cluster_mean_saliency
        diagnostics["cluster_mean_saliency"] = [None if np.isnan(v) else float(v) for v in sbar]
    _write_json(out / "diagnostics.json", diagnostics)
    _echo_config(out, "pseudomask", args)
    if result.all_gated:
        logger.warning("all frames gated by the %.1f dB PSNR gate; no masks written", cfg.psnr_gate_db)
    return 0


# ------------------------------------------------------------------- metrics


def _cmd_metrics(args) -> int:
    dirs = {
        "observed": _stems(args.observed, (".png",)),
        "rendered": _stems(args.rendered, (".png",)),
        "mask": _stems(args.mask, (".png",)),
    }
    if args.lpips is not None:
        dirs["lpips"] = _stems(args.lpips, (".wrzl",))
    stems = _paired_stems(dirs)

    report = MetricsReport()
    for s in stems:
        obs = fileio.read_image_png(dirs["observed"][s])
        ren = fileio.read_image_png(dirs["rendered"][s])
        mask = fileio.read_soft_mask_png(dirs["mask"][s])
        if args.invert_mask:
            mask = 1.0 - mask  # static region = 1 - transient mask
        db, sat = masked_psnr(obs, ren, mask)
        entry = FrameMetrics(
            frame=s,
            psnr_masked=db,
            ssim_masked=masked_ssim(obs, ren, mask),
            saturated=sat,
        )
        if args.lpips is not None:
            layers = fileio.read_layer_diff_file(dirs["lpips"][s])
            entry.lpips_masked = masked_lpips(layers, mask)
        report.per_frame.append(entry)
    _write_json(args.report, report.to_dict())
    _echo_config(Path(args.report).parent, "metrics", args)
    return 0


def _cmd_evalmask(args) -> int:
    dirs = {"pred": _stems(args.pred, (".png",)), "gt": _stems(args.gt, (".png",))}
    stems = _paired_stems(dirs)
    report = MetricsReport()
    for s in stems:
        pred = fileio.read_mask_png(dirs["pred"][s])
        gt = fileio.read_mask_png(dirs["gt"][s])
        iou, recall = mask_iou_recall(pred, gt)
        report.per_frame.append(FrameMetrics(frame=s, iou=iou, recall=recall))
    _write_json(args.report, report.to_dict())
    _echo_config(Path(args.report).parent, "evalmask", args)
    return 0


# ------------------------------------------------------------------- augment


def _load_object_bank(directory) -> list[PasteObject]:
    directory = Path(directory)
    manifest = directory / "manifest.json"
    entries = []
    if manifest.is_file():
        with open(manifest, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        for obj in doc.get("objects", []):
            entries.append((directory / obj["file"], obj.get("category", "")))
    else:
        entries = [(p, p.stem) for p in fileio.list_grid_files(directory, (".png",))]
    if not entries:
        raise InvalidArgumentError(f"no sprites found in object bank {directory}")
    bank = []
    from PIL import Image

    for path, category in entries:
        with Image.open(path) as im:
            rgba = np.asarray(im.convert("RGBA"), dtype=np.float64) / 255.0
        bank.append(PasteObject(rgb=rgba[:, :, :3], alpha=rgba[:, :, 3], category=category))
    return bank


def _cmd_augment(args) -> int:
    scenes_dir = Path(args.scenes)
    subdirs = sorted(p for p in scenes_dir.iterdir() if p.is_dir())
    scenes = [(p.name, p) for p in subdirs] if subdirs else [(scenes_dir.name, scenes_dir)]
    bank = _load_object_bank(args.objects)
    cfg = PasteConfig(seed=args.seed)
    out_root = Path(args.out)
    summary = []
    for scene_id, scene_dir in scenes:
        view_paths = fileio.list_grid_files(scene_dir, (".png",))
        if not view_paths:
            raise InvalidArgumentError(f"scene {scene_id} has no PNG views")
        views = [fileio.read_image_png(p) for p in view_paths]
        out_views, masks, report = copy_paste(views, bank, cfg, scene_id=scene_id)
        scene_out = out_root / scene_id
        scene_out.mkdir(parents=True, exist_ok=True)
        for path, view, mask in zip(view_paths, out_views, masks):
            fileio.write_image_png(scene_out / path.name, view)
            fileio.write_mask_png(scene_out / f"{path.stem}_paste.png", mask)
        summary.append(
            {
                "scene": scene_id,
                "augmented": report.augmented,
                "per_view": report.per_view,
                "object_count": report.object_count,
                "skipped_objects": report.skipped_objects,
            }
        )
    _write_json(out_root / "augment_report.json", {"scenes": summary})
    _echo_config(out_root, "augment", args)
    return 0


# -------------------------------------------------------------------- raymap


def _cmd_raymap(args) -> int:
    intr, poses = load_camera_json(args.camera)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i, pose in enumerate(poses):
        rays = plucker_ray_map(intr, pose, args.height, args.width)
        fileio.write_feature_file(out / f"frame{i:04d}.wrzf", rays.as_array())
    _echo_config(out, "raymap", args)
    return 0


# ----------------------------------------------------------------- tokenmask


def _cmd_tokenmask(args) -> int:
    mask = clustered_token_mask(args.height, args.width, args.ratio, args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fileio.write_mask_png(out, mask)
    _echo_config(out.parent, "tokenmask", args)
    return 0


# ------------------------------------------------------------- grabcut-debug

# 8-bit trimap PNG bands: <64 bg, 64-127 probable bg, 128-191 probable fg,
# >=192 fg.
_TRIMAP_BANDS = ((192, TRIMAP_FG), (128, TRIMAP_PROB_FG), (64, TRIMAP_PROB_BG), (0, TRIMAP_BG))


def _decode_trimap(values: np.ndarray) -> np.ndarray:
    tri = np.full(values.shape, TRIMAP_BG, dtype=np.uint8)
    tri[values >= 64] = TRIMAP_PROB_BG
    tri[values >= 128] = TRIMAP_PROB_FG
    tri[values >= 192] = TRIMAP_FG
    return tri


def _cmd_grabcut_debug(args) -> int:
    image = fileio.read_image_png(args.image)
    from PIL import Image

    with Image.open(args.trimap) as im:
        tri_values = np.asarray(im.convert("L"), dtype=np.uint8)
    trimap = _decode_trimap(tri_values)
    params = GrabcutParams(gamma=args.gamma, iterations=args.iterations)
    mask = grabcut_refine(image, trimap, params, seed=args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fileio.write_mask_png(out, mask)
    _echo_config(out.parent, "grabcut-debug", args)
    return 0


# --------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wildsieve", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("pseudomask", help="construct pseudo motion masks for a frame batch")
    p.add_argument("--observed", required=True, help="directory of observed frame PNGs")
    p.add_argument("--rendered", required=True, help="directory of static-rendering PNGs")
    p.add_argument("--features", required=True, help="directory of observed-frame WRZF features")
    p.add_argument("--rendered-features", required=True, help="directory of rendering WRZF features")
    p.add_argument("--out", required=True, help="output directory for mask PNGs + diagnostics")
    p.add_argument("--k", type=int, default=24, help="cluster count (default 24)")
    p.add_argument("--psnr-gate", type=float, default=17.0, help="PSNR gate in dB (default 17)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--dilate-kernel", type=int, default=3)
    p.add_argument("--dilate-iterations", type=int, default=1)
    p.add_argument("--min-component-fraction", type=float, default=0.0025)
    p.add_argument("--gamma", type=float, default=50.0)
    p.add_argument("--grabcut-iterations", type=int, default=5)
    p.set_defaults(func=_cmd_pseudomask)

    p = sub.add_parser("metrics", help="masked PSNR/SSIM(/LPIPS) over a frame batch")
    p.add_argument("--observed", required=True)
    p.add_argument("--rendered", required=True)
    p.add_argument("--mask", required=True, help="directory of mask PNGs (soft masks allowed)")
    p.add_argument("--lpips", default=None, help="directory of WRZL layer-difference files")
    p.add_argument(
        "--invert-mask",
        action="store_true",
        help="score the mask complement (static region = 1 - transient mask)",
    )
    p.add_argument("--report", required=True, help="output report JSON path")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("evalmask", help="mIoU/Recall of predicted vs ground-truth masks")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--report", required=True)
    p.set_defaults(func=_cmd_evalmask)

    p = sub.add_parser("augment", help="copy-paste transient augmentation over scenes")
    p.add_argument("--scenes", required=True, help="scene directory (or directory of scene subdirs)")
    p.add_argument("--objects", required=True, help="RGBA sprite bank directory")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_augment)

    p = sub.add_parser("raymap", help="write Plucker ray maps (WRZF, d=6) for a camera file")
    p.add_argument("--camera", required=True, help="camera JSON file")
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_raymap)

    p = sub.add_parser("tokenmask", help="write a clustered token mask PNG")
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--ratio", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_tokenmask)

    p = sub.add_parser("grabcut-debug", help="run GrabCut refinement on an image + trimap PNG")
    p.add_argument("--image", required=True)
    p.add_argument("--trimap", required=True, help="8-bit PNG; bands 0/85/170/255")
    p.add_argument("--out", required=True)
    p.add_argument("--gamma", type=float, default=50.0)
    p.add_argument("--iterations", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_grabcut_debug)

    return parser


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError:
        return 1
    except (FileFormatError, OSError) as exc:
        logger.error("%s", exc)
        sys.stderr.write(f"wildsieve: i/o error: {exc}\n")
        return 2
    except (WildsieveError, ValueError) as exc:
        logger.error("%s", exc)
        sys.stderr.write(f"wildsieve: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
