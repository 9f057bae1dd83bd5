"""Bit-exact file I/O for the four grid formats.

* ``WRZF`` — patch-feature file: magic, u32-LE version=1, u32 h, u32 w,
  u32 d, then h*w*d float32-LE, row-major channel-last.
* ``WRZL`` — layer-difference file: magic, u32-LE version=1, u32 nLayers,
  then per layer u32 H, u32 W followed by H*W float32-LE.
* masks — 8-bit single-channel PNG, 255 = foreground/dynamic, 0 = background;
  any value >= 128 reads as 1.  The polarity is a convention of this toolkit.
* images — 8-bit RGB PNG, intensities mapped to [0,1] by /255.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import FileFormatError, InvalidArgumentError

WRZF_MAGIC = b"WRZF"
WRZL_MAGIC = b"WRZL"
FORMAT_VERSION = 1


def _read_exact(fh, n: int, what: str) -> bytes:
    buf = fh.read(n)
    if len(buf) != n:
        raise FileFormatError(f"truncated file while reading {what}")
    return buf


def _read_header(fh, magic: bytes, path) -> None:
    got = _read_exact(fh, 4, "magic")
    if got != magic:
        raise FileFormatError(f"{path}: bad magic {got!r}, expected {magic!r}")
    (version,) = struct.unpack("<I", _read_exact(fh, 4, "version"))
    if version != FORMAT_VERSION:
        raise FileFormatError(f"{path}: unsupported version {version}")


def write_feature_file(path, feats) -> None:
    """Write an (h, w, d) patch-feature grid as a WRZF file."""
    feats = np.asarray(feats, dtype=np.float32)
    if feats.ndim != 3:
        raise InvalidArgumentError(f"expected (h,w,d) features, got shape {feats.shape}")
    h, w, d = feats.shape
    with open(path, "wb") as fh:
        fh.write(WRZF_MAGIC)
        fh.write(struct.pack("<IIII", FORMAT_VERSION, h, w, d))
        fh.write(feats.astype("<f4").tobytes(order="C"))


def read_feature_file(path) -> np.ndarray:
    """Read a WRZF file back into an (h, w, d) float32 array."""
    with open(path, "rb") as fh:
        _read_header(fh, WRZF_MAGIC, path)
        h, w, d = struct.unpack("<III", _read_exact(fh, 12, "dims"))
        if h < 1 or w < 1 or d < 1:
            raise FileFormatError(f"{path}: invalid dims ({h},{w},{d})")
        raw = _read_exact(fh, 4 * h * w * d, "feature data")
        if fh.read(1):
            raise FileFormatError(f"{path}: trailing bytes after feature data")
    return np.frombuffer(raw, dtype="<f4").reshape(h, w, d).copy()


def write_layer_diff_file(path, layers) -> None:
    """Write per-layer perceptual difference maps as a WRZL file."""
    layers = [np.asarray(layer, dtype=np.float32) for layer in layers]
    if not layers:
        raise InvalidArgumentError("WRZL files need at least one layer")
    for layer in layers:
        if layer.ndim != 2:
            raise InvalidArgumentError(f"each layer must be 2-D, got shape {layer.shape}")
    with open(path, "wb") as fh:
        fh.write(WRZL_MAGIC)
        fh.write(struct.pack("<II", FORMAT_VERSION, len(layers)))
        for layer in layers:
            fh.write(struct.pack("<II", layer.shape[0], layer.shape[1]))
            fh.write(layer.astype("<f4").tobytes(order="C"))


def read_layer_diff_file(path) -> list[np.ndarray]:
    """Read a WRZL file back into a list of (H, W) float32 arrays."""
    with open(path, "rb") as fh:
        _read_header(fh, WRZL_MAGIC, path)
        (n_layers,) = struct.unpack("<I", _read_exact(fh, 4, "layer count"))
        if n_layers < 1:
            raise FileFormatError(f"{path}: layer count must be >= 1")
        layers = []
        for i in range(n_layers):
            h, w = struct.unpack("<II", _read_exact(fh, 8, f"layer {i} dims"))
            if h < 1 or w < 1:
                raise FileFormatError(f"{path}: invalid layer dims ({h},{w})")
            raw = _read_exact(fh, 4 * h * w, f"layer {i} data")
            layers.append(np.frombuffer(raw, dtype="<f4").reshape(h, w).copy())
        if fh.read(1):
            raise FileFormatError(f"{path}: trailing bytes after last layer")
    return layers


def write_image_png(path, img) -> None:
    """Write an (H, W, 3) image in [0,1] as an 8-bit RGB PNG."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        img = np.repeat(img[:, :, None], 3, axis=2)
    if img.ndim != 3 or img.shape[2] != 3:
        raise InvalidArgumentError(f"expected (H,W,3) image, got shape {img.shape}")
    u8 = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(u8, mode="RGB").save(path, format="PNG")


def read_image_png(path) -> np.ndarray:
    """Read an RGB PNG into an (H, W, 3) float64 array in [0,1]."""
    with Image.open(path) as im:
        u8 = np.asarray(im.convert("RGB"), dtype=np.uint8)
    return u8.astype(np.float64) / 255.0


def write_mask_png(path, mask) -> None:
    """Write a binary mask as an 8-bit grayscale PNG (foreground = 255)."""
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise InvalidArgumentError(f"expected (H,W) mask, got shape {mask.shape}")
    u8 = np.where(mask > 0, 255, 0).astype(np.uint8)
    Image.fromarray(u8, mode="L").save(path, format="PNG")


def read_mask_png(path) -> np.ndarray:
    """Read a mask PNG into a {0,1} uint8 array; values >= 128 count as 1."""
    with Image.open(path) as im:
        u8 = np.asarray(im.convert("L"), dtype=np.uint8)
    return (u8 >= 128).astype(np.uint8)


def write_soft_mask_png(path, mask) -> None:
    """Write a soft [0,1] mask as an 8-bit grayscale PNG (quantized)."""
    mask = np.asarray(mask, dtype=np.float64)
    if mask.ndim != 2:
        raise InvalidArgumentError(f"expected (H,W) mask, got shape {mask.shape}")
    u8 = np.clip(np.rint(mask * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(u8, mode="L").save(path, format="PNG")


def read_soft_mask_png(path) -> np.ndarray:
    """Read a grayscale PNG into an (H, W) float64 mask in [0,1]."""
    with Image.open(path) as im:
        u8 = np.asarray(im.convert("L"), dtype=np.uint8)
    return u8.astype(np.float64) / 255.0


def list_grid_files(directory, suffixes=(".png",)) -> list[Path]:
    """Files in a directory with the given suffixes, sorted by name."""
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"not a directory: {directory}")
    return sorted(p for p in directory.iterdir() if p.suffix.lower() in suffixes)
