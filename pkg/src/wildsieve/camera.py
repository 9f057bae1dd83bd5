"""Camera parameterization, Plucker ray maps, and trajectory segmentation.

Poses are stored camera-to-world: ``rotation`` maps camera-frame vectors into
the world frame and ``translation`` is the camera center in world units.
Rays are cast through pixel centers, i.e. through (u + 0.5, v + 0.5).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRotationError, InvalidArgumentError, InvalidDimensionError

ORTHONORMALITY_TOL = 1e-6
_PARALLEL_SEED_FLOOR = 1e-8


@dataclass(frozen=True)
class Intrinsics:
    """Pinhole intrinsics in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise InvalidArgumentError(f"focal lengths must be positive, got ({self.fx}, {self.fy})")


@dataclass(frozen=True)
class Pose:
    """Camera-to-world rigid pose: 3x3 rotation plus camera center."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=np.float64)
        t = np.asarray(self.translation, dtype=np.float64)
        if r.shape != (3, 3):
            raise InvalidDimensionError(f"rotation must be 3x3, got {r.shape}")
        if t.shape != (3,):
            raise InvalidDimensionError(f"translation must be a 3-vector, got {t.shape}")
        if np.max(np.abs(r.T @ r - np.eye(3))) > ORTHONORMALITY_TOL:
            raise InvalidArgumentError("rotation is not orthonormal within 1e-6")
        if abs(np.linalg.det(r) - 1.0) > ORTHONORMALITY_TOL:
            raise InvalidArgumentError("rotation must have determinant +1")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)


@dataclass(frozen=True)
class PluckerRayMap:
    """Pixel-aligned ray map: unit directions and moments m = o x d."""

    directions: np.ndarray  # (H, W, 3), unit vectors
    moments: np.ndarray  # (H, W, 3)

    @property
    def height(self) -> int:
        return self.directions.shape[0]

    @property
    def width(self) -> int:
        return self.directions.shape[1]

    def as_array(self) -> np.ndarray:
        """(H, W, 6) array with direction channels first, then moment."""
        return np.concatenate([self.directions, self.moments], axis=2)


@dataclass(frozen=True)
class TrajectorySegment:
    """Inclusive frame range [start_index, end_index] with its path length."""

    start_index: int
    end_index: int
    path_length: float


def rot6d_to_matrix(v) -> np.ndarray:
    """Gram-Schmidt a 6D rotation representation into a rotation matrix.

    ``v`` holds the first two column seeds (a1, a2) concatenated.  Columns:
    c1 = normalize(a1), c2 = normalize(a2 - (a2.c1) c1), c3 = c1 x c2.
    """
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    if v.shape != (6,):
        raise InvalidDimensionError(f"expected 6 values, got shape {np.shape(v)}")
    a1, a2 = v[:3], v[3:]
    n1 = np.linalg.norm(a1)
    if n1 < _PARALLEL_SEED_FLOOR:
        raise DegenerateRotationError("first rotation seed is (near) zero")
    c1 = a1 / n1
    u2 = a2 - (a2 @ c1) * c1
    n2 = np.linalg.norm(u2)
    if n2 < _PARALLEL_SEED_FLOOR:
        raise DegenerateRotationError("rotation seeds are (near) parallel")
    c2 = u2 / n2
    c3 = np.cross(c1, c2)
    return np.column_stack([c1, c2, c3])


def matrix_to_rot6d(rotation) -> np.ndarray:
    """First two columns of a rotation matrix, flattened to 6 values."""
    r = np.asarray(rotation, dtype=np.float64)
    if r.shape != (3, 3):
        raise InvalidDimensionError(f"expected 3x3 matrix, got {r.shape}")
    return np.concatenate([r[:, 0], r[:, 1]])


def plucker_ray_map(intrinsics: Intrinsics, pose: Pose, height: int, width: int) -> PluckerRayMap:
    """Per-pixel Plucker rays for a camera, cast through pixel centers.

    Camera-frame direction at pixel (u, v) is
    ((u+0.5-cx)/fx, (v+0.5-cy)/fy, 1), rotated to world and normalized;
    the moment is o x d with o the camera center.
    """
    if height < 1 or width < 1:
        raise InvalidDimensionError(f"ray map needs positive dims, got ({height},{width})")
    u = (np.arange(width, dtype=np.float64) + 0.5 - intrinsics.cx) / intrinsics.fx
    v = (np.arange(height, dtype=np.float64) + 0.5 - intrinsics.cy) / intrinsics.fy
    dirs_cam = np.empty((height, width, 3), dtype=np.float64)
    dirs_cam[:, :, 0] = u[None, :]
    dirs_cam[:, :, 1] = v[:, None]
    dirs_cam[:, :, 2] = 1.0
    dirs_world = dirs_cam @ pose.rotation.T
    dirs_world /= np.linalg.norm(dirs_world, axis=2, keepdims=True)
    moments = np.cross(np.broadcast_to(pose.translation, dirs_world.shape), dirs_world)
    return PluckerRayMap(directions=dirs_world, moments=moments)


def segment_trajectory(centers, tau_translation: float) -> list[TrajectorySegment]:
    """Greedily split a camera path by cumulative consecutive-step translation.

    A segment closes at the first frame where the chord length accumulated
    since the segment start reaches ``tau_translation``; the final partial
    segment is always emitted.  Segments tile the input without gaps.
    """
    centers = np.asarray(centers, dtype=np.float64)
    if centers.ndim != 2 or centers.shape[1] != 3 or centers.shape[0] < 1:
        raise InvalidDimensionError(f"expected (N,3) centers with N >= 1, got {centers.shape}")
    if not tau_translation > 0:
        raise InvalidArgumentError("tau_translation must be positive")
    n = centers.shape[0]
    steps = np.linalg.norm(np.diff(centers, axis=0), axis=1)
    segments: list[TrajectorySegment] = []
    start = 0
    acc = 0.0
    for i in range(1, n):
        if i <= start:
            continue  # the step into a segment's first frame precedes its start
        acc += steps[i - 1]
        if acc >= tau_translation:
            segments.append(TrajectorySegment(start, i, float(acc)))
            start = i + 1
            acc = 0.0
    if start < n:
        segments.append(TrajectorySegment(start, n - 1, float(acc)))
    return segments


def load_camera_json(path) -> tuple[Intrinsics, list[Pose]]:
    """Load shared intrinsics and per-frame poses from a camera JSON file.

    Schema: ``{"intrinsics": {"fx","fy","cx","cy"}, "frames": [{"rot6d": [6]
    | "R": [9 row-major], "t": [3]}, ...]}``.
    """
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    try:
        k = doc["intrinsics"]
        intr = Intrinsics(fx=float(k["fx"]), fy=float(k["fy"]), cx=float(k["cx"]), cy=float(k["cy"]))
        frames = doc["frames"]
    except KeyError as exc:
        raise InvalidArgumentError(f"camera JSON missing key: {exc}") from exc
    if not frames:
        raise InvalidArgumentError("camera JSON has no frames")
    poses = []
    for i, frame in enumerate(frames):
        if "rot6d" in frame:
            rot = rot6d_to_matrix(np.asarray(frame["rot6d"], dtype=np.float64))
        elif "R" in frame:
            rot = np.asarray(frame["R"], dtype=np.float64).reshape(3, 3)
        else:
            raise InvalidArgumentError(f"frame {i}: needs 'rot6d' or 'R'")
        t = np.asarray(frame["t"], dtype=np.float64)
        poses.append(Pose(rotation=rot, translation=t))
    return intr, poses
