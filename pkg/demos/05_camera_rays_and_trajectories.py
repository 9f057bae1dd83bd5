"""Plucker ray maps and trajectory segmentation.

Cameras condition a token-space renderer through pixel-aligned Plucker rays:
each pixel carries a unit direction d and a moment m = o x d, a complete,
origin-independent encoding of the viewing line.  Long handheld clips are
split into segments of sufficient parallax by translation magnitude.
"""

import numpy as np

from wildsieve import (
    Intrinsics,
    Pose,
    matrix_to_rot6d,
    plucker_ray_map,
    rot6d_to_matrix,
    segment_trajectory,
)


def main():
    # 6D rotation: two seed vectors, Gram-Schmidt orthonormalized.
    seeds = np.array([0.9, 0.1, 0.0, -0.2, 1.1, 0.3])
    rotation = rot6d_to_matrix(seeds)
    print("rotation from 6D seeds, det =", round(float(np.linalg.det(rotation)), 12))
    roundtrip = rot6d_to_matrix(matrix_to_rot6d(rotation))
    print("roundtrip error:", float(np.max(np.abs(roundtrip - rotation))))

    intr = Intrinsics(fx=96.0, fy=96.0, cx=32.0, cy=32.0)
    pose = Pose(rotation=rotation, translation=np.array([0.5, -0.2, 1.0]))
    rays = plucker_ray_map(intr, pose, 64, 64)
    norms = np.linalg.norm(rays.directions, axis=2)
    dots = np.sum(rays.directions * rays.moments, axis=2)
    print(f"ray map 64x64: max | |d|-1 | = {np.max(np.abs(norms - 1)):.2e}, "
          f"max |d.m| = {np.max(np.abs(dots)):.2e}")

    # A walkthrough: slow pan, a pause, then a brisk move down a hallway.
    rng = np.random.default_rng(2)
    speeds = np.concatenate([np.full(30, 0.04), np.full(15, 0.0), np.full(25, 0.12)])
    steps = np.stack([speeds, rng.normal(0, 0.002, speeds.size), np.zeros(speeds.size)], axis=1)
    centers = np.concatenate([np.zeros((1, 3)), np.cumsum(steps, axis=0)], axis=0)
    segments = segment_trajectory(centers, tau_translation=1.0)
    print(f"{centers.shape[0]} frames -> {len(segments)} segments:")
    for s in segments:
        print(f"  frames {s.start_index:3d}..{s.end_index:3d}  path {s.path_length:.2f}")


if __name__ == "__main__":
    main()
