"""Shared synthetic fixtures: a textured scene with a known transient."""

from __future__ import annotations

import math

import numpy as np
import pytest

PATCH = 16


def _blocky_texture(rng, size, patch):
    """Piecewise-constant random background in a blue-gray color band."""
    cells = size // patch
    coarse = np.stack(
        [
            rng.uniform(0.20, 0.40, size=(cells, cells)),
            rng.uniform(0.30, 0.50, size=(cells, cells)),
            rng.uniform(0.45, 0.70, size=(cells, cells)),
        ],
        axis=2,
    )
    return np.kron(coarse, np.ones((patch, patch))[:, :, None])


def make_synthetic_batch(
    num_frames: int = 8,
    size: int = 256,
    patch: int = PATCH,
    mover_patches: int = 3,
    feature_dim: int = 16,
    seed: int = 7,
    degrade_frame: int | None = None,
    degrade_psnr_db: float = 12.0,
):
    """Batch of (observed, rendered, features, gt masks) with a moving square.

    The background renders faithfully up to small noise; a bright square of
    ``mover_patches x mover_patches`` patches appears only in the observed
    frames, at patch-aligned positions, with patch features orthogonal to the
    background's.  Ground truth is known by construction.  Optionally one
    frame's rendering is degraded to ``degrade_psnr_db``.
    """
    rng = np.random.default_rng(seed)
    grid = size // patch
    background = _blocky_texture(rng, size, patch)
    mover_color = np.array([0.92, 0.10, 0.12])

    base_dir = rng.normal(size=feature_dim)
    base_dir /= np.linalg.norm(base_dir)
    ortho = rng.normal(size=feature_dim)
    ortho -= (ortho @ base_dir) * base_dir
    ortho /= np.linalg.norm(ortho)

    observed, rendered, feats_obs, feats_ren, gt_masks = [], [], [], [], []
    side = mover_patches * patch
    for f in range(num_frames):
        ren = np.clip(background + rng.normal(0.0, 0.01, background.shape), 0.0, 1.0)
        obs = np.clip(background + rng.normal(0.0, 0.01, background.shape), 0.0, 1.0)

        top_p = 1 + (f % max(1, grid - mover_patches - 2))
        left_p = 2 + (f % max(1, grid - mover_patches - 3))
        top, left = top_p * patch, left_p * patch
        square = np.clip(
            mover_color[None, None, :] + rng.normal(0.0, 0.02, (side, side, 3)), 0.0, 1.0
        )
        obs[top : top + side, left : left + side] = square
        gt = np.zeros((size, size), dtype=np.uint8)
        gt[top : top + side, left : left + side] = 1

        fo = base_dir[None, None, :] + rng.normal(0.0, 0.05, (grid, grid, feature_dim))
        fr = base_dir[None, None, :] + rng.normal(0.0, 0.05, (grid, grid, feature_dim))
        # The mover is one semantically coherent region: tight features keep
        # it a single cluster so the top-5% + consistency rule applies cleanly.
        mover_feat = ortho[None, None, :] + rng.normal(
            0.0, 0.01, (mover_patches, mover_patches, feature_dim)
        )
        fo[top_p : top_p + mover_patches, left_p : left_p + mover_patches] = mover_feat

        if f == degrade_frame:
            amplitude = math.sqrt(10.0 ** (-degrade_psnr_db / 10.0))
            sign = np.where(ren < 0.5, 1.0, -1.0)
            ren = ren + sign * amplitude  # stays within [0,1] by construction

        observed.append(obs)
        rendered.append(ren)
        feats_obs.append(fo.astype(np.float64))
        feats_ren.append(fr.astype(np.float64))
        gt_masks.append(gt)
    return {
        "observed": observed,
        "rendered": rendered,
        "features_observed": feats_obs,
        "features_rendered": feats_ren,
        "gt_masks": gt_masks,
        "patch": patch,
    }


def make_sprite(size: int = 40, color=(0.1, 0.8, 0.2), shape: str = "disk"):
    """An RGBA sprite with a tight alpha footprint."""
    yy, xx = np.mgrid[0:size, 0:size]
    if shape == "disk":
        r = size / 2.0 - 0.5
        alpha = (((yy - r) ** 2 + (xx - r) ** 2) <= r**2).astype(np.float64)
    else:
        alpha = np.ones((size, size))
    rgb = np.broadcast_to(np.asarray(color), (size, size, 3)).copy()
    return rgb, alpha


@pytest.fixture(scope="session")
def synthetic_batch():
    return make_synthetic_batch()


@pytest.fixture(scope="session")
def small_batch():
    """Cheap 128-pixel variant for fast pipeline tests."""
    return make_synthetic_batch(num_frames=4, size=128, mover_patches=2, seed=11)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion."""
    lines = {}
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance" not in nodeid or getattr(report, "when", "call") != "call":
                continue
            name = nodeid.split("::")[-1].split("[")[0]
            status = "PASS" if outcome == "passed" else "FAIL"
            if lines.get(name) != "FAIL":
                lines[name] = status
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name in sorted(lines):
            terminalreporter.write_line(f"[{lines[name]}] {name}")
