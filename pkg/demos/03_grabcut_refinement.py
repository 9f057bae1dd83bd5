"""GrabCut boundary refinement from a coarse seed mask.

The pseudo-mask pipeline produces patch-aligned, blocky proposals.  GrabCut
sharpens them: two Gaussian mixture color models (foreground/background) set
the data terms of a pixel graph, contrast-sensitive edge weights set the
smoothness terms, and an exact min cut relabels the uncertain band.  Energy
never increases across iterations.
"""

from pathlib import Path

import numpy as np

from wildsieve import (
    GrabcutParams,
    fileio,
    grabcut_refine,
    mask_iou_recall,
    morph,
    trimap_from_mask,
)

OUT = Path(__file__).parent / "output" / "grabcut"


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(5)
    size = 192

    # A noisy two-tone scene: bright elliptical blob on a dark background.
    yy, xx = np.mgrid[0:size, 0:size]
    gt = ((yy - 90) ** 2 / 55**2 + (xx - 100) ** 2 / 40**2 <= 1.0).astype(np.uint8)
    img = np.clip(0.12 + rng.normal(0, 0.02, (size, size, 3)), 0, 1)
    img[gt.astype(bool)] = np.clip(
        np.array([0.85, 0.75, 0.2]) + rng.normal(0, 0.03, (int(gt.sum()), 3)), 0, 1
    )

    # Coarse, blocky proposal: the true blob quantized to 16px patches, then
    # dilated so the true boundary lies inside the uncertain band.  The
    # definite seed must sit safely *inside* the true object (blocky masks
    # carry background pixels, and hard labels never flip), hence the strong
    # erosion before seeding.
    coarse = np.kron(
        (gt.reshape(size // 16, 16, size // 16, 16).mean(axis=(1, 3)) > 0.3), np.ones((16, 16))
    ).astype(np.uint8)
    proposal = morph(coarse, "dilate", 3, 2)
    seed = morph(proposal, "erode", 3, 8)
    before, _ = mask_iou_recall(proposal, gt)

    trimap = trimap_from_mask(proposal, seed)
    refined, energies = grabcut_refine(
        img, trimap, GrabcutParams(iterations=5), seed=0, return_energy=True
    )
    after, _ = mask_iou_recall(refined, gt)

    print(f"blocky proposal IoU: {before:.3f}")
    print(f"refined mask IoU:    {after:.3f}")
    print("energy per iteration:", " -> ".join(f"{e:.0f}" for e in energies))
    fileio.write_image_png(OUT / "scene.png", img)
    fileio.write_mask_png(OUT / "proposal.png", proposal)
    fileio.write_mask_png(OUT / "refined.png", refined)
    print(f"Outputs in {OUT}")


if __name__ == "__main__":
    main()
