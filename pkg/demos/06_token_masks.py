"""Token-grid masking: clustered training masks and dynamic-token gating.

A masked renderer learns cross-view completion by training with a fraction
of input tokens zeroed out.  Clustered masks (one connected blob) emulate
object-shaped occlusions better than i.i.d. random token drops.  At
inference, the motion probability map is pooled to the token grid and
thresholded to decide which tokens to gate.
"""

import numpy as np

from wildsieve import clustered_token_mask, dynamic_token_mask, random_token_mask


def render_grid(mask):
    return "\n".join("".join("#" if v else "." for v in row) for row in mask)


def main():
    h = w = 16
    clustered = clustered_token_mask(h, w, ratio=0.10, seed=4)
    scattered = random_token_mask(h, w, ratio=0.10, seed=4)
    print(f"clustered mask, {int(clustered.sum())}/256 tokens (10%):")
    print(render_grid(clustered))
    print(f"\nrandom mask, {int(scattered.sum())}/256 tokens:")
    print(render_grid(scattered))

    # Dynamic-token gating: pool a pixel-level motion probability map to the
    # token grid; tokens strictly above the threshold get zeroed downstream.
    prob = np.zeros((256, 256))
    prob[64:128, 96:176] = 0.9  # a confident mover
    prob[200:232, 30:60] = 0.4  # sub-threshold flicker
    gated = dynamic_token_mask(prob, patch_size=16, tau=0.5)
    print(f"\ndynamic token mask ({int(gated.sum())} tokens gated):")
    print(render_grid(gated))


if __name__ == "__main__":
    main()
