"""Masked image-quality metrics: scoring static and transient regions apart.

Full-image PSNR can hide what matters: a renderer that nails the background
but hallucinates inside a small transient region looks nearly perfect on
average.  Restricting metrics to a spatial mask — and to its complement —
separates the two stories.
"""

import numpy as np

from wildsieve import masked_lpips, masked_psnr, masked_ssim, psnr


def main():
    rng = np.random.default_rng(3)
    size = 128
    observed = rng.random((size, size, 3))

    # The renderer reproduces the background well but fails inside a square.
    rendered = np.clip(observed + rng.normal(0, 0.01, observed.shape), 0, 1)
    transient = np.zeros((size, size))
    transient[40:80, 50:90] = 1.0
    rendered[transient.astype(bool)] = rng.random((int(transient.sum()), 3))

    full_db, _ = psnr(observed, rendered)
    static_db, _ = masked_psnr(observed, rendered, 1.0 - transient)
    transient_db, _ = masked_psnr(observed, rendered, transient)
    print(f"PSNR  full image: {full_db:5.2f} dB")
    print(f"PSNR  static (1 - M): {static_db:5.2f} dB   <- the background is fine")
    print(f"PSNR  transient (M):  {transient_db:5.2f} dB   <- the failure is here")

    print(f"SSIM  static:    {masked_ssim(observed, rendered, 1.0 - transient):.4f}")
    print(f"SSIM  transient: {masked_ssim(observed, rendered, transient):.4f}")

    # Perceptual distance consumes precomputed per-layer difference maps
    # (spatial mode); the masked mean per layer is summed across layers.
    layers = [np.abs(rng.normal(0, 0.05, (size // s, size // s))) for s in (2, 4, 8)]
    print(f"LPIPS full mask: {masked_lpips(layers, np.ones((size, size))):.4f}")
    print(f"LPIPS transient: {masked_lpips(layers, transient):.4f}")

    # All three masked metrics are ratios: rescaling the mask changes nothing.
    a = masked_psnr(observed, rendered, 0.5 * transient)[0]
    print(f"Mask-scale invariance: {abs(a - transient_db):.2e} dB difference at half weight")


if __name__ == "__main__":
    main()
