import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wildsieve import (
    FusionWeights,
    InvalidArgumentError,
    InvalidDimensionError,
    SsimParams,
    adaptive_weights,
    dino_dissimilarity,
    fuse_saliency,
    ssim_dissimilarity,
    ssim_map,
    zscore,
)

rng = np.random.default_rng(1)


class TestDinoDissimilarity:
    def test_identical_features_zero(self):
        feats = rng.normal(size=(4, 4, 8))
        np.testing.assert_allclose(dino_dissimilarity(feats, feats), 0.0, atol=1e-12)

    def test_orthogonal_features_one(self):
        a = np.zeros((2, 2, 4))
        b = np.zeros((2, 2, 4))
        a[..., 0] = 1.0
        b[..., 1] = 1.0
        np.testing.assert_allclose(dino_dissimilarity(a, b), 1.0, atol=1e-12)

    def test_antipodal_features_two(self):
        a = np.zeros((2, 2, 4))
        a[..., 0] = 1.0
        np.testing.assert_allclose(dino_dissimilarity(a, -a), 2.0, atol=1e-12)

    def test_zero_norm_vector_gives_one(self):
        a = np.zeros((1, 1, 4))
        b = np.ones((1, 1, 4))
        np.testing.assert_allclose(dino_dissimilarity(a, b), 1.0)

    def test_normalization_internal(self):
        feats = rng.normal(size=(3, 3, 5))
        np.testing.assert_allclose(
            dino_dissimilarity(feats, 7.5 * feats), 0.0, atol=1e-12
        )

    def test_range(self):
        a, b = rng.normal(size=(6, 6, 8)), rng.normal(size=(6, 6, 8))
        d = dino_dissimilarity(a, b)
        assert d.min() >= 0.0 and d.max() <= 2.0


class TestSsimMap:
    def test_identical_images_all_ones(self):
        img = rng.random((32, 32))
        np.testing.assert_allclose(ssim_map(img, img), 1.0, atol=1e-9)

    def test_constant_black_vs_white(self):
        # Constant stats: S = C1 / (1 + C1) since C2 cancels.
        p = SsimParams()
        s = ssim_map(np.zeros((16, 16)), np.ones((16, 16)), p)
        expected = p.c1 / (1.0 + p.c1)
        np.testing.assert_allclose(s, expected, atol=1e-12)
        assert expected == pytest.approx(9.999e-5, rel=1e-3)

    def test_symmetry(self):
        a, b = rng.random((20, 24)), rng.random((20, 24))
        np.testing.assert_allclose(ssim_map(a, b), ssim_map(b, a), atol=1e-9)

    def test_valid_mode_shape(self):
        s = ssim_map(rng.random((30, 40)), rng.random((30, 40)))
        assert s.shape == (20, 30)

    def test_never_exceeds_one(self):
        for seed in range(5):
            g = np.random.default_rng(seed)
            a, b = g.random((24, 24)), g.random((24, 24))
            assert ssim_map(a, b).max() <= 1.0 + 1e-9

    def test_image_smaller_than_window_rejected(self):
        with pytest.raises(InvalidDimensionError):
            ssim_map(np.zeros((8, 8)), np.zeros((8, 8)))

    def test_rgb_converted_to_gray(self):
        a = rng.random((16, 16, 3))
        s = ssim_map(a, a)
        np.testing.assert_allclose(s, 1.0, atol=1e-9)


class TestSsimDissimilarity:
    def test_identical_images_zero_patch_grid(self):
        img = rng.random((64, 64))
        d = ssim_dissimilarity(img, img, 4, 4)
        assert d.shape == (4, 4)
        np.testing.assert_allclose(d, 0.0, atol=1e-9)

    def test_patch16_grid_shape(self):
        a, b = rng.random((256, 256)), rng.random((256, 256))
        assert ssim_dissimilarity(a, b, 16, 16).shape == (16, 16)

    def test_monotone_in_noise(self):
        base = np.clip(0.5 + 0.2 * np.sin(np.linspace(0, 20, 64))[:, None], 0, 1)
        base = np.repeat(base, 64, axis=1)
        g = np.random.default_rng(9)
        noise = g.normal(size=base.shape)
        means = []
        for level in (0.02, 0.08, 0.2):
            noisy = np.clip(base + level * noise, 0, 1)
            means.append(ssim_dissimilarity(base, noisy, 4, 4).mean())
        assert means[0] < means[1] < means[2]


class TestAdaptiveWeights:
    @pytest.mark.parametrize(
        "psnr_db,expected",
        [(15.0, (0.8, 0.2)), (20.0, (0.5, 0.5)), (30.0, (0.2, 0.8))],
    )
    def test_schedule_points(self, psnr_db, expected):
        w = adaptive_weights(psnr_db)
        assert (w.w_dino, w.w_ssim) == pytest.approx(expected)

    def test_clamp_below(self):
        assert adaptive_weights(-10.0).w_ssim == pytest.approx(0.2)

    @given(st.floats(-20, 80), st.floats(-20, 80))
    @settings(max_examples=80, deadline=None)
    def test_monotone_and_valid(self, p1, p2):
        w1, w2 = adaptive_weights(p1), adaptive_weights(p2)
        if p1 <= p2:
            assert w1.w_ssim <= w2.w_ssim
        assert w1.w_dino + w1.w_ssim == pytest.approx(1.0, abs=1e-9)


class TestFuseSaliency:
    def test_pure_dino_weight(self):
        d1, d2 = rng.random((5, 5)), rng.random((5, 5))
        out = fuse_saliency(d1, d2, FusionWeights(1.0, 0.0))
        np.testing.assert_allclose(out, zscore(d1), atol=1e-12)

    def test_equal_inputs_any_weights(self):
        d = rng.random((5, 5))
        out = fuse_saliency(d, d, FusionWeights(0.3, 0.7))
        np.testing.assert_allclose(out, zscore(d), atol=1e-12)

    def test_opposite_zscores_cancel(self):
        out = fuse_saliency([0.0, 1.0, 2.0], [2.0, 1.0, 0.0], FusionWeights(0.5, 0.5))
        np.testing.assert_allclose(out, 0.0, atol=1e-12)

    def test_affine_rescale_invariance(self):
        d1, d2 = rng.random((6, 6)), rng.random((6, 6))
        w = FusionWeights(0.6, 0.4)
        a = fuse_saliency(d1, d2, w)
        b = fuse_saliency(3.0 * d1 + 5.0, d2, w)
        np.testing.assert_allclose(a, b, atol=1e-9)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(InvalidDimensionError):
            fuse_saliency(np.zeros((2, 2)), np.zeros((3, 3)), FusionWeights(0.5, 0.5))

    def test_weights_validated(self):
        with pytest.raises(InvalidArgumentError):
            FusionWeights(0.5, 0.6)
