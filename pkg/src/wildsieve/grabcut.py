"""GrabCut boundary refinement: iterative GMM color modeling + graph cuts.

The refinement loop alternates (a) assigning pixels to mixture components,
(b) refitting per-class GMMs from the current labels, and (c) relabeling by
an exact s-t min cut whose data terms are negative log component likelihoods
and whose smoothness terms follow contrast-sensitive edge weights.  Each step
is a block-coordinate descent move, so total energy never increases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._maxflow import min_cut
from .clustering import kmeans
from .errors import InvalidArgumentError, InvalidDimensionError
from .grids import as_image

# Trimap labels.
TRIMAP_BG = 0
TRIMAP_PROB_BG = 1
TRIMAP_PROB_FG = 2
TRIMAP_FG = 3

COVARIANCE_EIGEN_FLOOR = 1e-6
_HARD_LINK = 1e9
_DATA_TERM_CAP = 1e8

_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class GrabcutParams:
    """Refinement knobs; defaults follow common GrabCut practice."""

    gamma: float = 50.0
    component_count: int = 5
    iterations: int = 5
    connectivity: int = 8

    def __post_init__(self):
        if not self.gamma > 0:
            raise InvalidArgumentError("gamma must be positive")
        if self.iterations < 1 or self.component_count < 1:
            raise InvalidArgumentError("iterations and component_count must be >= 1")
        if self.connectivity not in (4, 8):
            raise InvalidArgumentError("connectivity must be 4 or 8")


@dataclass
class Gmm:
    """Full-covariance Gaussian mixture over RGB colors."""

    weights: np.ndarray  # (k,)
    means: np.ndarray  # (k, 3)
    covariances: np.ndarray  # (k, 3, 3), eigenvalues floored

    @property
    def component_count(self) -> int:
        return self.weights.shape[0]

    def component_log_likelihood(self, pixels: np.ndarray) -> np.ndarray:
        """(n, k) values of log(weight_k * N(x | mu_k, Sigma_k)); -inf if weight 0."""
        pixels = np.asarray(pixels, dtype=np.float64)
        n, k = pixels.shape[0], self.component_count
        out = np.full((n, k), -np.inf)
        for j in range(k):
            if self.weights[j] <= 0.0:
                continue
            cov = self.covariances[j]
            chol = np.linalg.cholesky(cov)
            diff = pixels - self.means[j]
            y = np.linalg.solve(chol, diff.T)
            maha = np.sum(y * y, axis=0)
            logdet = 2.0 * np.sum(np.log(np.diag(chol)))
            out[:, j] = (
                np.log(self.weights[j]) - 0.5 * (3.0 * _LOG_2PI + logdet + maha)
            )
        return out

    def data_term(self, pixels: np.ndarray) -> np.ndarray:
        """Per-pixel -log of the best-component likelihood, capped for graph use."""
        best = self.component_log_likelihood(pixels).max(axis=1)
        return np.minimum(-best, _DATA_TERM_CAP)

    def assign_components(self, pixels: np.ndarray) -> np.ndarray:
        """Most likely component per pixel."""
        return np.argmax(self.component_log_likelihood(pixels), axis=1)


def _floor_covariance(cov: np.ndarray) -> np.ndarray:
    """Symmetrized covariance with eigenvalues floored to keep it SPD."""
    cov = 0.5 * (cov + cov.T)
    vals, vecs = np.linalg.eigh(cov)
    vals = np.maximum(vals, COVARIANCE_EIGEN_FLOOR)
    return (vecs * vals) @ vecs.T


def _moments(pixels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = pixels.mean(axis=0)
    diff = pixels - mean
    cov = diff.T @ diff / pixels.shape[0]
    return mean, _floor_covariance(cov)


def _refit_from_assignment(pixels: np.ndarray, labels: np.ndarray, gmm: Gmm) -> Gmm:
    """Hard-assignment ML refit; empty components get weight 0 and go stale."""
    k = gmm.component_count
    weights = np.zeros(k)
    means = gmm.means.copy()
    covs = gmm.covariances.copy()
    for j in range(k):
        members = pixels[labels == j]
        if members.shape[0] == 0:
            continue
        weights[j] = members.shape[0] / pixels.shape[0]
        means[j], covs[j] = _moments(members)
    return Gmm(weights=weights, means=means, covariances=covs)


def fit_gmm(pixels, k: int, seed) -> Gmm:
    """Fit a k-component GMM by EM with seeded k-means++ initialization.

    Runs at most 50 EM iterations with a relative log-likelihood tolerance of
    1e-5.  Covariance eigenvalues are floored at 1e-6 so flat color regions
    stay non-singular.
    """
    pixels = np.asarray(pixels, dtype=np.float64).reshape(-1, 3)
    if pixels.shape[0] == 0:
        raise InvalidArgumentError("cannot fit a GMM to an empty pixel list")
    if pixels.shape[0] < k:
        raise InvalidArgumentError(f"need at least k={k} pixels, got {pixels.shape[0]}")
    _, labels, _, _ = kmeans(pixels, k, seed, max_iter=20, tol=1e-4)
    weights = np.zeros(k)
    means = np.zeros((k, 3))
    covs = np.tile(np.eye(3) * COVARIANCE_EIGEN_FLOOR, (k, 1, 1))
    for j in range(k):
        members = pixels[labels == j]
        if members.shape[0]:
            weights[j] = members.shape[0] / pixels.shape[0]
            means[j], covs[j] = _moments(members)
    gmm = Gmm(weights=weights, means=means, covariances=covs)

    prev_ll = -np.inf
    for _ in range(50):
        comp_ll = gmm.component_log_likelihood(pixels)  # E step
        top = comp_ll.max(axis=1, keepdims=True)
        resp = np.exp(comp_ll - top)
        norm = resp.sum(axis=1, keepdims=True)
        resp /= norm
        ll = float(np.sum(top[:, 0] + np.log(norm[:, 0])))
        if np.isfinite(prev_ll) and abs(ll - prev_ll) <= 1e-5 * abs(prev_ll):
            break
        prev_ll = ll
        mass = resp.sum(axis=0)  # M step
        for j in range(k):
            if mass[j] <= 1e-12:
                weights[j] = 0.0
                continue
            weights[j] = mass[j] / pixels.shape[0]
            means[j] = resp[:, j] @ pixels / mass[j]
            diff = pixels - means[j]
            covs[j] = _floor_covariance((diff * resp[:, j : j + 1]).T @ diff / mass[j])
        gmm = Gmm(weights=weights, means=means, covariances=covs)
    return gmm


def _neighbor_system(img: np.ndarray, connectivity: int):
    """Neighbor pairs (flat indices) with inverse-distance factors and color diffs."""
    h, w = img.shape[:2]
    idx = np.arange(h * w).reshape(h, w)
    offsets = [((0, 1), 1.0), ((1, 0), 1.0)]
    if connectivity == 8:
        offsets += [((1, 1), 1.0 / np.sqrt(2.0)), ((1, -1), 1.0 / np.sqrt(2.0))]
    pairs_u, pairs_v, inv_dist, sq_diff = [], [], [], []
    for (dy, dx), factor in offsets:
        ys = slice(None, -dy if dy else None)
        xs = slice(None, -dx if dx > 0 else None) if dx >= 0 else slice(-dx, None)
        yt = slice(dy, None) if dy else slice(None)
        xt = slice(dx, None) if dx > 0 else (slice(None, dx) if dx < 0 else slice(None))
        a = idx[ys, xs].ravel()
        b = idx[yt, xt].ravel()
        d = np.sum((img[ys, xs] - img[yt, xt]) ** 2, axis=-1).ravel()
        pairs_u.append(a)
        pairs_v.append(b)
        inv_dist.append(np.full(a.shape, factor))
        sq_diff.append(d)
    return (
        np.concatenate(pairs_u),
        np.concatenate(pairs_v),
        np.concatenate(inv_dist),
        np.concatenate(sq_diff),
    )


def grabcut_refine(image, trimap, params: GrabcutParams = GrabcutParams(), seed=0, return_energy: bool = False):
    """Refine a trimap into a binary foreground mask with the GrabCut loop.

    ``trimap`` holds the TRIMAP_* labels per pixel; definite labels are hard
    constraints the cut can never flip.  Smoothness weights are
    gamma * exp(-beta * |z_m - z_n|^2) / dist with beta = 1 / (2 E|z_m - z_n|^2)
    estimated over the same neighbor system.  Returns the foreground mask, or
    (mask, energies) when ``return_energy`` is set.
    """
    img = as_image(image)
    if img.shape[2] != 3:
        raise InvalidDimensionError("grabcut_refine expects an RGB image")
    tri = np.asarray(trimap)
    if tri.shape != img.shape[:2]:
        raise InvalidDimensionError(f"trimap shape {tri.shape} does not match image {img.shape[:2]}")
    if not np.all(np.isin(tri, (TRIMAP_BG, TRIMAP_PROB_BG, TRIMAP_PROB_FG, TRIMAP_FG))):
        raise InvalidArgumentError("trimap contains values outside the TRIMAP_* labels")
    if not np.any(tri >= TRIMAP_PROB_FG):
        raise InvalidArgumentError("trimap marks no (probable-)foreground pixels")

    h, w = tri.shape
    pixels = img.reshape(-1, 3)
    tri_flat = tri.ravel()
    alpha = tri_flat >= TRIMAP_PROB_FG
    hard_fg = tri_flat == TRIMAP_FG
    hard_bg = tri_flat == TRIMAP_BG
    unknown = ~(hard_fg | hard_bg)

    def _result(mask_flat, energies):
        mask = mask_flat.reshape(h, w).astype(np.uint8)
        return (mask, energies) if return_energy else mask

    # Degenerate trimaps: nothing to relabel, or one class has no pixels.
    if not np.any(unknown) or not np.any(alpha) or np.all(alpha):
        return _result(alpha, [])

    uu, vv, inv_dist, sq_diff = _neighbor_system(img, params.connectivity)
    mean_sq = float(sq_diff.mean())
    beta = 0.0 if mean_sq <= 0.0 else 1.0 / (2.0 * mean_sq)
    n_weights = params.gamma * np.exp(-beta * sq_diff) * inv_dist
    smooth_edges = np.stack([uu.astype(np.float64), vv.astype(np.float64), n_weights], axis=1)

    seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    fg_seed, bg_seed = seq.spawn(2)

    def _init_fit(class_pixels, fit_seed):
        # The init only seeds the color models (the loop refits from labels);
        # a deterministic stride subsample keeps it cheap on large images.
        stride = max(1, class_pixels.shape[0] // 16384)
        sample = class_pixels[::stride]
        return fit_gmm(sample, min(params.component_count, sample.shape[0]), fit_seed)

    fg_gmm = _init_fit(pixels[alpha], fg_seed)
    bg_gmm = _init_fit(pixels[~alpha], bg_seed)

    energies = []
    for _ in range(params.iterations):
        # (a) component assignment and (b) per-class refit from current labels
        fg_px = pixels[alpha]
        bg_px = pixels[~alpha]
        fg_gmm = _refit_from_assignment(fg_px, fg_gmm.assign_components(fg_px), fg_gmm)
        bg_gmm = _refit_from_assignment(bg_px, bg_gmm.assign_components(bg_px), bg_gmm)

        # (c) graph cut; source side = foreground.  Dense color models can
        # push -log likelihood below zero; shifting both terminal links of a
        # pixel by a common offset keeps capacities non-negative without
        # changing the argmin cut.
        d_fg = fg_gmm.data_term(pixels)
        d_bg = bg_gmm.data_term(pixels)
        shift = np.minimum(0.0, np.minimum(d_fg, d_bg))
        source_cap = np.where(hard_fg, _HARD_LINK, np.where(hard_bg, 0.0, d_bg - shift))
        sink_cap = np.where(hard_bg, _HARD_LINK, np.where(hard_fg, 0.0, d_fg - shift))
        labels, _ = min_cut(h * w, np.stack([source_cap, sink_cap], axis=1), smooth_edges)
        alpha = np.where(unknown, labels, alpha).astype(bool)
        alpha[hard_fg] = True
        alpha[hard_bg] = False

        data_energy = float(np.sum(np.where(alpha, d_fg, d_bg)))
        smooth_energy = float(np.sum(n_weights[alpha[uu] != alpha[vv]]))
        energies.append(data_energy + smooth_energy)

    return _result(alpha, energies)


def trimap_from_mask(mask, seed_mask=None, background: str = "definite") -> np.ndarray:
    """Trimap for refining a binary mask's boundary.

    Seed pixels become definite foreground and the rest of the mask probable
    foreground.  With ``background="definite"`` (the default) everything
    outside the mask is pinned as background, so refinement only trims the
    proposal; pass ``"probable"`` to let the cut expand beyond it.
    """
    if background not in ("definite", "probable"):
        raise InvalidArgumentError("background must be 'definite' or 'probable'")
    mask = np.asarray(mask).astype(bool)
    outside = TRIMAP_BG if background == "definite" else TRIMAP_PROB_BG
    tri = np.full(mask.shape, outside, dtype=np.uint8)
    tri[mask] = TRIMAP_PROB_FG
    if seed_mask is not None:
        tri[np.asarray(seed_mask).astype(bool)] = TRIMAP_FG
    return tri
