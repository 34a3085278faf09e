"""2D chemical-space projection: exact PCA and exact t-SNE.

The t-SNE is the full O(n^2) formulation: per-point precision calibrated by
binary search to the target perplexity, early exaggeration, then plain
momentum gradient descent on the KL between the joint distributions.
Single-threaded and deterministic for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class ProjectionConfig:
    method: str = "tsne"  # pca | tsne
    perplexity: float = 15.0
    iterations: int = 500
    seed: int = 0

    def __post_init__(self):
        if self.method not in ("pca", "tsne"):
            raise ValueError(f"unknown projection method {self.method!r}")


def project_2d(points: np.ndarray, cfg: ProjectionConfig) -> np.ndarray:
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] < 3:
        raise ValueError("need at least 3 points to project")
    if cfg.method == "pca":
        return pca_2d(points)
    if cfg.perplexity >= (points.shape[0] - 1) / 3:
        raise ValueError(
            f"perplexity {cfg.perplexity} too large for {points.shape[0]} points "
            f"(needs perplexity < (n-1)/3)"
        )
    return tsne_2d(points, cfg.perplexity, cfg.iterations, cfg.seed)


def pca_2d(points: np.ndarray) -> np.ndarray:
    centered = points - points.mean(axis=0)
    u, s, vt = np.linalg.svd(centered, full_matrices=False)
    # sign convention: largest-magnitude loading of each component positive
    for k in range(min(2, vt.shape[0])):
        pivot = np.argmax(np.abs(vt[k]))
        if vt[k, pivot] < 0:
            vt[k] = -vt[k]
            u[:, k] = -u[:, k]
    coords = u[:, :2] * s[:2]
    if coords.shape[1] < 2:
        coords = np.hstack([coords, np.zeros((coords.shape[0], 2 - coords.shape[1]))])
    return coords


def _pairwise_sq_dists(x: np.ndarray) -> np.ndarray:
    sq = np.sum(x * x, axis=1)
    d = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.fill_diagonal(d, 0.0)
    return np.maximum(d, 0.0)


def _calibrate_p(dists: np.ndarray, perplexity: float, tol: float = 1e-5, max_iter: int = 64) -> np.ndarray:
    n = dists.shape[0]
    target = np.log(perplexity)
    p = np.zeros((n, n))
    for i in range(n):
        beta, beta_min, beta_max = 1.0, 0.0, np.inf
        row = np.delete(dists[i], i)
        for _ in range(max_iter):
            w = np.exp(-row * beta)
            sw = w.sum()
            if sw <= 0:
                entropy = 0.0
                probs = np.zeros_like(row)
            else:
                probs = w / sw
                entropy = np.log(sw) + beta * float((row * probs).sum())
            diff = entropy - target
            if abs(diff) < tol:
                break
            if diff > 0:
                beta_min = beta
                beta = beta * 2.0 if beta_max == np.inf else (beta + beta_max) / 2.0
            else:
                beta_max = beta
                beta = (beta + beta_min) / 2.0
        p[i, np.arange(n) != i] = probs
    return p


def tsne_2d(points: np.ndarray, perplexity: float, iterations: int, seed: int) -> np.ndarray:
    n = points.shape[0]
    dists = _pairwise_sq_dists(points)
    p_cond = _calibrate_p(dists, perplexity)
    p = (p_cond + p_cond.T) / (2.0 * n)
    p = np.maximum(p, 1e-12)

    rng = np.random.default_rng(seed)
    y = rng.normal(0.0, 1e-4, size=(n, 2))
    update = np.zeros_like(y)
    exaggeration_until = min(100, iterations // 2)
    lr = 200.0
    for it in range(iterations):
        pm = p * 4.0 if it < exaggeration_until else p
        num = 1.0 / (1.0 + _pairwise_sq_dists(y))
        np.fill_diagonal(num, 0.0)
        q = np.maximum(num / num.sum(), 1e-12)
        pq = (pm - q) * num
        grad = 4.0 * ((np.diag(pq.sum(axis=1)) - pq) @ y)
        momentum = 0.5 if it < 250 else 0.8
        update = momentum * update - lr * grad
        y = y + update
        y = y - y.mean(axis=0)
    return y
