"""Reparameterized sampling and the KL divergence to the unit Gaussian."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..engine import Tensor, add, constant, exp, mul, scale, sub, sum_


@dataclass
class LatentSample:
    """Posterior statistics, the sampled molecular latent and the fusion."""

    z_tree_mean: Tensor
    z_tree_logvar: Tensor
    z_graph_mean: Tensor
    z_graph_logvar: Tensor
    z_mol: Tensor
    z_seq: Tensor
    z_fused: Tensor
    kl: Tensor


def reparameterize_and_kl(
    mean: Tensor, logvar: Tensor, rng: np.random.Generator
) -> tuple[Tensor, Tensor]:
    """z = mu + exp(logvar/2) * eps with eps ~ N(0, 1); kl is the closed form
    0.5 * sum(mu^2 + e^logvar - 1 - logvar)."""
    if mean.values.shape != logvar.values.shape:
        raise ValueError(f"shape mismatch {mean.values.shape} vs {logvar.values.shape}")
    if not (np.all(np.isfinite(mean.values)) and np.all(np.isfinite(logvar.values))):
        raise ValueError("non-finite latent statistics")
    eps = constant(rng.standard_normal(mean.values.shape))
    z = add(mean, mul(exp(scale(logvar, 0.5)), eps))
    ones = constant(np.ones_like(mean.values))
    inner = sub(sub(add(mul(mean, mean), exp(logvar)), ones), logvar)
    kl = scale(sum_(inner), 0.5)
    return z, kl
