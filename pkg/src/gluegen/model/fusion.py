"""Latent fusion of the molecular latent with the ligase embedding."""

from __future__ import annotations

import math

from ..engine import (
    Tensor,
    add,
    concat,
    matmul,
    relu,
    scale,
    slice_,
    softmax,
    transpose,
)
from .config import ModelConfig


def fusion_preactivation(z_mol: Tensor, z_seq: Tensor, params) -> Tensor:
    """W [z_mol ; z_seq] + b, before the ReLU (concat mode)."""
    joint = concat([z_mol, z_seq], axis=1)
    return add(matmul(joint, params["fuse.W"]), params["fuse.b"])


def fuse_latent(
    z_mol: Tensor,
    z_seq: Tensor,
    states: Tensor,
    params,
    cfg: ModelConfig,
    return_attention: bool = False,
):
    """Fused conditioning vector (1, fused).

    concat mode: ReLU(W [z_mol ; z_seq] + b). cross_attention mode: z_mol is
    the single query over per-residue states; the attended value vector is
    concatenated back onto z_mol and projected.
    """
    if cfg.fusion_mode == "concat":
        fused = relu(fusion_preactivation(z_mol, z_seq, params))
        return (fused, None) if return_attention else fused

    q = matmul(z_mol, params["fuse.W_q"])  # (1, heads*d)
    k = matmul(states, params["fuse.W_k"])  # (L, heads*d)
    v = matmul(states, params["fuse.W_v"])
    head_outs = []
    attn = []
    for h in range(cfg.attn_heads):
        lo, hi = h * cfg.attn_dim, (h + 1) * cfg.attn_dim
        qh = slice_(q, lo, hi, axis=1)
        kh = slice_(k, lo, hi, axis=1)
        vh = slice_(v, lo, hi, axis=1)
        scores = scale(matmul(qh, transpose(kh)), 1.0 / math.sqrt(cfg.attn_dim))
        weights = softmax(scores)  # (1, L)
        attn.append(weights)
        head_outs.append(matmul(weights, vh))
    attended = head_outs[0] if len(head_outs) == 1 else concat(head_outs, axis=1)
    fused = relu(add(matmul(concat([z_mol, attended], axis=1), params["fuse.W"]), params["fuse.b"]))
    return (fused, attn) if return_attention else fused
