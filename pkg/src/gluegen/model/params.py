"""Parameter construction. Every tensor shape is a pure function of the
ModelConfig and the vocabulary size."""

from __future__ import annotations

import numpy as np

from ..engine import Tensor, xavier_normal_init, zeros_init
from .config import AMINO_ACIDS, KMER_K, ModelConfig
from .features import ATOM_FDIM, BOND_FDIM, ROLE_FDIM


def param_shapes(cfg: ModelConfig, vocab_size: int) -> dict[str, tuple[int, ...]]:
    h = cfg.hidden
    edge_in = ATOM_FDIM + BOND_FDIM
    gru_in = h + cfg.fused
    shapes: dict[str, tuple[int, ...]] = {
        # graph-stream encoder (MPN over directed bonds)
        "enc_g.W_in": (edge_in, h),
        "enc_g.b_in": (1, h),
        "enc_g.W_msg": (h, h),
        "enc_g.W_atom": (ATOM_FDIM + h, h),
        "enc_g.b_atom": (1, h),
        # tree-stream encoder (label embeddings + tree message passing)
        "enc_t.embed": (vocab_size, h),
        "enc_t.W_in": (h, h),
        "enc_t.b_in": (1, h),
        "enc_t.W_msg": (h, h),
        "enc_t.W_node": (2 * h, h),
        "enc_t.b_node": (1, h),
        # latent heads
        "T_mean.W": (h, cfg.z_tree),
        "T_mean.b": (1, cfg.z_tree),
        "T_var.W": (h, cfg.z_tree),
        "T_var.b": (1, cfg.z_tree),
        "G_mean.W": (h, cfg.z_graph),
        "G_mean.b": (1, cfg.z_graph),
        "G_var.W": (h, cfg.z_graph),
        "G_var.b": (1, cfg.z_graph),
        # tree decoder
        "dec.W_h0": (cfg.fused, h),
        "dec.b_h0": (1, h),
        "dec.W_r": (gru_in, h),
        "dec.U_r": (h, h),
        "dec.b_r": (1, h),
        "dec.W_u": (gru_in, h),
        "dec.U_u": (h, h),
        "dec.b_u": (1, h),
        "dec.W_c": (gru_in, h),
        "dec.U_c": (h, h),
        "dec.b_c": (1, h),
        "dec.W_topo": (h + cfg.fused, 1),
        "dec.b_topo": (1, 1),
        "dec.W_label": (h + cfg.fused, vocab_size),
        "dec.b_label": (1, vocab_size),
        # assembly scorer (small MPN over role-annotated candidate graphs)
        "asm.W_in": (ATOM_FDIM + ROLE_FDIM + BOND_FDIM, h),
        "asm.b_in": (1, h),
        "asm.W_msg": (h, h),
        "asm.W_atom": (ATOM_FDIM + ROLE_FDIM + h, h),
        "asm.b_atom": (1, h),
        "asm.W_z": (cfg.fused, h),
        "asm.b_z": (1, h),
    }

    n_aa = len(AMINO_ACIDS)
    if cfg.seq_encoder_mode == "kmer":
        shapes["seq.W_H1"] = (n_aa**KMER_K, cfg.hidden)
        shapes["seq.b_H1"] = (1, cfg.hidden)
        shapes["seq.W_O"] = (cfg.hidden, cfg.seq_embed)
        shapes["seq.b_O"] = (1, cfg.seq_embed)
    elif cfg.seq_encoder_mode == "onehot_rnn":
        shapes["seq.W_H1"] = (n_aa + cfg.hidden, cfg.hidden)
        shapes["seq.b_H1"] = (1, cfg.hidden)
        shapes["seq.W_H2"] = (n_aa + cfg.hidden, cfg.hidden)
        shapes["seq.b_H2"] = (1, cfg.hidden)
        shapes["seq.W_O"] = (2 * cfg.hidden, cfg.seq_embed)
        shapes["seq.b_O"] = (1, cfg.seq_embed)
    else:  # external
        shapes["seq.W_O"] = (cfg.external_dim, cfg.seq_embed)
        shapes["seq.b_O"] = (1, cfg.seq_embed)

    if cfg.fusion_mode == "concat":
        shapes["fuse.W"] = (cfg.z_mol + cfg.seq_embed, cfg.fused)
        shapes["fuse.b"] = (1, cfg.fused)
    else:
        state_dim = _attention_state_dim(cfg)
        width = cfg.attn_heads * cfg.attn_dim
        shapes["fuse.W_q"] = (cfg.z_mol, width)
        shapes["fuse.W_k"] = (state_dim, width)
        shapes["fuse.W_v"] = (state_dim, width)
        shapes["fuse.W"] = (cfg.z_mol + width, cfg.fused)
        shapes["fuse.b"] = (1, cfg.fused)
    return shapes


def _attention_state_dim(cfg: ModelConfig) -> int:
    if cfg.seq_encoder_mode == "onehot_rnn":
        return 2 * cfg.hidden
    return cfg.seq_embed


def init_params(cfg: ModelConfig, vocab_size: int, rng: np.random.Generator) -> dict[str, Tensor]:
    """Xavier-normal weights, zero biases, in deterministic name order."""
    params = {}
    for name, shape in sorted(param_shapes(cfg, vocab_size).items()):
        if name.split(".")[-1].startswith("b"):
            params[name] = zeros_init(shape)
        else:
            params[name] = xavier_normal_init(shape, rng)
    return params


def grads_of(params: dict[str, Tensor]) -> dict[str, np.ndarray]:
    return {name: p.grad for name, p in params.items()}


def zero_grads(params: dict[str, Tensor]) -> None:
    for p in params.values():
        p.zero_grad()
