"""Ligase binding-site sequence encoders.

Three interchangeable modes produce a fixed-width embedding: trigram counts
with a two-layer projection, a bidirectional recurrent pass over one-hot
residues, or imported precomputed vectors projected to the shared width.
"""

from __future__ import annotations

import numpy as np

from ..engine import Tensor, add, concat, constant, matmul, relu, scale, tanh
from .config import AMINO_ACIDS, KMER_K, LigaseContext, ModelConfig

_AA_INDEX = {aa: i for i, aa in enumerate(AMINO_ACIDS)}


def kmer_counts(sequence: str) -> np.ndarray:
    """L2-normalized counts of all 3-mers over the amino-acid alphabet."""
    n_aa = len(AMINO_ACIDS)
    counts = np.zeros(n_aa**KMER_K)
    for start in range(len(sequence) - KMER_K + 1):
        idx = 0
        for ch in sequence[start : start + KMER_K]:
            idx = idx * n_aa + _AA_INDEX[ch]
        counts[idx] += 1.0
    norm = np.linalg.norm(counts)
    if norm > 0:
        counts /= norm
    return counts


def one_hot_residues(sequence: str) -> np.ndarray:
    out = np.zeros((len(sequence), len(AMINO_ACIDS)))
    for i, ch in enumerate(sequence):
        out[i, _AA_INDEX[ch]] = 1.0
    return out


def encode_ligase(
    ctx: LigaseContext, params: dict[str, Tensor], cfg: ModelConfig
) -> tuple[Tensor, Tensor]:
    """Returns (z_seq, states): the embedding (1, seq_embed) and the
    per-residue states used as attention keys (length 1 outside rnn mode)."""
    mode = cfg.seq_encoder_mode
    if mode == "external":
        if ctx.embedding is None:
            raise ValueError(f"ligase {ctx.ligase_id} has no imported embedding")
        if ctx.embedding.shape != (cfg.external_dim,):
            raise ValueError(
                f"external embedding for {ctx.ligase_id} has dim "
                f"{ctx.embedding.shape}, expected ({cfg.external_dim},)"
            )
        vec = constant(ctx.embedding[None, :])
        z_seq = add(matmul(vec, params["seq.W_O"]), params["seq.b_O"])
        return z_seq, z_seq

    if not ctx.sequence:
        raise ValueError(f"ligase {ctx.ligase_id} has an empty sequence")

    if mode == "kmer":
        counts = constant(kmer_counts(ctx.sequence)[None, :])
        hidden = relu(add(matmul(counts, params["seq.W_H1"]), params["seq.b_H1"]))
        z_seq = add(matmul(hidden, params["seq.W_O"]), params["seq.b_O"])
        return z_seq, z_seq

    # onehot_rnn: forward pass under W_H1, backward pass under W_H2
    onehot = one_hot_residues(ctx.sequence)
    length = onehot.shape[0]
    fwd = _recurrent_pass(onehot, range(length), params["seq.W_H1"], params["seq.b_H1"], cfg)
    bwd = _recurrent_pass(onehot, reversed(range(length)), params["seq.W_H2"], params["seq.b_H2"], cfg)
    bwd = bwd[::-1]
    states = concat(
        [concat([f, b], axis=1) for f, b in zip(fwd, bwd)]
        if length > 1
        else [concat([fwd[0], bwd[0]], axis=1)],
        axis=0,
    )
    pooled = scale(matmul(constant(np.full((1, length), 1.0)), states), 1.0 / length)
    z_seq = add(matmul(pooled, params["seq.W_O"]), params["seq.b_O"])
    return z_seq, states


def _recurrent_pass(onehot, order, weight, bias, cfg: ModelConfig):
    h = constant(np.zeros((1, cfg.hidden)))
    out = []
    for t in order:
        x = constant(onehot[t][None, :])
        h = tanh(add(matmul(concat([x, h], axis=1), weight), bias))
        out.append(h)
    return out
