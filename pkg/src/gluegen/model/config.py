"""Model hyperparameters and the ligase conditioning context."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

AMINO_ACIDS = "ACDEFGHIKLMNPQRSTVWY"
KMER_K = 3


@dataclass
class ModelConfig:
    hidden: int = 64
    z_tree: int = 16
    z_graph: int = 16
    seq_embed: int = 128
    fused: int = 32
    mp_iters: int = 3
    tree_iters: int = 4
    max_decode_nodes: int = 30
    fusion_mode: str = "concat"  # concat | cross_attention
    seq_encoder_mode: str = "kmer"  # kmer | onehot_rnn | external
    attn_heads: int = 1
    attn_dim: int = 16  # per-head width for cross attention
    external_dim: int = 0  # width of imported embeddings (external mode)
    assembly_cap: int = 100

    def __post_init__(self):
        for name in ("hidden", "z_tree", "z_graph", "seq_embed", "fused",
                     "mp_iters", "tree_iters", "max_decode_nodes"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.fused > self.z_tree + self.z_graph + self.seq_embed:
            raise ValueError("fused dim exceeds z_tree + z_graph + seq_embed")
        if self.fusion_mode not in ("concat", "cross_attention"):
            raise ValueError(f"unknown fusion_mode {self.fusion_mode!r}")
        if self.seq_encoder_mode not in ("kmer", "onehot_rnn", "external"):
            raise ValueError(f"unknown seq_encoder_mode {self.seq_encoder_mode!r}")
        if self.seq_encoder_mode == "external" and self.external_dim < 1:
            raise ValueError("external mode needs external_dim >= 1")
        if self.attn_heads < 1:
            raise ValueError("attn_heads must be >= 1")

    @property
    def z_mol(self) -> int:
        return self.z_tree + self.z_graph

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class LigaseContext:
    ligase_id: str
    sequence: str = ""
    embedding: np.ndarray | None = None

    def __post_init__(self):
        for ch in self.sequence:
            if ch not in AMINO_ACIDS:
                raise ValueError(f"unknown residue {ch!r} in sequence for {self.ligase_id}")
        if self.embedding is not None:
            self.embedding = np.asarray(self.embedding, dtype=np.float64)
            if not np.all(np.isfinite(self.embedding)):
                raise ValueError(f"non-finite embedding for {self.ligase_id}")
