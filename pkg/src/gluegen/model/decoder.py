"""Conditional tree decoder.

Teacher forcing walks the junction tree depth-first from the root with a
GRU cell whose initial hidden state is a projection of the fused latent;
the latent is also concatenated onto every step input. Each step emits an
expand-vs-backtrack logit and, on expansion, label logits over the clique
vocabulary. Assembly scoring ranks attachment candidates per tree edge
against the latent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..chem.mol import Molecule
from ..engine import (
    Tensor,
    add,
    binary_cross_entropy,
    concat,
    constant,
    gather_rows,
    matmul,
    mul,
    relu,
    sigmoid,
    softmax_cross_entropy,
    sub,
    tanh,
    transpose,
)
from ..jtree import JunctionTree, Vocabulary
from .assembly import candidate_wiring, enumerate_merges, ground_truth_fragment, merge_signature
from .config import ModelConfig
from .encoder import encode_graph_stream


@dataclass
class AssemblyCache:
    """Constant per-label-pair candidate sets and their wirings."""

    candidates: dict[tuple[str, str], tuple[list, bool]] = field(default_factory=dict)
    wirings: dict[tuple[str, str], list] = field(default_factory=dict)

    def get(self, parent_label: str, child_label: str, vocab: Vocabulary, cap: int):
        key = (parent_label, child_label)
        if key not in self.candidates:
            cands, overflow = enumerate_merges(
                vocab.templates[parent_label], vocab.templates[child_label], cap
            )
            self.candidates[key] = (cands, overflow)
            self.wirings[key] = [candidate_wiring(c) for c in cands]
        return self.candidates[key][0], self.candidates[key][1], self.wirings[key]


@dataclass
class DecodeLosses:
    topology: Tensor
    label: Tensor
    assembly: Tensor
    n_topo: int
    n_topo_correct: int
    n_label: int
    n_label_correct: int
    n_assembly: int
    n_assembly_correct: int
    assembly_misses: int  # ground truth beyond cap or not enumerable

    @property
    def wacc(self) -> float:
        return self.n_label_correct / self.n_label if self.n_label else 0.0

    @property
    def tacc(self) -> float:
        return self.n_topo_correct / self.n_topo if self.n_topo else 0.0

    @property
    def sacc(self) -> float:
        return self.n_assembly_correct / self.n_assembly if self.n_assembly else 0.0


def gru_step(h: Tensor, x: Tensor, params) -> Tensor:
    r = sigmoid(add(add(matmul(x, params["dec.W_r"]), matmul(h, params["dec.U_r"])), params["dec.b_r"]))
    u = sigmoid(add(add(matmul(x, params["dec.W_u"]), matmul(h, params["dec.U_u"])), params["dec.b_u"]))
    c = tanh(add(add(matmul(x, params["dec.W_c"]), matmul(mul(r, h), params["dec.U_c"])), params["dec.b_c"]))
    ones = constant(np.ones_like(h.values))
    return add(mul(sub(ones, u), h), mul(u, c))


def decoder_initial_hidden(z_fused: Tensor, params) -> Tensor:
    return relu(add(matmul(z_fused, params["dec.W_h0"]), params["dec.b_h0"]))


def topology_logit(h: Tensor, z_fused: Tensor, params) -> Tensor:
    return add(matmul(concat([h, z_fused], axis=1), params["dec.W_topo"]), params["dec.b_topo"])


def label_logits(h: Tensor, z_fused: Tensor, params) -> Tensor:
    return add(matmul(concat([h, z_fused], axis=1), params["dec.W_label"]), params["dec.b_label"])


def label_embedding(label_index: int, params) -> Tensor:
    return gather_rows(params["enc_t.embed"], [label_index])


def dfs_children(tree: JunctionTree, root: int) -> dict[int, list[int]]:
    """Adjacency as parent -> children, children ordered by smallest atom index."""
    neigh: dict[int, list[int]] = {i: [] for i in range(len(tree.nodes))}
    for u, v in tree.edges:
        neigh[u].append(v)
        neigh[v].append(u)
    children: dict[int, list[int]] = {}
    seen = {root}
    stack = [root]
    while stack:
        u = stack.pop()
        kids = sorted(
            (v for v in neigh[u] if v not in seen),
            key=lambda v: min(tree.nodes[v].atom_indices),
        )
        children[u] = kids
        for v in kids:
            seen.add(v)
            stack.append(v)
    return children


def score_candidates(wirings, z_fused: Tensor, params, cfg: ModelConfig) -> Tensor:
    """(1, K) scores of candidate subgraph embeddings against the latent."""
    pooled = [encode_graph_stream(w, params, cfg, prefix="asm.") for w in wirings]
    stack = pooled[0] if len(pooled) == 1 else concat(pooled, axis=0)  # (K, hidden)
    probe = add(matmul(z_fused, params["asm.W_z"]), params["asm.b_z"])  # (1, hidden)
    return transpose(matmul(stack, transpose(probe)))


def decode_teacher_forced(
    z_fused: Tensor,
    mol: Molecule,
    tree: JunctionTree,
    vocab: Vocabulary,
    params,
    cfg: ModelConfig,
    cache: AssemblyCache | None = None,
    truth: list[tuple[int, int, int | None]] | None = None,
) -> DecodeLosses:
    """truth, when given, carries precomputed (parent, child, true candidate
    index) triples so repeated epochs skip the ground-truth isomorphism
    search."""
    cache = cache or AssemblyCache()
    children = dfs_children(tree, tree.root)

    topo_logits: list[Tensor] = []
    topo_targets: list[float] = []
    label_terms: list[Tensor] = []
    n_label_correct = 0

    h = decoder_initial_hidden(z_fused, params)

    def predict_label(node_idx: int) -> None:
        nonlocal n_label_correct
        logits = label_logits(h, z_fused, params)
        target = vocab.index(tree.nodes[node_idx].label)
        label_terms.append(softmax_cross_entropy(logits, [target]))
        if int(np.argmax(logits.values)) == target:
            n_label_correct += 1

    predict_label(tree.root)
    h = gru_step(h, concat([label_embedding(vocab.index(tree.nodes[tree.root].label), params), z_fused], axis=1), params)

    # explicit DFS with expand/backtrack decisions
    stack: list[tuple[int, int]] = [(tree.root, 0)]
    while stack:
        u, child_pos = stack[-1]
        kids = children[u]
        logit = topology_logit(h, z_fused, params)
        if child_pos < len(kids):
            v = kids[child_pos]
            topo_logits.append(logit)
            topo_targets.append(1.0)
            predict_label(v)
            h = gru_step(h, concat([label_embedding(vocab.index(tree.nodes[v].label), params), z_fused], axis=1), params)
            stack[-1] = (u, child_pos + 1)
            stack.append((v, 0))
        else:
            topo_logits.append(logit)
            topo_targets.append(0.0)
            h = gru_step(h, concat([label_embedding(vocab.index(tree.nodes[u].label), params), z_fused], axis=1), params)
            stack.pop()

    stacked = topo_logits[0] if len(topo_logits) == 1 else concat(topo_logits, axis=0)
    targets = np.asarray(topo_targets)[:, None]
    topo_loss = binary_cross_entropy(stacked, targets)
    n_topo_correct = int(((stacked.values > 0).astype(float) == targets).sum())

    label_loss = label_terms[0]
    for term in label_terms[1:]:
        label_loss = add(label_loss, term)

    if truth is None:
        truth = []
        for u in _preorder(tree.root, children):
            for v in children[u]:
                cands, _, _ = cache.get(
                    tree.nodes[u].label, tree.nodes[v].label, vocab, cfg.assembly_cap
                )
                frag, roles = ground_truth_fragment(
                    mol, tree.nodes[u].atom_indices, tree.nodes[v].atom_indices
                )
                sig = merge_signature(frag, roles)
                truth.append(
                    (u, v, next((k for k, c in enumerate(cands) if c.signature == sig), None))
                )

    asm_terms: list[Tensor] = []
    n_asm = n_asm_correct = misses = 0
    for u, v, true_idx in truth:
            parent_label = tree.nodes[u].label
            child_label = tree.nodes[v].label
            cands, overflow, wirings = cache.get(parent_label, child_label, vocab, cfg.assembly_cap)
            if true_idx is None:
                misses += 1
                continue
            if len(cands) == 1:
                n_asm += 1
                n_asm_correct += 1
                continue  # nothing to rank
            scores = score_candidates(wirings, z_fused, params, cfg)
            asm_terms.append(softmax_cross_entropy(scores, [true_idx]))
            n_asm += 1
            if int(np.argmax(scores.values)) == true_idx:
                n_asm_correct += 1

    if asm_terms:
        asm_loss = asm_terms[0]
        for term in asm_terms[1:]:
            asm_loss = add(asm_loss, term)
    else:
        asm_loss = constant(np.asarray(0.0))

    return DecodeLosses(
        topology=topo_loss,
        label=label_loss,
        assembly=asm_loss,
        n_topo=len(topo_targets),
        n_topo_correct=n_topo_correct,
        n_label=len(label_terms),
        n_label_correct=n_label_correct,
        n_assembly=n_asm,
        n_assembly_correct=n_asm_correct,
        assembly_misses=misses,
    )


def _preorder(root: int, children: dict[int, list[int]]) -> list[int]:
    order = []
    stack = [root]
    while stack:
        u = stack.pop()
        order.append(u)
        for v in reversed(children[u]):
            stack.append(v)
    return order
