"""Two-stream molecular encoder.

The graph stream runs edge-message passing over directed bonds whose inputs
concatenate source-atom features with bond features (order one-hot, ring
flag, torsion trig pair + flag). The tree stream passes clique-label
embeddings along junction-tree edges. Each stream mean-pools into its own
mean/log-variance heads.
"""

from __future__ import annotations

import numpy as np

from ..chem.mol import Molecule
from ..engine import Tensor, add, concat, constant, gather_rows, matmul, relu
from ..jtree import JunctionTree, Vocabulary
from .config import ModelConfig
from .features import GraphWiring, TreeWiring
from .params import ATOM_FDIM


def tree_wiring(tree: JunctionTree, vocab: Vocabulary) -> TreeWiring:
    indices = [vocab.index(node.label) for node in tree.nodes]
    return TreeWiring(len(tree.nodes), tree.edges, indices)


def encode_graph_stream(wiring: GraphWiring, params, cfg: ModelConfig, prefix: str = "enc_g.") -> Tensor:
    """Pooled graph-stream state, shape (1, hidden).

    The assembly scorer reuses this architecture under its own weights via
    the ``asm.`` prefix.
    """
    edge_in = constant(wiring.edge_in)
    adj = constant(wiring.msg_adj)
    base = add(matmul(edge_in, params[prefix + "W_in"]), params[prefix + "b_in"])
    msg = relu(base)
    for _ in range(cfg.mp_iters):
        routed = matmul(matmul(adj, msg), params[prefix + "W_msg"])
        msg = relu(add(base, routed))
    inbox = matmul(constant(wiring.atom_in), msg)
    atom_state = relu(
        add(
            matmul(concat([constant(wiring.atom_feats), inbox], axis=1), params[prefix + "W_atom"]),
            params[prefix + "b_atom"],
        )
    )
    return matmul(constant(wiring.pool), atom_state)


def encode_tree_stream(wiring: TreeWiring, params, cfg: ModelConfig) -> Tensor:
    """Pooled tree-stream state, shape (1, hidden)."""
    emb = gather_rows(params["enc_t.embed"], wiring.label_indices)
    n_dir = wiring.msg_adj.shape[0]
    if n_dir:
        edge_emb = gather_rows(emb, wiring.src)
        base = add(matmul(edge_emb, params["enc_t.W_in"]), params["enc_t.b_in"])
        msg = relu(base)
        for _ in range(cfg.tree_iters):
            routed = matmul(matmul(constant(wiring.msg_adj), msg), params["enc_t.W_msg"])
            msg = relu(add(base, routed))
        inbox = matmul(constant(wiring.node_in), msg)
    else:
        inbox = constant(np.zeros((wiring.n_nodes, cfg.hidden)))
    node_state = relu(
        add(matmul(concat([emb, inbox], axis=1), params["enc_t.W_node"]), params["enc_t.b_node"])
    )
    return matmul(constant(wiring.pool), node_state)


def encode_molecule(
    mol: Molecule,
    tree: JunctionTree,
    torsions: np.ndarray | None,
    vocab: Vocabulary,
    params: dict[str, Tensor],
    cfg: ModelConfig,
) -> tuple[Tensor, Tensor, Tensor, Tensor]:
    """(z_tree_mean, z_tree_logvar, z_graph_mean, z_graph_logvar), each (1, dim)."""
    if torsions is not None and len(torsions) != len(mol.bonds):
        raise ValueError(
            f"torsion feature count {len(torsions)} != bond count {len(mol.bonds)}"
        )
    graph_state = encode_graph_stream(GraphWiring(mol, torsions), params, cfg)
    tree_state = encode_tree_stream(tree_wiring(tree, vocab), params, cfg)
    t_mean = add(matmul(tree_state, params["T_mean.W"]), params["T_mean.b"])
    t_logvar = add(matmul(tree_state, params["T_var.W"]), params["T_var.b"])
    g_mean = add(matmul(graph_state, params["G_mean.W"]), params["G_mean.b"])
    g_logvar = add(matmul(graph_state, params["G_var.W"]), params["G_var.b"])
    return t_mean, t_logvar, g_mean, g_logvar
