"""Feature construction for message passing.

Everything here produces plain numpy constants; gradients only flow through
model parameters.
"""

from __future__ import annotations

import numpy as np

from ..chem.mol import AROMATIC, DOUBLE, Molecule, SINGLE, SUPPORTED_ELEMENTS, TRIPLE

N_ELEMENTS = len(SUPPORTED_ELEMENTS)
ATOM_FDIM = N_ELEMENTS + 3 + 1 + 1  # element one-hot, charge one-hot, aromatic, implicit H
BOND_FDIM = 4 + 1 + 3  # order one-hot, in-ring, (sin, cos, has_torsion)
ROLE_FDIM = 3  # parent-only, shared, child-only (assembly scoring)

_ORDER_SLOT = {SINGLE: 0, DOUBLE: 1, TRIPLE: 2, AROMATIC: 3}


def atom_features(mol: Molecule) -> np.ndarray:
    out = np.zeros((len(mol.atoms), ATOM_FDIM))
    for a in mol.atoms:
        out[a.index, SUPPORTED_ELEMENTS.index(a.element)] = 1.0
        charge = max(-1, min(1, a.formal_charge))
        out[a.index, N_ELEMENTS + charge + 1] = 1.0
        out[a.index, N_ELEMENTS + 3] = 1.0 if a.aromatic else 0.0
        out[a.index, N_ELEMENTS + 4] = a.implicit_h / 4.0
    return out


def bond_features(mol: Molecule, torsions: np.ndarray | None = None) -> np.ndarray:
    """Per-bond features aligned with mol.bonds; torsions is (n_bonds, 3)."""
    out = np.zeros((len(mol.bonds), BOND_FDIM))
    for i, b in enumerate(mol.bonds):
        out[i, _ORDER_SLOT[b.order]] = 1.0
        out[i, 4] = 1.0 if b.in_ring else 0.0
        if torsions is not None:
            out[i, 5:8] = torsions[i]
    return out


class GraphWiring:
    """Directed-edge wiring for one molecular graph.

    Edge 2i runs a->b of bond i, edge 2i+1 runs b->a. ``msg_adj[e, e']`` is 1
    when e' feeds e (it ends at e's source and is not e's reverse), and
    ``atom_in[u, e']`` is 1 when e' ends at atom u.
    """

    def __init__(
        self,
        mol: Molecule,
        torsions: np.ndarray | None = None,
        extra_atom_feats: np.ndarray | None = None,
    ):
        n_atoms = len(mol.atoms)
        n_edges = 2 * len(mol.bonds)
        src = np.zeros(n_edges, dtype=np.intp)
        dst = np.zeros(n_edges, dtype=np.intp)
        for i, b in enumerate(mol.bonds):
            src[2 * i], dst[2 * i] = b.a, b.b
            src[2 * i + 1], dst[2 * i + 1] = b.b, b.a

        af = atom_features(mol)
        if extra_atom_feats is not None:
            af = np.hstack([af, extra_atom_feats])
        bf = bond_features(mol, torsions)
        afdim = af.shape[1]
        edge_in = np.zeros((n_edges, afdim + BOND_FDIM))
        for e in range(n_edges):
            edge_in[e, :afdim] = af[src[e]]
            edge_in[e, afdim:] = bf[e // 2]

        msg_adj = np.zeros((n_edges, n_edges))
        for e in range(n_edges):
            for e2 in range(n_edges):
                if dst[e2] == src[e] and src[e2] != dst[e]:
                    msg_adj[e, e2] = 1.0
        atom_in = np.zeros((n_atoms, n_edges))
        for e in range(n_edges):
            atom_in[dst[e], e] = 1.0

        self.n_atoms = n_atoms
        self.atom_feats = af
        self.edge_in = edge_in
        self.msg_adj = msg_adj
        self.atom_in = atom_in
        self.pool = np.full((1, n_atoms), 1.0 / n_atoms)


class TreeWiring:
    """Directed-edge wiring over junction-tree edges, indexed by node labels."""

    def __init__(self, n_nodes: int, edges: list[tuple[int, int]], label_indices: list[int]):
        n_dir = 2 * len(edges)
        src = np.zeros(n_dir, dtype=np.intp)
        dst = np.zeros(n_dir, dtype=np.intp)
        for i, (u, v) in enumerate(edges):
            src[2 * i], dst[2 * i] = u, v
            src[2 * i + 1], dst[2 * i + 1] = v, u
        msg_adj = np.zeros((n_dir, n_dir))
        for e in range(n_dir):
            for e2 in range(n_dir):
                if dst[e2] == src[e] and src[e2] != dst[e]:
                    msg_adj[e, e2] = 1.0
        node_in = np.zeros((n_nodes, n_dir))
        for e in range(n_dir):
            node_in[dst[e], e] = 1.0

        self.n_nodes = n_nodes
        self.label_indices = np.asarray(label_indices, dtype=np.intp)
        self.src = src
        self.msg_adj = msg_adj
        self.node_in = node_in
        self.pool = np.full((1, n_nodes), 1.0 / n_nodes)
