"""Clique decomposition of molecules into junction trees.

Cliques are non-ring bonds, perceived rings (bridged systems sharing more
than two atoms are merged), and singleton hubs for atoms spanning three or
more cliques. The tree is the maximum spanning tree over atom-sharing
clique pairs with a lexicographic tie-break, so output is deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .chem.canon import canonical_ranks, write_canonical_smiles
from .chem.mol import AROMATIC, Atom, Bond, ChemError, Molecule
from .chem.scaffold import induced_subgraph


class MultiFragmentError(ChemError):
    """Junction trees are defined per connected molecule."""


@dataclass(frozen=True)
class Clique:
    atom_indices: tuple[int, ...]
    label: str

    def atoms(self) -> set[int]:
        return set(self.atom_indices)


@dataclass
class JunctionTree:
    nodes: list[Clique]
    edges: list[tuple[int, int]]
    root: int


def fragment_for(mol: Molecule, atom_indices) -> Molecule:
    frag, _ = induced_subgraph(mol, sorted(atom_indices))
    return frag


def clique_label(mol: Molecule, atom_indices) -> str:
    return write_canonical_smiles(fragment_for(mol, atom_indices))


def decompose(mol: Molecule) -> JunctionTree:
    if not mol.atoms:
        raise ChemError("cannot decompose an empty molecule")
    if len(mol.components()) != 1:
        raise MultiFragmentError(
            f"molecule {mol.source_text!r} has multiple fragments"
        )

    ring_sets = [set(r) for r in mol.rings]
    # merge bridged ring systems (shared atoms > 2) to a fixpoint
    merged = True
    while merged:
        merged = False
        for i in range(len(ring_sets)):
            for j in range(i + 1, len(ring_sets)):
                if len(ring_sets[i] & ring_sets[j]) > 2:
                    ring_sets[i] |= ring_sets[j]
                    del ring_sets[j]
                    merged = True
                    break
            if merged:
                break

    ring_bond_keys = set()
    for ring in mol.rings:
        for k in range(len(ring)):
            u, v = ring[k], ring[(k + 1) % len(ring)]
            ring_bond_keys.add((u, v) if u < v else (v, u))

    clique_sets: list[set[int]] = list(ring_sets)
    for b in mol.bonds:
        if b.key not in ring_bond_keys:
            clique_sets.append({b.a, b.b})

    membership: dict[int, list[int]] = {}
    for ci, atoms in enumerate(clique_sets):
        for a in atoms:
            membership.setdefault(a, []).append(ci)
    singleton_atoms = sorted(a for a, cs in membership.items() if len(cs) >= 3)
    singletons = [{a} for a in singleton_atoms]
    clique_sets.extend(singletons)
    singleton_offset = len(clique_sets) - len(singletons)

    order = sorted(
        range(len(clique_sets)),
        key=lambda ci: (min(clique_sets[ci]), len(clique_sets[ci]), sorted(clique_sets[ci])),
    )
    rank_of = {old: new for new, old in enumerate(order)}
    is_singleton = [False] * len(clique_sets)
    for k in range(singleton_offset, len(clique_sets)):
        is_singleton[rank_of[k]] = True
    clique_sets = [clique_sets[old] for old in order]

    nodes = [
        Clique(atom_indices=tuple(sorted(atoms)), label=clique_label(mol, atoms))
        for atoms in clique_sets
    ]

    candidates = []
    for i in range(len(nodes)):
        for j in range(i + 1, len(nodes)):
            shared = clique_sets[i] & clique_sets[j]
            if not shared:
                continue
            weight = 100 if (is_singleton[i] or is_singleton[j]) else len(shared)
            candidates.append((-weight, i, j))
    candidates.sort()

    parent = list(range(len(nodes)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edges = []
    for _, i, j in candidates:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            edges.append((i, j))
    edges.sort()

    if len(edges) != len(nodes) - 1:
        raise ChemError("clique graph is not connected")  # cannot happen on connected input

    root = min(i for i, c in enumerate(nodes) if 0 in c.atom_indices)
    return JunctionTree(nodes=nodes, edges=edges, root=root)


@dataclass
class CoverReport:
    ok: bool
    problem: str = ""


def verify_cover(mol: Molecule, tree: JunctionTree) -> CoverReport:
    """Check the junction-tree invariants, reporting the first violation."""
    n = len(tree.nodes)
    if n == 0:
        return CoverReport(False, "tree has no nodes")
    if len(tree.edges) != n - 1:
        return CoverReport(False, f"edge count {len(tree.edges)} != nodes-1 ({n - 1})")

    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in tree.edges:
        if not (0 <= u < n and 0 <= v < n):
            return CoverReport(False, f"edge ({u},{v}) out of range")
        ru, rv = find(u), find(v)
        if ru == rv:
            return CoverReport(False, f"edge ({u},{v}) creates a cycle")
        parent[ru] = rv

    covered = set()
    for c in tree.nodes:
        covered.update(c.atom_indices)
    missing = set(range(len(mol.atoms))) - covered
    if missing:
        return CoverReport(False, f"atoms {sorted(missing)} not covered by any clique")

    ring_bond_keys = set()
    for ring in mol.rings:
        for k in range(len(ring)):
            u, v = ring[k], ring[(k + 1) % len(ring)]
            ring_bond_keys.add((u, v) if u < v else (v, u))
    for b in mol.bonds:
        holders = sum(1 for c in tree.nodes if b.a in c.atoms() and b.b in c.atoms())
        if holders == 0:
            return CoverReport(False, f"bond {b.key} not inside any clique")
        # fused SSSR rings legitimately share an edge; non-ring bonds may not
        if b.key not in ring_bond_keys and holders != 1:
            return CoverReport(False, f"non-ring bond {b.key} inside {holders} cliques")

    for u, v in tree.edges:
        if not (tree.nodes[u].atoms() & tree.nodes[v].atoms()):
            return CoverReport(False, f"edge ({u},{v}) joins disjoint cliques")

    if not (0 <= tree.root < n):
        return CoverReport(False, f"root {tree.root} out of range")
    return CoverReport(True)


@dataclass
class Vocabulary:
    labels: list[str] = field(default_factory=list)
    counts: dict[str, int] = field(default_factory=dict)
    templates: dict[str, Molecule] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"clique label {label!r} not in vocabulary") from None

    def save_tsv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for label in self.labels:
                fh.write(f"{label}\t{self.counts[label]}\n")

    @classmethod
    def load_tsv(cls, path) -> "Vocabulary":
        vocab = cls()
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if not line:
                    continue
                label, count = line.split("\t")
                vocab.labels.append(label)
                vocab.counts[label] = int(count)
        return vocab

    def save_templates(self, path) -> None:
        payload = {}
        for label, frag in self.templates.items():
            payload[label] = {
                "atoms": [
                    [a.element, a.formal_charge, int(a.aromatic), a.implicit_h]
                    for a in frag.atoms
                ],
                "bonds": [[b.a, b.b, b.order] for b in frag.bonds],
            }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump({"version": 1, "templates": payload}, fh, indent=0, sort_keys=True)

    @classmethod
    def load_templates(cls, path) -> dict[str, Molecule]:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        out = {}
        for label, spec in payload["templates"].items():
            frag = Molecule(source_text=label)
            for i, (el, q, ar, h) in enumerate(spec["atoms"]):
                frag.atoms.append(
                    Atom(index=i, element=el, formal_charge=q, aromatic=bool(ar), implicit_h=h)
                )
            for a, b, order in spec["bonds"]:
                frag.bonds.append(Bond(a=a, b=b, order=order))
            from .chem import rings as ring_mod

            frag.rings = ring_mod.perceive_rings(frag)
            ring_mod.mark_ring_membership(frag)
            out[label] = frag
        return out


def canonical_template(frag: Molecule) -> Molecule:
    """Relabel a fragment into canonical atom order so isomorphic fragments
    produce the identical template."""
    ranks = canonical_ranks(frag)
    order = sorted(range(len(frag.atoms)), key=lambda i: ranks[i])
    return frag.permuted(order)


def build_vocabulary(corpus: list[Molecule]) -> Vocabulary:
    counts: dict[str, int] = {}
    templates: dict[str, Molecule] = {}
    for mol in corpus:
        try:
            tree = decompose(mol)
        except ChemError as exc:
            raise ChemError(f"{mol.source_text!r}: {exc}") from exc
        for clique in tree.nodes:
            counts[clique.label] = counts.get(clique.label, 0) + 1
            if clique.label not in templates:
                templates[clique.label] = canonical_template(
                    fragment_for(mol, clique.atom_indices)
                )
    labels = sorted(counts, key=lambda l: (-counts[l], l))
    return Vocabulary(labels=labels, counts=counts, templates=templates)
