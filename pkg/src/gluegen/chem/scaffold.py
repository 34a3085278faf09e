"""Scaffold extraction: ring systems plus the linkers connecting them."""

from __future__ import annotations

from dataclasses import replace

from .mol import AROMATIC, Atom, Bond, Molecule
from . import rings as ring_mod


def induced_subgraph(mol: Molecule, keep: list[int]) -> tuple[Molecule, dict[int, int]]:
    """Fragment on the given atoms, reindexed in ascending old-index order.

    Hydrogens are added to compensate every dropped bond (aromatic counts
    one), so atom valences stay intact. Returns (fragment, old->new map).
    """
    keep_sorted = sorted(set(keep))
    index_map = {old: new for new, old in enumerate(keep_sorted)}
    frag = Molecule(source_text="")
    for old in keep_sorted:
        a = mol.atoms[old]
        dropped = 0
        for b in mol.bonds_of(old):
            if b.other(old) not in index_map:
                dropped += 1 if b.order == AROMATIC else b.order
        frag.atoms.append(
            Atom(
                index=index_map[old],
                element=a.element,
                formal_charge=a.formal_charge,
                aromatic=a.aromatic,
                implicit_h=a.implicit_h + dropped,
            )
        )
    for b in mol.bonds:
        if b.a in index_map and b.b in index_map:
            frag.bonds.append(replace(b, a=index_map[b.a], b=index_map[b.b]))
    frag.rings = ring_mod.perceive_rings(frag)
    ring_mod.mark_ring_membership(frag)
    return frag, index_map


def murcko_scaffold(mol: Molecule) -> Molecule:
    """Iteratively prune terminal atoms; acyclic input gives the empty scaffold."""
    degree = {a.index: mol.degree(a.index) for a in mol.atoms}
    alive = set(degree)
    changed = True
    while changed:
        changed = False
        for idx in sorted(alive):
            if degree[idx] <= 1:
                alive.discard(idx)
                for n in mol.neighbors(idx):
                    if n in alive:
                        degree[n] -= 1
                degree[idx] = 0
                changed = True
    if not alive:
        return Molecule(source_text="")
    frag, _ = induced_subgraph(mol, sorted(alive))
    return frag
