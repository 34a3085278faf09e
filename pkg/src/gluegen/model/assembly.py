"""Attachment enumeration: all ways to glue a child clique onto its parent.

Cliques meet on one atom or on one bond, so candidates are atom
identifications and bond identifications between the two fragment
templates. Candidates carry a role-annotated merged graph for scoring and
deduplicate on a canonical signature, in deterministic order.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..chem.canon import canonical_ranks
from ..chem.mol import AROMATIC, Atom, Bond, Molecule
from ..chem import rings as ring_mod
from .features import GraphWiring

ROLE_PARENT = 0
ROLE_SHARED = 1
ROLE_CHILD = 2


def _order_value(order: int) -> int:
    return 1 if order == AROMATIC else order


def _bond_sum(frag: Molecule, idx: int, skip: tuple[int, int] | None = None) -> int:
    total = 0
    for b in frag.bonds_of(idx):
        if skip is not None and b.key == skip:
            continue
        total += _order_value(b.order)
    return total


def _compatible(a: Atom, b: Atom) -> bool:
    return (
        a.element == b.element
        and a.aromatic == b.aromatic
        and a.formal_charge == b.formal_charge
    )


@dataclass
class MergeCandidate:
    kind: str  # "atom" | "bond"
    parent_atoms: tuple[int, ...]  # parent fragment indices being identified
    child_atoms: tuple[int, ...]  # child fragment indices, aligned with parent_atoms
    fragment: Molecule  # merged graph, parent atoms keep their indices
    roles: list[int]
    signature: str


def merge_signature(frag: Molecule, roles: list[int]) -> str:
    ranks = canonical_ranks(frag, extra=roles)
    order = sorted(range(len(frag.atoms)), key=lambda i: ranks[i])
    pos = {old: new for new, old in enumerate(order)}
    atom_part = ";".join(
        f"{frag.atoms[i].element}{int(frag.atoms[i].aromatic)}"
        f"q{frag.atoms[i].formal_charge}h{frag.atoms[i].implicit_h}r{roles[i]}"
        for i in order
    )
    bond_part = ",".join(
        sorted(f"{min(pos[b.a], pos[b.b])}-{max(pos[b.a], pos[b.b])}:{b.order}" for b in frag.bonds)
    )
    return atom_part + "|" + bond_part


def _merge(parent: Molecule, child: Molecule, parent_atoms, child_atoms) -> tuple[Molecule, list[int]] | None:
    """Build the merged fragment, or None when hydrogen budgets disagree."""
    pairing = dict(zip(child_atoms, parent_atoms))
    shared_bond = None
    if len(parent_atoms) == 2:
        shared_bond = (
            (min(parent_atoms), max(parent_atoms)),
            (min(child_atoms), max(child_atoms)),
        )

    merged = Molecule(source_text="")
    roles: list[int] = []
    for a in parent.atoms:
        merged.atoms.append(replace(a))
        roles.append(ROLE_SHARED if a.index in parent_atoms else ROLE_PARENT)
    child_map: dict[int, int] = {}
    for j, a in enumerate(child.atoms):
        if j in pairing:
            child_map[j] = pairing[j]
        else:
            child_map[j] = len(merged.atoms)
            merged.atoms.append(replace(a, index=len(merged.atoms)))
            roles.append(ROLE_CHILD)

    for b in parent.bonds:
        merged.bonds.append(replace(b))
    for b in child.bonds:
        if shared_bond is not None and b.key == shared_bond[1]:
            continue  # this bond coincides with the parent's shared bond
        merged.bonds.append(replace(b, a=child_map[b.a], b=child_map[b.b]))

    # hydrogen bookkeeping on the identified atoms
    for j, i in pairing.items():
        child_skip = shared_bond[1] if shared_bond else None
        parent_skip = shared_bond[0] if shared_bond else None
        added = _bond_sum(child, j, skip=child_skip)
        h_parent_view = parent.atoms[i].implicit_h - added
        h_child_view = child.atoms[j].implicit_h - _bond_sum(parent, i, skip=parent_skip)
        if h_parent_view != h_child_view or h_parent_view < 0:
            return None
        merged.atoms[i].implicit_h = h_parent_view

    merged.rings = ring_mod.perceive_rings(merged)
    ring_mod.mark_ring_membership(merged)
    return merged, roles


def enumerate_merges(
    parent: Molecule, child: Molecule, cap: int = 100
) -> tuple[list[MergeCandidate], bool]:
    """All distinct attachments of child onto parent, signature-sorted.

    Returns (candidates, overflowed). Symmetry-equivalent attachments
    collapse to one candidate via the canonical signature.
    """
    raw: list[MergeCandidate] = []

    for i in range(len(parent.atoms)):
        for j in range(len(child.atoms)):
            if not _compatible(parent.atoms[i], child.atoms[j]):
                continue
            built = _merge(parent, child, (i,), (j,))
            if built is None:
                continue
            frag, roles = built
            raw.append(
                MergeCandidate(
                    kind="atom",
                    parent_atoms=(i,),
                    child_atoms=(j,),
                    fragment=frag,
                    roles=roles,
                    signature=merge_signature(frag, roles),
                )
            )

    for pb in parent.bonds:
        for cb in child.bonds:
            if pb.order != cb.order:
                continue
            for pa, ca in (((pb.a, pb.b), (cb.a, cb.b)), ((pb.a, pb.b), (cb.b, cb.a))):
                if not (
                    _compatible(parent.atoms[pa[0]], child.atoms[ca[0]])
                    and _compatible(parent.atoms[pa[1]], child.atoms[ca[1]])
                ):
                    continue
                built = _merge(parent, child, pa, ca)
                if built is None:
                    continue
                frag, roles = built
                raw.append(
                    MergeCandidate(
                        kind="bond",
                        parent_atoms=pa,
                        child_atoms=ca,
                        fragment=frag,
                        roles=roles,
                        signature=merge_signature(frag, roles),
                    )
                )

    raw.sort(key=lambda c: (c.signature, c.kind, c.parent_atoms, c.child_atoms))
    seen: set[str] = set()
    unique: list[MergeCandidate] = []
    for cand in raw:
        if cand.signature in seen:
            continue
        seen.add(cand.signature)
        unique.append(cand)
    overflow = len(unique) > cap
    return unique[:cap], overflow


def ground_truth_fragment(
    mol: Molecule, parent_atoms: tuple[int, ...], child_atoms: tuple[int, ...]
) -> tuple[Molecule, list[int]]:
    """Role-annotated merged subgraph as it exists in the real molecule.

    Bonds are kept only when they lie inside the parent clique or inside the
    child clique, mirroring candidate construction.
    """
    pset, cset = set(parent_atoms), set(child_atoms)
    keep = sorted(pset | cset)
    index_map = {old: new for new, old in enumerate(keep)}
    frag = Molecule(source_text="")
    roles = []
    kept_keys = set()
    for b in mol.bonds:
        if (b.a in pset and b.b in pset) or (b.a in cset and b.b in cset):
            kept_keys.add(b.key)
    for old in keep:
        a = mol.atoms[old]
        dropped = 0
        for b in mol.bonds_of(old):
            if b.key not in kept_keys:
                dropped += _order_value(b.order)
        frag.atoms.append(
            Atom(
                index=index_map[old],
                element=a.element,
                formal_charge=a.formal_charge,
                aromatic=a.aromatic,
                implicit_h=a.implicit_h + dropped,
            )
        )
        if old in pset and old in cset:
            roles.append(ROLE_SHARED)
        elif old in pset:
            roles.append(ROLE_PARENT)
        else:
            roles.append(ROLE_CHILD)
    for b in mol.bonds:
        if b.key in kept_keys:
            frag.bonds.append(replace(b, a=index_map[b.a], b=index_map[b.b]))
    frag.rings = ring_mod.perceive_rings(frag)
    ring_mod.mark_ring_membership(frag)
    return frag, roles


def candidate_wiring(cand: MergeCandidate) -> GraphWiring:
    role_feats = np.zeros((len(cand.fragment.atoms), 3))
    for i, r in enumerate(cand.roles):
        role_feats[i, r] = 1.0
    return GraphWiring(cand.fragment, torsions=None, extra_atom_feats=role_feats)
