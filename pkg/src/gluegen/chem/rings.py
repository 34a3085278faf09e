"""Ring perception and the aromaticity model.

SSSR here is the deterministic smallest-set-of-smallest-rings: shortest
cycles through each edge, added greedily in (length, atom-tuple) order while
linearly independent over GF(2). Ring count always equals
bonds - atoms + components.

A ring is aromatic iff every member is sp2-capable and the summed per-atom
pi contributions satisfy the 4n+2 rule.
"""

from __future__ import annotations

from collections import deque

from .mol import (
    AROMATIC,
    AROMATIC_ELEMENTS,
    DOUBLE,
    SINGLE,
    TRIPLE,
    AromaticityError,
    Molecule,
    aromatic_pi_electrons,
)


def perceive_rings(mol: Molecule) -> list[list[int]]:
    """Smallest set of smallest rings, each an ordered cycle of atom indices."""
    n_atoms = len(mol.atoms)
    n_bonds = len(mol.bonds)
    n_comp = len(mol.components()) if n_atoms else 0
    target = n_bonds - n_atoms + n_comp
    if target <= 0:
        return []

    adj: list[list[int]] = [[] for _ in range(n_atoms)]
    for bi, b in enumerate(mol.bonds):
        adj[b.a].append(b.b)
        adj[b.b].append(b.a)
    bond_index = {b.key: bi for bi, b in enumerate(mol.bonds)}

    candidates = []
    for b in mol.bonds:
        path = _shortest_path_avoiding(adj, b.a, b.b, (b.a, b.b))
        if path is None:
            continue  # bridge bond, no cycle
        cycle = path  # ends at b.b, starts at b.a; closing edge is the bond
        key = _cycle_key(cycle)
        candidates.append((len(cycle), key, cycle))
    candidates.sort(key=lambda c: (c[0], c[1]))

    chosen: list[list[int]] = []
    basis: list[int] = []  # GF(2) row-reduced bond-incidence masks
    seen_keys: set[tuple[int, ...]] = set()
    for _, key, cycle in candidates:
        if key in seen_keys:
            continue
        seen_keys.add(key)
        mask = 0
        for i in range(len(cycle)):
            u, v = cycle[i], cycle[(i + 1) % len(cycle)]
            mask |= 1 << bond_index[(u, v) if u < v else (v, u)]
        reduced = mask
        for row in basis:
            reduced = min(reduced, reduced ^ row)
        if reduced:
            basis.append(reduced)
            basis.sort(reverse=True)
            chosen.append(cycle)
            if len(chosen) == target:
                break
    return chosen


def _shortest_path_avoiding(adj, src, dst, forbidden_edge):
    """BFS shortest path src -> dst that does not use forbidden_edge."""
    fa, fb = forbidden_edge
    prev = {src: None}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        if u == dst:
            path = []
            while u is not None:
                path.append(u)
                u = prev[u]
            return path[::-1]
        for v in adj[u]:
            if {u, v} == {fa, fb}:
                continue
            if v not in prev:
                prev[v] = u
                queue.append(v)
    return None


def _cycle_key(cycle: list[int]) -> tuple[int, ...]:
    """Rotation/direction-invariant cycle identity."""
    return tuple(sorted(cycle))


def ring_bonds(mol: Molecule, ring: list[int]) -> list[tuple[int, int]]:
    return [
        (ring[i], ring[(i + 1) % len(ring)]) for i in range(len(ring))
    ]


def mark_ring_membership(mol: Molecule) -> None:
    in_ring: set[tuple[int, int]] = set()
    for ring in mol.rings:
        for u, v in ring_bonds(mol, ring):
            in_ring.add((u, v) if u < v else (v, u))
    for b in mol.bonds:
        b.in_ring = b.key in in_ring


def _kekule_pi(mol: Molecule, idx: int, ring: set[int]) -> int | None:
    """Pi contribution of a non-aromatic atom to a candidate ring, or None
    if the atom cannot be sp2."""
    atom = mol.atoms[idx]
    ring_double = False
    exo_double = False
    for b in mol.bonds_of(idx):
        if b.order == TRIPLE:
            return None
        if b.order == DOUBLE:
            if b.other(idx) in ring:
                ring_double = True
            else:
                exo_double = True
    if ring_double:
        return 1
    if exo_double:
        return 0
    connections = mol.degree(idx) + atom.implicit_h
    if connections > 3:
        return None
    el, q = atom.element, atom.formal_charge
    if el == "C":
        if q == -1:
            return 2
        if q == 1:
            return 0
        return None  # saturated carbon: sp3
    if el in ("N", "P"):
        return 2
    if el in ("O", "S"):
        return 1 if q == 1 else 2
    if el == "B":
        return 0
    return None


def _ring_pi_total(mol: Molecule, ring: list[int]) -> int | None:
    total = 0
    members = set(ring)
    for idx in ring:
        if mol.atoms[idx].aromatic:
            pi = aromatic_pi_electrons(mol, idx)
        else:
            pi = _kekule_pi(mol, idx, members)
        if pi is None:
            return None
        total += pi
    return total


def resolve_aromaticity(mol: Molecule, candidate_bonds: set[tuple[int, int]]) -> None:
    """Finalize aromatic flags after parsing.

    candidate_bonds are implicit bonds written between two lowercase atoms;
    they become aromatic only inside a Hückel-passing ring, otherwise single.
    Raises AromaticityError if an input-aromatic atom ends up on no aromatic
    ring.
    """
    input_aromatic = {a.index for a in mol.atoms if a.aromatic}

    aromatic_rings: list[list[int]] = []
    for ring in mol.rings:
        if not all(i in input_aromatic for i in ring):
            continue
        ok_bonds = True
        for u, v in ring_bonds(mol, ring):
            b = mol.bond_between(u, v)
            if b.order != AROMATIC and b.key not in candidate_bonds:
                ok_bonds = False
                break
        if not ok_bonds:
            continue
        total = _ring_pi_total(mol, ring)
        if total is not None and total % 4 == 2:
            aromatic_rings.append(ring)
            for u, v in ring_bonds(mol, ring):
                mol.bond_between(u, v).order = AROMATIC

    # Candidates outside confirmed rings simply stay single (biaryl linkers).
    covered = {i for ring in aromatic_rings for i in ring}
    missing = input_aromatic - covered
    if missing:
        raise AromaticityError(
            f"aromatic atoms {sorted(missing)} lie on no aromatic ring"
        )


def aromatize_kekule(mol: Molecule) -> None:
    """Promote Kekulé-written rings that satisfy the aromaticity model.

    Runs to a fixpoint so fused systems (naphthalene) promote ring by ring.
    """
    changed = True
    while changed:
        changed = False
        for ring in mol.rings:
            if all(mol.atoms[i].aromatic for i in ring):
                continue
            total = _ring_pi_total(mol, ring)
            if total is None or total % 4 != 2:
                continue
            for i in ring:
                mol.atoms[i].aromatic = True
            for u, v in ring_bonds(mol, ring):
                mol.bond_between(u, v).order = AROMATIC
            changed = True


def validate_aromatic_atoms(mol: Molecule) -> None:
    """Every aromatic atom must sit on at least one all-aromatic SSSR ring."""
    ok: set[int] = set()
    for ring in mol.rings:
        if all(mol.atoms[i].aromatic for i in ring) and all(
            mol.bond_between(u, v).order == AROMATIC for u, v in ring_bonds(mol, ring)
        ):
            ok.update(ring)
    bad = [a.index for a in mol.atoms if a.aromatic and a.index not in ok]
    if bad:
        raise AromaticityError(f"aromatic atoms {bad} lie on no aromatic ring")
