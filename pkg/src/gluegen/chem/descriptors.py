"""Physicochemical descriptors for filtering and drug-likeness scoring."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from .mol import AROMATIC, DOUBLE, SINGLE, TRIPLE, Molecule
from .rings import ring_bonds

_CRIPPEN = None


def _crippen_table() -> dict:
    global _CRIPPEN
    if _CRIPPEN is None:
        text = resources.files("gluegen.data").joinpath("crippen_contributions.json").read_text()
        _CRIPPEN = json.loads(text)
    return _CRIPPEN


@dataclass
class Descriptors:
    mw: float
    hbd: int
    hba: int
    rot_bonds: int
    aromatic_rings: int
    logp: float


def find_rotatable_bond_indices(mol: Molecule) -> list[int]:
    """Single, acyclic bonds whose endpoints both have heavy degree >= 2."""
    out = []
    for i, b in enumerate(mol.bonds):
        if b.order != SINGLE or b.in_ring:
            continue
        if mol.heavy_degree(b.a) >= 2 and mol.heavy_degree(b.b) >= 2:
            out.append(i)
    return out


def aromatic_ring_count(mol: Molecule) -> int:
    count = 0
    for ring in mol.rings:
        if all(mol.atoms[i].aromatic for i in ring) and all(
            mol.bond_between(u, v).order == AROMATIC for u, v in ring_bonds(mol, ring)
        ):
            count += 1
    return count


def compute_descriptors(mol: Molecule) -> Descriptors:
    """Descriptor block; the empty molecule yields all zeros rather than failing."""
    if not mol.atoms:
        return Descriptors(mw=0.0, hbd=0, hba=0, rot_bonds=0, aromatic_rings=0, logp=0.0)

    explicit_h = [0] * len(mol.atoms)
    for b in mol.bonds:
        if mol.atoms[b.a].element == "H":
            explicit_h[b.b] += 1
        if mol.atoms[b.b].element == "H":
            explicit_h[b.a] += 1

    hbd = 0
    hba = 0
    for a in mol.atoms:
        if a.element in ("N", "O"):
            hba += 1
            if a.implicit_h + explicit_h[a.index] >= 1:
                hbd += 1

    return Descriptors(
        mw=mol.molecular_weight(),
        hbd=hbd,
        hba=hba,
        rot_bonds=len(find_rotatable_bond_indices(mol)),
        aromatic_rings=aromatic_ring_count(mol),
        logp=crippen_logp(mol),
    )


def crippen_logp(mol: Molecule) -> float:
    table = _crippen_table()
    classes = table["classes"]
    hydro = table["hydrogen"]
    total = 0.0
    for a in mol.atoms:
        if a.element == "H":
            nb = mol.neighbors(a.index)
            key = "H.on_carbon" if nb and mol.atoms[nb[0]].element == "C" else "H.on_hetero"
            total += hydro[key]
            continue
        total += classes[_atom_class(mol, a.index)]
        key = "H.on_carbon" if a.element == "C" else "H.on_hetero"
        total += a.implicit_h * hydro[key]
    return total


def _atom_class(mol: Molecule, idx: int) -> str:
    a = mol.atoms[idx]
    el = a.element
    bonds = mol.bonds_of(idx)
    neighbors = [mol.atoms[b.other(idx)] for b in bonds]

    if el == "C":
        if a.aromatic:
            if any(n.aromatic and n.element != "C" for n in neighbors):
                return "C.aromatic.hetero"
            return "C.aromatic.ch" if a.implicit_h > 0 else "C.aromatic.sub"
        if any(b.order == TRIPLE for b in bonds):
            return "C.sp"
        if any(b.order == DOUBLE for b in bonds):
            for b in bonds:
                if b.order == DOUBLE and mol.atoms[b.other(idx)].element != "C":
                    return "C.sp2.hetero"
            return "C.sp2.hydrocarbon"
        if any(n.element not in ("C", "H") for n in neighbors):
            return "C.sp3.hetero"
        return "C.sp3.hydrocarbon"

    if el == "N":
        if a.formal_charge > 0:
            return "N.charged"
        if a.aromatic:
            return "N.aromatic"
        if any(b.order in (DOUBLE, TRIPLE) for b in bonds):
            return "N.sp2"
        for b in bonds:
            c = b.other(idx)
            if mol.atoms[c].element == "C" and any(
                bb.order == DOUBLE and mol.atoms[bb.other(c)].element == "O"
                for bb in mol.bonds_of(c)
            ):
                return "N.amide"
        heavy = mol.heavy_degree(idx)
        if heavy <= 1:
            return "N.amine.primary"
        if heavy == 2:
            return "N.amine.secondary"
        return "N.amine.tertiary"

    if el == "O":
        if a.formal_charge < 0:
            return "O.anion"
        if a.aromatic:
            return "O.aromatic"
        if any(b.order == DOUBLE for b in bonds):
            return "O.carbonyl"
        if a.implicit_h > 0:
            return "O.hydroxyl"
        return "O.ether"

    if el == "S":
        return "S.aromatic" if a.aromatic else "S.aliphatic"
    return f"{el}.any"
