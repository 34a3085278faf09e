"""3D conformers: SDF ingestion, dihedral angles, torsion features, RMSD."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chem import rings as ring_mod
from .chem.descriptors import find_rotatable_bond_indices
from .chem.mol import (
    AROMATIC,
    Atom,
    Bond,
    ChemError,
    Molecule,
    SUPPORTED_ELEMENTS,
    check_valence,
)
from .chem.smiles import infer_hydrogens


class SdfFormatError(ChemError):
    """Malformed MDL MOL/SDF V2000 input."""


class GeometryError(ChemError):
    """Degenerate geometry (collinear dihedral atoms, size mismatch)."""


@dataclass
class Conformer:
    molecule: Molecule
    coords: np.ndarray  # (n_atoms, 3) Angstrom

    def __post_init__(self):
        self.coords = np.asarray(self.coords, dtype=np.float64)
        if self.coords.shape != (len(self.molecule.atoms), 3):
            raise GeometryError(
                f"coords shape {self.coords.shape} does not match atom count "
                f"{len(self.molecule.atoms)}"
            )
        if not np.all(np.isfinite(self.coords)):
            raise GeometryError("non-finite coordinates")


def parse_sdf_v2000(text: str) -> list[tuple[Molecule, Conformer]]:
    """Parse an SDF (one or more V2000 molblocks separated by $$$$)."""
    out = []
    record_lines: list[str] = []
    for line in text.splitlines():
        if line.strip() == "$$$$":
            if any(l.strip() for l in record_lines):
                out.append(_parse_molblock(record_lines))
            record_lines = []
        else:
            record_lines.append(line)
    if any(l.strip() for l in record_lines):
        out.append(_parse_molblock(record_lines))
    return out


def _parse_molblock(lines: list[str]) -> tuple[Molecule, Conformer]:
    if len(lines) < 4:
        raise SdfFormatError("molblock shorter than the 4-line header")
    counts = lines[3]
    if len(counts) < 39 or counts[33:39].strip() != "V2000":
        raise SdfFormatError(f"unsupported or missing version tag in counts line: {counts!r}")
    try:
        n_atoms = int(counts[0:3])
        n_bonds = int(counts[3:6])
    except ValueError as exc:
        raise SdfFormatError(f"bad counts line: {counts!r}") from exc

    atom_lines = lines[4 : 4 + n_atoms]
    bond_lines = lines[4 + n_atoms : 4 + n_atoms + n_bonds]
    if len(atom_lines) != n_atoms or len(bond_lines) != n_bonds:
        raise SdfFormatError(
            f"counts line declares {n_atoms} atoms / {n_bonds} bonds but the "
            "block is shorter"
        )

    mol = Molecule(source_text="\n".join(lines))
    coords = np.zeros((n_atoms, 3))
    for i, line in enumerate(atom_lines):
        if len(line) < 34:
            raise SdfFormatError(f"atom line {i + 1} too short: {line!r}")
        try:
            x = float(line[0:10])
            y = float(line[10:20])
            z = float(line[20:30])
        except ValueError as exc:
            raise SdfFormatError(f"non-numeric coordinate on atom line {i + 1}") from exc
        coords[i] = (x, y, z)
        element = line[31:34].strip()
        if element not in SUPPORTED_ELEMENTS:
            raise SdfFormatError(f"unsupported element {element!r} on atom line {i + 1}")
        mol.atoms.append(Atom(index=i, element=element))

    aromatic_bonds = []
    for k, line in enumerate(bond_lines):
        try:
            a = int(line[0:3]) - 1
            b = int(line[3:6]) - 1
            order = int(line[6:9])
        except ValueError as exc:
            raise SdfFormatError(f"bad bond line {k + 1}: {line!r}") from exc
        if not (0 <= a < n_atoms and 0 <= b < n_atoms) or a == b:
            raise SdfFormatError(f"bond line {k + 1} references bad atom indices")
        if order == 4:
            order = AROMATIC
            aromatic_bonds.append(len(mol.bonds))
        elif order not in (1, 2, 3):
            raise SdfFormatError(f"unsupported bond type {order} on bond line {k + 1}")
        mol.bonds.append(Bond(a=a, b=b, order=order))

    for line in lines[4 + n_atoms + n_bonds :]:
        if line.startswith("M  CHG"):
            fields = line.split()
            n = int(fields[2])
            for p in range(n):
                idx = int(fields[3 + 2 * p]) - 1
                mol.atoms[idx].formal_charge = int(fields[4 + 2 * p])
        elif line.startswith("M  END"):
            break

    for bi in aromatic_bonds:
        b = mol.bonds[bi]
        mol.atoms[b.a].aromatic = True
        mol.atoms[b.b].aromatic = True

    mol.rings = ring_mod.perceive_rings(mol)
    ring_mod.mark_ring_membership(mol)
    for a in mol.atoms:
        if a.formal_charge == 0:
            a.implicit_h = infer_hydrogens(mol, a.index)
        else:
            # MDL-style: hydrogens fill the smallest charge-adjusted valence
            total = sum(
                1 if b.order == AROMATIC else b.order for b in mol.bonds_of(a.index)
            )
            effective = total - a.formal_charge
            from .chem.mol import ALLOWED_VALENCES

            slots = [v for v in ALLOWED_VALENCES[a.element] if v >= effective]
            if not slots:
                raise SdfFormatError(
                    f"molblock atom {a.index}: charge-adjusted valence {effective} "
                    f"exceeds allowed for {a.element}"
                )
            a.implicit_h = slots[0] - effective
    ring_mod.aromatize_kekule(mol)
    ring_mod.validate_aromatic_atoms(mol)
    report = check_valence(mol)
    if not report.ok:
        idx, why = report.failures[0]
        raise SdfFormatError(f"molblock atom {idx}: {why}")
    return mol, Conformer(molecule=mol, coords=coords)


def find_rotatable_bonds(mol: Molecule) -> list[int]:
    """Bond indices that are single, acyclic, with both ends heavy-degree >= 2."""
    idx = find_rotatable_bond_indices(mol)
    for i in idx:
        mol.bonds[i].rotatable = True
    return idx


def dihedral_angle(conf: Conformer, i: int, j: int, k: int, l: int) -> float:
    """Signed dihedral in degrees, range (-180, 180], right-handed convention."""
    if len({i, j, k, l}) != 4:
        raise GeometryError("dihedral needs four distinct atoms")
    r = conf.coords
    b1 = r[j] - r[i]
    b2 = r[k] - r[j]
    b3 = r[l] - r[k]
    n1 = np.cross(b1, b2)
    n2 = np.cross(b2, b3)
    if np.linalg.norm(n1) < 1e-10 or np.linalg.norm(n2) < 1e-10:
        raise GeometryError(f"collinear atoms in dihedral ({i},{j},{k},{l})")
    y = np.dot(np.cross(n1, n2), b2 / np.linalg.norm(b2))
    x = np.dot(n1, n2)
    angle = math.degrees(math.atan2(y, x))
    if angle <= -180.0:
        angle += 360.0
    return angle


def bond_torsion_features(
    mol: Molecule, conf: Conformer | None = None
) -> tuple[np.ndarray, int]:
    """(sin, cos, flag) per bond, aligned with mol.bonds.

    Non-rotatable bonds, absent conformers and degenerate geometry all give
    (0, 0, 0); the second return value counts degenerate-geometry warnings.
    """
    if conf is not None and conf.molecule is not mol:
        raise GeometryError("conformer belongs to a different molecule")
    features = np.zeros((len(mol.bonds), 3))
    warnings = 0
    if conf is None:
        return features, warnings
    rotatable = find_rotatable_bonds(mol)
    for bi in rotatable:
        b = mol.bonds[bi]
        j, k = b.a, b.b
        i = _reference_neighbor(mol, j, exclude=k)
        l = _reference_neighbor(mol, k, exclude=j)
        if i is None or l is None:
            continue
        try:
            theta = dihedral_angle(conf, i, j, k, l)
        except GeometryError:
            warnings += 1
            continue
        b.torsion = theta
        rad = math.radians(theta)
        features[bi] = (math.sin(rad), math.cos(rad), 1.0)
    return features, warnings


def _reference_neighbor(mol: Molecule, idx: int, exclude: int) -> int | None:
    heavy = [n for n in mol.neighbors(idx) if n != exclude and mol.atoms[n].element != "H"]
    return min(heavy) if heavy else None


def kabsch_rmsd(a: Conformer, b: Conformer) -> float:
    """Minimal RMSD over rigid rotations and translations."""
    return kabsch_rmsd_coords(a.coords, b.coords)


def kabsch_rmsd_coords(p: np.ndarray, q: np.ndarray) -> float:
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise GeometryError(f"conformer size mismatch: {p.shape} vs {q.shape}")
    pc = p - p.mean(axis=0)
    qc = q - q.mean(axis=0)
    h = pc.T @ qc
    u, _, vt = np.linalg.svd(h)
    d = np.sign(np.linalg.det(vt.T @ u.T))
    corr = np.diag([1.0, 1.0, d])
    rot = vt.T @ corr @ u.T
    aligned = pc @ rot.T
    return float(np.sqrt(np.mean(np.sum((aligned - qc) ** 2, axis=1))))
