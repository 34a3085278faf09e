"""Core molecular graph types and valence model.

Molecules are attributed graphs: atoms carry element/charge/aromaticity and
an implicit-hydrogen count, bonds carry an order (single/double/triple or
aromatic) plus ring/rotatability annotations filled in by perception passes.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace


class ChemError(ValueError):
    """Base class for chemistry errors."""


class SmilesSyntaxError(ChemError):
    """Malformed SMILES text (unbalanced rings/parens, unknown tokens)."""


class ValenceError(ChemError):
    """An atom exceeds the valence allowed for its element."""


class AromaticityError(ChemError):
    """Aromatic atoms that cannot be placed on any aromatic ring."""


# Bond order codes. AROMATIC is a first-class order, not a resonance view.
SINGLE = 1
DOUBLE = 2
TRIPLE = 3
AROMATIC = 4

ORDER_NAMES = {SINGLE: "single", DOUBLE: "double", TRIPLE: "triple", AROMATIC: "aromatic"}

# Organic-subset elements plus halogens; anything else is a parse error.
SUPPORTED_ELEMENTS = ("B", "C", "N", "O", "F", "P", "S", "Cl", "Br", "I", "H")

# IUPAC standard atomic weights, abridged.
ATOMIC_WEIGHTS = {
    "H": 1.008,
    "B": 10.81,
    "C": 12.011,
    "N": 14.007,
    "O": 15.999,
    "F": 18.998,
    "P": 30.974,
    "S": 32.06,
    "Cl": 35.45,
    "Br": 79.904,
    "I": 126.904,
}

# Allowed total valences per element (after charge adjustment).
ALLOWED_VALENCES = {
    "B": (3,),
    "C": (4,),
    "N": (3,),
    "O": (2,),
    "F": (1,),
    "P": (3, 5),
    "S": (2, 4, 6),
    "Cl": (1,),
    "Br": (1,),
    "I": (1,),
    "H": (1,),
}

# Elements that may appear lowercase (aromatic) in SMILES.
AROMATIC_ELEMENTS = ("B", "C", "N", "O", "P", "S")


@dataclass
class Atom:
    index: int
    element: str
    formal_charge: int = 0
    aromatic: bool = False
    implicit_h: int = 0


@dataclass
class Bond:
    a: int
    b: int
    order: int = SINGLE
    in_ring: bool = False
    rotatable: bool = False
    torsion: float | None = None

    def other(self, idx: int) -> int:
        if idx == self.a:
            return self.b
        if idx == self.b:
            return self.a
        raise ValueError(f"atom {idx} not in bond ({self.a},{self.b})")

    @property
    def key(self) -> tuple[int, int]:
        return (self.a, self.b) if self.a < self.b else (self.b, self.a)


@dataclass
class Molecule:
    atoms: list[Atom] = field(default_factory=list)
    bonds: list[Bond] = field(default_factory=list)
    source_text: str = ""
    # Smallest set of smallest rings, each an ordered atom cycle. Populated
    # by perception; construct via chem.smiles.parse_smiles or finish().
    rings: list[list[int]] = field(default_factory=list)

    def n_atoms(self) -> int:
        return len(self.atoms)

    def n_bonds(self) -> int:
        return len(self.bonds)

    def neighbors(self, idx: int) -> list[int]:
        out = []
        for b in self.bonds:
            if b.a == idx:
                out.append(b.b)
            elif b.b == idx:
                out.append(b.a)
        return out

    def bonds_of(self, idx: int) -> list[Bond]:
        return [b for b in self.bonds if idx in (b.a, b.b)]

    def bond_between(self, i: int, j: int) -> Bond | None:
        for b in self.bonds:
            if {b.a, b.b} == {i, j}:
                return b
        return None

    def degree(self, idx: int) -> int:
        return sum(1 for b in self.bonds if idx in (b.a, b.b))

    def heavy_degree(self, idx: int) -> int:
        return sum(1 for n in self.neighbors(idx) if self.atoms[n].element != "H")

    def components(self) -> list[list[int]]:
        """Connected components as sorted atom-index lists, in first-atom order."""
        seen: set[int] = set()
        comps = []
        for start in range(len(self.atoms)):
            if start in seen:
                continue
            stack, comp = [start], []
            seen.add(start)
            while stack:
                u = stack.pop()
                comp.append(u)
                for v in self.neighbors(u):
                    if v not in seen:
                        seen.add(v)
                        stack.append(v)
            comps.append(sorted(comp))
        return comps

    def molecular_weight(self) -> float:
        mw = 0.0
        for a in self.atoms:
            mw += ATOMIC_WEIGHTS[a.element]
            mw += a.implicit_h * ATOMIC_WEIGHTS["H"]
        return mw

    def permuted(self, order: list[int]) -> "Molecule":
        """Relabeled copy: new atom i is old atom order[i]. Used by invariance tests."""
        if sorted(order) != list(range(len(self.atoms))):
            raise ValueError("order must be a permutation of atom indices")
        inv = [0] * len(order)
        for new, old in enumerate(order):
            inv[old] = new
        atoms = [replace(self.atoms[old], index=new) for new, old in enumerate(order)]
        bonds = [replace(b, a=inv[b.a], b=inv[b.b]) for b in self.bonds]
        rings = [[inv[i] for i in ring] for ring in self.rings]
        return Molecule(atoms=atoms, bonds=bonds, source_text=self.source_text, rings=rings)


def aromatic_pi_electrons(mol: Molecule, idx: int) -> int:
    """Pi electrons an aromatic atom donates to its ring system.

    1 means the atom shares a ring double bond (pyridine-type), 2 a lone
    pair (pyrrole/furan-type), 0 an empty orbital or an exocyclic double.
    """
    atom = mol.atoms[idx]
    for b in mol.bonds_of(idx):
        if b.order == DOUBLE and not mol.atoms[b.other(idx)].aromatic:
            return 0  # exocyclic double bond holds the p orbital
    el, q = atom.element, atom.formal_charge
    sigma = mol.degree(idx)
    if el == "C":
        if q == -1:
            return 2
        if q == 1:
            return 0
        return 1
    if el in ("N", "P"):
        if atom.implicit_h > 0 or sigma >= 3:
            return 2
        return 1
    if el in ("O", "S"):
        return 1 if q == 1 else 2
    if el == "B":
        return 0
    return 1


def atom_valence(mol: Molecule, idx: int) -> float:
    """Effective valence: bond orders + implicit H − formal charge.

    Aromatic bonds count 1 sigma each; an aromatic atom that donates one pi
    electron (pyridine-type) gets +1 for its share of the delocalized bond.
    """
    atom = mol.atoms[idx]
    total = 0.0
    n_arom = 0
    for b in mol.bonds_of(idx):
        if b.order == AROMATIC:
            total += 1
            n_arom += 1
        else:
            total += b.order
    if atom.aromatic and n_arom > 0 and aromatic_pi_electrons(mol, idx) == 1:
        total += 1
    return total + atom.implicit_h - atom.formal_charge


@dataclass
class ValenceReport:
    ok: bool
    failures: list[tuple[int, str]] = field(default_factory=list)


def check_valence(mol: Molecule) -> ValenceReport:
    """Diagnostic valence check over every atom; never raises."""
    failures = []
    for atom in mol.atoms:
        allowed = ALLOWED_VALENCES.get(atom.element)
        if allowed is None:
            failures.append((atom.index, f"unsupported element {atom.element!r}"))
            continue
        v = atom_valence(mol, atom.index)
        if v != int(v) or int(v) not in allowed:
            failures.append(
                (atom.index, f"{atom.element} valence {v:g} not in {sorted(allowed)}")
            )
    return ValenceReport(ok=not failures, failures=failures)
