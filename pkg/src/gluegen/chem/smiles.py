"""SMILES reader.

Accepts the organic subset plus bracket atoms over the supported element
set. Stereo markers (/, \\, @) are read and discarded. Isotope labels and
atom-map classes are rejected. Parsing finishes with ring perception,
aromaticity resolution, implicit-hydrogen filling and a valence screen.
"""

from __future__ import annotations

from .mol import (
    ALLOWED_VALENCES,
    AROMATIC,
    AROMATIC_ELEMENTS,
    DOUBLE,
    SINGLE,
    SUPPORTED_ELEMENTS,
    TRIPLE,
    Atom,
    Bond,
    Molecule,
    SmilesSyntaxError,
    ValenceError,
    aromatic_pi_electrons,
    check_valence,
)
from . import rings as ring_mod

_BOND_CHARS = {"-": SINGLE, "=": DOUBLE, "#": TRIPLE, ":": AROMATIC, "/": SINGLE, "\\": SINGLE}
_TWO_LETTER = ("Cl", "Br")


class _PendingAtom:
    __slots__ = ("element", "aromatic", "charge", "h_count", "bracket")

    def __init__(self, element, aromatic, charge=0, h_count=None, bracket=False):
        self.element = element
        self.aromatic = aromatic
        self.charge = charge
        self.h_count = h_count  # None: fill later by valence rules
        self.bracket = bracket


def parse_smiles(text: str) -> Molecule:
    """Parse SMILES text into a perceived, hydrogen-filled Molecule."""
    if not text or not text.strip():
        raise SmilesSyntaxError("empty SMILES")
    if not text.isascii():
        raise SmilesSyntaxError("SMILES must be ASCII")
    text = text.strip()

    mol = Molecule(source_text=text)
    pending: list[_PendingAtom] = []
    bonds: list[tuple[int, int, int | None]] = []  # (a, b, order or None=default)
    prev: int | None = None
    branch_stack: list[int | None] = []
    ring_open: dict[int, tuple[int, int | None]] = {}
    pending_order: int | None = None
    had_bond_char = False

    i, n = 0, len(text)
    while i < n:
        ch = text[i]

        if ch == "(":
            if prev is None:
                raise SmilesSyntaxError("branch before any atom")
            branch_stack.append(prev)
            i += 1
            continue
        if ch == ")":
            if not branch_stack:
                raise SmilesSyntaxError("unbalanced ')'")
            if had_bond_char:
                raise SmilesSyntaxError("dangling bond before ')'")
            prev = branch_stack.pop()
            i += 1
            continue
        if ch in _BOND_CHARS:
            if had_bond_char:
                raise SmilesSyntaxError(f"two bond symbols in a row at position {i}")
            pending_order = _BOND_CHARS[ch]
            had_bond_char = True
            i += 1
            continue
        if ch == ".":
            if had_bond_char:
                raise SmilesSyntaxError("bond symbol before '.'")
            if prev is None:
                raise SmilesSyntaxError("'.' with no preceding atom")
            prev = None
            i += 1
            continue

        if ch.isdigit() or ch == "%":
            if prev is None:
                raise SmilesSyntaxError("ring closure before any atom")
            if ch == "%":
                if i + 2 >= n or not text[i + 1 : i + 3].isdigit():
                    raise SmilesSyntaxError("'%' needs two digits")
                num = int(text[i + 1 : i + 3])
                i += 3
            else:
                num = int(ch)
                i += 1
            order = pending_order
            pending_order, had_bond_char = None, False
            if num in ring_open:
                start, open_order = ring_open.pop(num)
                if start == prev:
                    raise SmilesSyntaxError(f"ring bond {num} closes onto itself")
                if open_order is not None and order is not None and open_order != order:
                    raise SmilesSyntaxError(f"conflicting orders on ring bond {num}")
                bonds.append((start, prev, open_order if order is None else order))
            else:
                ring_open[num] = (prev, order)
            continue

        if ch == "[":
            end = text.find("]", i)
            if end < 0:
                raise SmilesSyntaxError("unterminated '['")
            atom = _parse_bracket(text[i + 1 : end])
            i = end + 1
        else:
            atom, i = _parse_bare_atom(text, i)

        idx = len(pending)
        pending.append(atom)
        if prev is not None:
            bonds.append((prev, idx, pending_order))
        pending_order, had_bond_char = None, False
        prev = idx

    if branch_stack:
        raise SmilesSyntaxError("unbalanced '('")
    if ring_open:
        raise SmilesSyntaxError(f"unclosed ring closures: {sorted(ring_open)}")
    if had_bond_char:
        raise SmilesSyntaxError("dangling bond symbol at end")
    if not pending:
        raise SmilesSyntaxError("no atoms found")

    return _finish(mol, pending, bonds)


def _parse_bare_atom(text: str, i: int) -> tuple[_PendingAtom, int]:
    for sym in _TWO_LETTER:
        if text.startswith(sym, i):
            return _PendingAtom(sym, aromatic=False), i + len(sym)
    ch = text[i]
    if ch.isupper():
        if ch not in SUPPORTED_ELEMENTS or ch == "H":
            raise SmilesSyntaxError(f"unknown element {ch!r} at position {i}")
        return _PendingAtom(ch, aromatic=False), i + 1
    if ch.islower():
        el = ch.upper()
        if el not in AROMATIC_ELEMENTS:
            raise SmilesSyntaxError(f"unknown aromatic atom {ch!r} at position {i}")
        return _PendingAtom(el, aromatic=True), i + 1
    raise SmilesSyntaxError(f"unexpected character {ch!r} at position {i}")


def _parse_bracket(body: str) -> _PendingAtom:
    if not body:
        raise SmilesSyntaxError("empty bracket atom")
    if body[0].isdigit():
        raise SmilesSyntaxError("isotope labels are not supported")
    j = 0
    # element symbol: try two letters, then one
    el, aromatic = None, False
    if body[:2] in _TWO_LETTER:
        el, j = body[:2], 2
    elif body[0].isupper():
        el, j = body[0], 1
    elif body[0].islower():
        cand = body[0].upper()
        if cand in AROMATIC_ELEMENTS:
            el, aromatic, j = cand, True, 1
    if el is None or el not in SUPPORTED_ELEMENTS:
        raise SmilesSyntaxError(f"unknown element in bracket atom [{body}]")

    h_count = 0
    charge = 0
    while j < len(body):
        c = body[j]
        if c == "@":
            j += 1  # chirality discarded
            continue
        if c == "H":
            j += 1
            digits = ""
            while j < len(body) and body[j].isdigit():
                digits += body[j]
                j += 1
            h_count = int(digits) if digits else 1
            continue
        if c in "+-":
            sign = 1 if c == "+" else -1
            j += 1
            if j < len(body) and body[j].isdigit():
                digits = ""
                while j < len(body) and body[j].isdigit():
                    digits += body[j]
                    j += 1
                charge = sign * int(digits)
            else:
                charge = sign
                while j < len(body) and body[j] == c:
                    charge += sign
                    j += 1
            if abs(charge) > 4:
                raise SmilesSyntaxError(f"bad charge token in [{body}]")
            continue
        if c == ":":
            raise SmilesSyntaxError("atom-map classes are not supported")
        raise SmilesSyntaxError(f"bad token {c!r} in bracket atom [{body}]")
    return _PendingAtom(el, aromatic, charge, h_count, bracket=True)


def _finish(mol: Molecule, pending: list[_PendingAtom], raw_bonds) -> Molecule:
    # Bracket atoms carry their hydrogen count up front: aromaticity typing
    # (pyrrole vs pyridine nitrogen) depends on it. Bare atoms fill later.
    for i, p in enumerate(pending):
        mol.atoms.append(
            Atom(
                index=i,
                element=p.element,
                formal_charge=p.charge,
                aromatic=p.aromatic,
                implicit_h=(p.h_count or 0) if p.bracket else 0,
            )
        )

    seen: set[tuple[int, int]] = set()
    candidates: set[tuple[int, int]] = set()
    for a, b, order in raw_bonds:
        key = (a, b) if a < b else (b, a)
        if key in seen:
            raise SmilesSyntaxError(f"duplicate bond between atoms {key}")
        seen.add(key)
        if order is None:
            if pending[a].aromatic and pending[b].aromatic:
                order = SINGLE  # promoted to aromatic once a ring confirms it
                candidates.add(key)
            else:
                order = SINGLE
        elif order == AROMATIC and not (pending[a].aromatic and pending[b].aromatic):
            raise SmilesSyntaxError(f"':' bond between non-aromatic atoms {key}")
        mol.bonds.append(Bond(a=a, b=b, order=order))

    mol.rings = ring_mod.perceive_rings(mol)
    ring_mod.mark_ring_membership(mol)
    ring_mod.resolve_aromaticity(mol, candidates)

    _fill_implicit_hydrogens(mol, pending)
    ring_mod.aromatize_kekule(mol)
    ring_mod.validate_aromatic_atoms(mol)

    report = check_valence(mol)
    if not report.ok:
        idx, why = report.failures[0]
        raise ValenceError(f"atom {idx}: {why} in {mol.source_text!r}")
    return mol


def _fill_implicit_hydrogens(mol: Molecule, pending: list[_PendingAtom]) -> None:
    for i, p in enumerate(pending):
        if not p.bracket:
            mol.atoms[i].implicit_h = infer_hydrogens(mol, i)


def infer_hydrogens(mol: Molecule, idx: int) -> int:
    """Hydrogens a bare-SMILES reader assigns to this atom.

    A reader sees no hydrogen count, so pyrrole-type nitrogen ([nH]) is
    judged pyridine-type here; the canonical writer relies on the mismatch
    to know when brackets are required.
    """
    atom = mol.atoms[idx]
    if atom.aromatic:
        sigma = 0
        for b in mol.bonds_of(idx):
            sigma += 1 if b.order == AROMATIC else b.order
        pi = 1 if _reader_pi(mol, idx) == 1 else 0
        base = min(ALLOWED_VALENCES[atom.element])
        return max(0, base - sigma - pi)
    total = 0
    for b in mol.bonds_of(idx):
        total += 1 if b.order == AROMATIC else b.order
    for v in ALLOWED_VALENCES[atom.element]:
        if v >= total:
            return v - total
    raise ValenceError(
        f"atom {idx} ({atom.element}) bond order sum {total} exceeds allowed valence"
    )


def _reader_pi(mol: Molecule, idx: int) -> int:
    """aromatic_pi_electrons as seen before any hydrogen filling."""
    atom = mol.atoms[idx]
    for b in mol.bonds_of(idx):
        if b.order == DOUBLE and not mol.atoms[b.other(idx)].aromatic:
            return 0
    el, q = atom.element, atom.formal_charge
    if el == "C":
        return 2 if q == -1 else (0 if q == 1 else 1)
    if el in ("N", "P"):
        return 2 if mol.degree(idx) >= 3 else 1
    if el in ("O", "S"):
        return 1 if q == 1 else 2
    if el == "B":
        return 0
    return 1
