"""Molecular parsing, perception, descriptors, scaffolds and fingerprints."""

from .mol import (
    AROMATIC,
    DOUBLE,
    SINGLE,
    TRIPLE,
    Atom,
    AromaticityError,
    Bond,
    ChemError,
    Molecule,
    SmilesSyntaxError,
    ValenceError,
    ValenceReport,
    check_valence,
)
from .smiles import parse_smiles
from .canon import canonical_ranks, write_canonical_smiles
from .rings import perceive_rings
from .descriptors import Descriptors, compute_descriptors
from .scaffold import murcko_scaffold
from .fingerprint import Fingerprint, circular_fingerprint, tanimoto

__all__ = [
    "AROMATIC",
    "DOUBLE",
    "SINGLE",
    "TRIPLE",
    "Atom",
    "AromaticityError",
    "Bond",
    "ChemError",
    "Descriptors",
    "Fingerprint",
    "Molecule",
    "SmilesSyntaxError",
    "ValenceError",
    "ValenceReport",
    "canonical_ranks",
    "check_valence",
    "circular_fingerprint",
    "compute_descriptors",
    "murcko_scaffold",
    "parse_smiles",
    "perceive_rings",
    "tanimoto",
    "write_canonical_smiles",
]


def read_smiles_file(path) -> list[str]:
    """SMILES corpus file: one molecule per line, UTF-8, '#' comments ignored."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                out.append(line)
    return out
