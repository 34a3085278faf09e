"""Hashed circular substructure fingerprints.

Environments are hashed with the splitmix64 finalizer under a fixed seed,
so fingerprints are bit-exact across platforms. Bit i lives at byte i // 8,
bit position i % 8 (LSB first) in the binary layout.
"""

from __future__ import annotations

from dataclasses import dataclass

from .mol import AROMATIC, Molecule, SUPPORTED_ELEMENTS

_MASK = (1 << 64) - 1
FP_SEED = 0xA24BAED4963EE407


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    z = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return (z ^ (z >> 31)) & _MASK


def _combine(h: int, value: int) -> int:
    return splitmix64(h ^ (value & _MASK))


def hash_name(name: str, seed: int = FP_SEED) -> int:
    """Stable 64-bit hash of a short string; also used to derive RNG substreams."""
    h = seed
    for byte in name.encode("utf-8"):
        h = _combine(h, byte)
    return h


@dataclass
class Fingerprint:
    bits: int
    nbits: int
    radius: int

    def popcount(self) -> int:
        return self.bits.bit_count()

    def get(self, i: int) -> bool:
        return bool((self.bits >> i) & 1)

    def on_bits(self) -> list[int]:
        return [i for i in range(self.nbits) if (self.bits >> i) & 1]

    def to_bytes(self) -> bytes:
        return self.bits.to_bytes(self.nbits // 8, "little")

    def to_array(self):
        import numpy as np

        raw = np.frombuffer(self.to_bytes(), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little").astype(np.float64)


def circular_fingerprint(mol: Molecule, radius: int = 2, nbits: int = 2048) -> Fingerprint:
    if nbits <= 0 or nbits & (nbits - 1):
        raise ValueError(f"nbits must be a power of two, got {nbits}")
    ring_member = [False] * len(mol.atoms)
    for ring in mol.rings:
        for i in ring:
            ring_member[i] = True

    env = []
    for a in mol.atoms:
        h = FP_SEED
        h = _combine(h, SUPPORTED_ELEMENTS.index(a.element))
        h = _combine(h, mol.degree(a.index))
        h = _combine(h, a.formal_charge + 8)
        h = _combine(h, a.implicit_h)
        h = _combine(h, int(a.aromatic))
        h = _combine(h, int(ring_member[a.index]))
        env.append(h)

    neigh = [[] for _ in range(len(mol.atoms))]
    for b in mol.bonds:
        neigh[b.a].append((b.order, b.b))
        neigh[b.b].append((b.order, b.a))

    seen = set(env)
    for r in range(1, radius + 1):
        nxt = []
        for i in range(len(mol.atoms)):
            h = _combine(FP_SEED, r)
            h = _combine(h, env[i])
            for order, nh in sorted((o, env[j]) for o, j in neigh[i]):
                h = _combine(h, order)
                h = _combine(h, nh)
            nxt.append(h)
        env = nxt
        seen.update(env)

    bits = 0
    for h in seen:
        bits |= 1 << (h % nbits)
    return Fingerprint(bits=bits, nbits=nbits, radius=radius)


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    if a.nbits != b.nbits:
        raise ValueError("fingerprint lengths differ")
    union = (a.bits | b.bits).bit_count()
    if union == 0:
        return 1.0
    return (a.bits & b.bits).bit_count() / union
