"""Seeded random streams.

One global seed fans out into named substreams ("init", "reparam",
"sample", "shuffle") by hashing the stream name, so subsystems draw
independently but reproducibly.
"""

from __future__ import annotations

import numpy as np

from ..chem.fingerprint import hash_name

STREAM_NAMES = ("init", "reparam", "sample", "shuffle")


def substream(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed & 0xFFFFFFFF, hash_name(name) & 0xFFFFFFFF]))


class RngBundle:
    """Named substreams with bit-exact state capture for checkpointing."""

    def __init__(self, seed: int, names=STREAM_NAMES):
        self.seed = seed
        self.streams = {name: substream(seed, name) for name in names}

    def __getitem__(self, name: str) -> np.random.Generator:
        return self.streams[name]

    def state(self) -> dict:
        return {name: gen.bit_generator.state for name, gen in self.streams.items()}

    def set_state(self, state: dict) -> None:
        for name, s in state.items():
            self.streams[name].bit_generator.state = s
