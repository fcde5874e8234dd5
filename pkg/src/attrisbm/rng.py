"""Deterministic randomness.

All sampling in the package flows through numpy PCG64 generators derived
from a single 64-bit master seed. Each operation draws from its own stream
(``SeedSequence(seed, spawn_key=(stream_id,))``), so e.g. community labels
and edges of the same graph are independently reproducible.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

# Stream ids, one per randomized operation.
STREAM_COMMUNITIES = 1
STREAM_EDGES = 2
STREAM_BP_INIT = 3
STREAM_BP_SCHEDULE = 4
STREAM_BRANCHING = 5


@dataclass(frozen=True)
class RngSeed:
    """64-bit master seed; identical seeds give bit-identical draws per stream."""

    seed: int

    def __post_init__(self):
        s = int(self.seed)
        if not 0 <= s < 2**64:
            raise ValueError(f"seed must fit in 64 unsigned bits, got {self.seed}")
        object.__setattr__(self, "seed", s)

    def stream(self, stream_id: int) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(stream_id,))
        return np.random.Generator(np.random.PCG64(ss))


def as_seed(seed: RngSeed | int) -> RngSeed:
    return seed if isinstance(seed, RngSeed) else RngSeed(int(seed))


def cell_seed(master_seed: int, eta_index: int, epsilon_index: int, replicate: int) -> int:
    """Stable per-cell seed so any sweep cell can be re-run in isolation."""
    data = f"{master_seed}:{eta_index}:{epsilon_index}:{replicate}".encode()
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "big")
