"""Counter-based random streams keyed by a seed plus a tuple of sub-keys.

All stochastic routines in the package pull their randomness from Philox
streams derived here. Each unit of work (one projection direction, one block
of trajectories, one experiment cell) owns a stream keyed by its identity, so
work units can execute in any order and on any number of workers without
changing a single output bit.
"""

from __future__ import annotations

import numpy as np


def _encode(part) -> int:
    """Map a sub-key (int or short string label) to a non-negative integer."""
    if isinstance(part, str):
        return int.from_bytes(part.encode("utf-8"), "little")
    value = int(part)
    if value < 0:
        raise ValueError(f"sub-keys must be non-negative, got {part!r}")
    return value


def seed_sequence(seed: int, *subkeys) -> np.random.SeedSequence:
    seed = int(seed)
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return np.random.SeedSequence(entropy=seed, spawn_key=tuple(_encode(k) for k in subkeys))


def substream(seed: int, *subkeys) -> np.random.Generator:
    """Independent generator for the work unit identified by (seed, subkeys)."""
    return np.random.Generator(np.random.Philox(seed_sequence(seed, *subkeys)))


def derive_seed(seed: int, *subkeys) -> int:
    """Stable 64-bit integer seed derived from (seed, subkeys)."""
    return int(seed_sequence(seed, *subkeys).generate_state(1, dtype=np.uint64)[0])
