"""Counter-based seed derivation.

Every random draw in an experiment is keyed by the master seed plus the
names of the cell it belongs to, so execution order and worker count never
change which numbers a cell sees.
"""

import hashlib

import numpy as np


def _key_to_int(part: str | int) -> int:
    if isinstance(part, int):
        return part & 0xFFFFFFFF
    digest = hashlib.blake2b(part.encode("utf-8"), digest_size=4).digest()
    return int.from_bytes(digest, "little")


def derive_seed(master: int, *parts: str | int) -> int:
    """Mix a master seed with string/int keys into a 64-bit seed."""
    entropy = [master & 0xFFFFFFFFFFFFFFFF, *(_key_to_int(p) for p in parts)]
    state = np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


def derive_rng(master: int, *parts: str | int) -> np.random.Generator:
    """Generator seeded with derive_seed(master, *parts)."""
    return np.random.default_rng(derive_seed(master, *parts))
