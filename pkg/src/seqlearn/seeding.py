"""Labelled seed derivation.

Every random stream in a run is derived from one master seed plus a label
and an index, so streams do not shift when work is split or reordered.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(master: int, label: str, index: int = 0) -> int:
    h = hashlib.blake2b(f"{int(master)}|{label}|{int(index)}".encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little")


def derive_rng(master: int, label: str, index: int = 0) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master, label, index))


def as_master_seed(rng_or_seed: "np.random.Generator | int | None") -> int:
    """Collapse a generator or an int into a master seed for labelled derivation."""
    if rng_or_seed is None:
        return 0
    if isinstance(rng_or_seed, np.random.Generator):
        return int(rng_or_seed.integers(0, 2**63 - 1))
    return int(rng_or_seed)
