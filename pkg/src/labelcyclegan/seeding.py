"""Deterministic seed derivation for every random stream in the pipeline.

Each consumer of randomness (corpus renderer, batch shuffles, weight init,
image pools, ...) gets its own child seed derived from a master seed and a
string label, so adding or removing one consumer never perturbs the others.
"""

import hashlib

import numpy as np

MAX_SEED = 2**63 - 1  # keep seeds inside torch's signed-int64 range


def derive_seed(master: int, *labels: object) -> int:
    """Derive a child seed from a master seed and a label path.

    Stable across processes and platforms (no reliance on hash()).
    """
    h = hashlib.sha256()
    h.update(str(int(master)).encode())
    for label in labels:
        h.update(b"/")
        h.update(str(label).encode())
    return int.from_bytes(h.digest()[:8], "little") % MAX_SEED


def new_rng(master: int, *labels: object) -> np.random.Generator:
    """A numpy Generator seeded from the derived child seed."""
    return np.random.default_rng(derive_seed(master, *labels))
