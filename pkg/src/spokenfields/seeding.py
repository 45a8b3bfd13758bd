"""Deterministic seed fan-out.

Every random decision in the package flows from one global seed. Sub-seeds
are derived per (seed, label) so changing the RNG consumption of one stage
never perturbs another stage's stream.
"""

from __future__ import annotations

import hashlib
import random


def derive_seed(seed: int, *labels: object) -> int:
    """Derive a stable 64-bit sub-seed from a base seed and a label path."""
    h = hashlib.sha256()
    h.update(str(int(seed)).encode("utf-8"))
    for label in labels:
        h.update(b"\x1f")
        h.update(str(label).encode("utf-8"))
    return int.from_bytes(h.digest()[:8], "big")


def rng_for(seed: int, *labels: object) -> random.Random:
    """A private RNG for one stage, derived from the global seed."""
    return random.Random(derive_seed(seed, *labels))
