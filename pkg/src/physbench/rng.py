"""Keyed, counter-based random number generation.

Every stochastic component in the benchmark derives its generator from a
string key instead of sharing a global stream, so results never depend on
call order and any piece can be recomputed in isolation.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_key(*parts: object) -> np.ndarray:
    """Hash arbitrary labels into a 2-word Philox key."""
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return np.frombuffer(digest[:16], dtype=np.uint64).copy()


def keyed_rng(*parts: object) -> np.random.Generator:
    """Deterministic generator for a namespaced key.

    Same parts -> identical stream, on any platform, regardless of how many
    other generators were used before this call.
    """
    return np.random.Generator(np.random.Philox(key=derive_key(*parts)))
