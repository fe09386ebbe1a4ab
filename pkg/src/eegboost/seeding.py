"""Deterministic seed derivation and a frozen shuffle generator.

Reproducibility across library versions matters more than generator
quality here, so the split shuffle uses a self-contained splitmix64
stream instead of delegating to numpy. Sub-seeds for the individual
pipeline stages are derived from one base seed by hashing a stage
label, so changing one stage's seed never perturbs another stage.
"""

from __future__ import annotations

import hashlib

_MASK64 = 0xFFFFFFFFFFFFFFFF


def derive_seed(base_seed: int, *labels: object) -> int:
    """Derive a 64-bit sub-seed from a base seed and a label path."""
    text = ":".join([str(int(base_seed) & _MASK64)] + [str(item) for item in labels])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


class SplitMix64:
    """Tiny 64-bit PRNG with a fixed-forever output stream."""

    def __init__(self, seed: int):
        self._state = int(seed) & _MASK64

    def next_uint64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def next_below(self, bound: int) -> int:
        """Uniform integer in [0, bound). Modulo bias is below bound/2**64."""
        return self.next_uint64() % bound


def shuffled_indices(n: int, seed: int) -> list[int]:
    """Fisher-Yates shuffle of range(n) driven by a splitmix64 stream."""
    rng = SplitMix64(seed)
    order = list(range(n))
    for i in range(n - 1, 0, -1):
        j = rng.next_below(i + 1)
        order[i], order[j] = order[j], order[i]
    return order
