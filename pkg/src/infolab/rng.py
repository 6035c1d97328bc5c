"""Deterministic random number generation.

Every randomized step in the package draws from this 64-bit linear
congruential generator so that runs are reproducible across platforms and
Python versions.  Constants are Knuth's MMIX parameters:

    state' = (6364136223846793005 * state + 1442695040888963407) mod 2^64

Draws use the upper 33 bits of the state, which are the best-behaved bits
of an LCG.  `shuffle` is a Fisher-Yates pass from the back of the list,
with the swap index drawn as ``next_below(i + 1)``.
"""

from __future__ import annotations

_A = 6364136223846793005
_C = 1442695040888963407
_MASK = (1 << 64) - 1


class Lcg64:
    """Seeded generator; one instance per reproducible job."""

    def __init__(self, seed: int):
        self.state = (seed ^ 0x9E3779B97F4A7C15) & _MASK
        # warm-up step so that small seeds do not leak into the first draw
        self._next()

    def _next(self) -> int:
        self.state = (_A * self.state + _C) & _MASK
        return self.state

    def next_u31(self) -> int:
        return self._next() >> 33

    def next_below(self, n: int) -> int:
        """Integer in [0, n)."""
        if n <= 0:
            raise ValueError("n must be positive")
        return self.next_u31() % n

    def next_float(self) -> float:
        """Float in [0, 1)."""
        return self.next_u31() / float(1 << 31)

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.next_float()

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.next_below(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample(self, items, k: int) -> list:
        """k items without replacement, order given by the shuffle."""
        if k > len(items):
            raise ValueError(f"cannot sample {k} from {len(items)} items")
        pool = list(items)
        self.shuffle(pool)
        return pool[:k]


def fnv1a64(data: bytes, seed: int = 0) -> int:
    """64-bit FNV-1a hash, optionally perturbed by a seed."""
    h = 0xCBF29CE484222325 ^ (seed & _MASK)
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & _MASK
    return h


def derive_seed(seed: int, *labels: str) -> int:
    """Stable per-label sub-seed, e.g. one per (word, regime) job."""
    h = seed & _MASK
    for label in labels:
        h = fnv1a64(label.encode("utf-8"), h)
    return h
