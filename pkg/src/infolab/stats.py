"""Rank statistics shared by evaluation and annotation agreement.

Spearman's rho with average ranks on ties, a seeded two-sided permutation
test for its p-value, and the unweighted accuracy mean.  The permutation
test is used instead of the t-approximation because the word samples here
are small (tens of items).
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .rng import Lcg64


class SpearmanResult(NamedTuple):
    rho: float
    degenerate: bool  # a constant input made the correlation undefined


def rank_with_ties(values: Sequence[float]) -> np.ndarray:
    """1-based ranks; tied values share the average of their positions."""
    a = np.asarray(values, dtype=float)
    order = np.argsort(a, kind="stable")
    ranks = np.empty(len(a), dtype=float)
    i = 0
    while i < len(a):
        j = i
        while j + 1 < len(a) and a[order[j + 1]] == a[order[i]]:
            j += 1
        avg = (i + j) / 2.0 + 1.0
        ranks[order[i:j + 1]] = avg
        i = j + 1
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> SpearmanResult:
    """Spearman's rho: Pearson correlation of the two rank vectors."""
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise ValueError("need at least 2 pairs")
    rx = rank_with_ties(x)
    ry = rank_with_ties(y)
    rxc = rx - rx.mean()
    ryc = ry - ry.mean()
    sx = float(np.dot(rxc, rxc))
    sy = float(np.dot(ryc, ryc))
    if sx == 0.0 or sy == 0.0:
        return SpearmanResult(0.0, True)
    rho = float(np.dot(rxc, ryc)) / float(np.sqrt(sx * sy))
    return SpearmanResult(rho, False)


def spearman_pvalue(x: Sequence[float], y: Sequence[float],
                    permutations: int = 10000, seed: int = 0) -> float:
    """Two-sided permutation p-value for Spearman's rho, +1 smoothed.

    Counts seeded permutations of y whose |rho| reaches the observed
    |rho|; the +1 in numerator and denominator keeps the estimate off 0.
    """
    if len(x) < 3:
        raise ValueError("need at least 3 pairs for a permutation test")
    observed = spearman(x, y).rho
    rxc = rank_with_ties(x)
    rxc = rxc - rxc.mean()
    ryc = rank_with_ties(y)
    ryc = ryc - ryc.mean()
    denom = float(np.sqrt(np.dot(rxc, rxc) * np.dot(ryc, ryc)))
    if denom == 0.0:
        return 1.0
    # permuting y permutes its ranks, so shuffle the centered rank vector
    perm = list(ryc)
    rng = Lcg64(seed)
    threshold = abs(observed) - 1e-12
    hits = 0
    for _ in range(permutations):
        rng.shuffle(perm)
        rho = float(np.dot(rxc, perm)) / denom
        if abs(rho) >= threshold:
            hits += 1
    return (1 + hits) / (1 + permutations)


def mean_accuracy(per_word: dict[str, float]) -> float:
    """Unweighted mean of per-word accuracies."""
    if not per_word:
        raise ValueError("empty accuracy map")
    return sum(per_word.values()) / len(per_word)
