"""Distractor selection for a target word.

Candidates are words that fill the same slot as the target in any
retained n-gram of the same order, with matching POS.  Candidates that
are lexically related to the target, rarer than it, or of unknown
frequency are filtered out, and 10 of the survivors are drawn with the
seeded sampler.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InsufficientDataError
from .resources import FreqTable, NgramTable, RelationSet
from .rng import Lcg64

REASON_RELATION = "relation"
REASON_FREQUENCY = "frequency"
REASON_NO_FREQUENCY = "no-frequency"


class InsufficientCandidatesError(InsufficientDataError):
    def __init__(self, target, survivors: int, k: int):
        super().__init__(f"only {survivors} candidates survive filtering for "
                         f"{target[0]}/{target[1]}, need {k}")
        self.survivors = survivors


@dataclass(frozen=True)
class DistractorSet:
    target: tuple[str, str]  # (lemma, pos)
    distractors: tuple[str, ...]
    candidate_pool_size: int
    seed: int
    filter_log: dict[str, str] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(set(self.distractors)) != len(self.distractors):
            raise ValueError("distractors must be unique")
        if self.target[0] in self.distractors:
            raise ValueError("target cannot be its own distractor")

    def to_dict(self, verbose: bool = False) -> dict:
        d = {
            "target": self.target[0],
            "pos": self.target[1],
            "distractors": list(self.distractors),
            "seed": self.seed,
            "pool_size": self.candidate_pool_size,
        }
        if verbose:
            d["filter_log"] = dict(self.filter_log)
        return d


def candidate_fillers(target: tuple[str, str], ngrams: NgramTable) -> set[str]:
    """Words occupying a target slot in any retained n-gram, POS-matched.

    A slot is an (order, position) pair at which the target occurs in some
    n-gram; every word with the target's POS at such a position in an
    n-gram of that order is a candidate, the target itself excluded.
    """
    lemma, pos = target
    lemma = lemma.lower()
    slots = set()
    for gram in ngrams.entries:
        for i, (form, gpos) in enumerate(gram):
            if form.lower() == lemma and gpos == pos:
                slots.add((len(gram), i))
    if not slots:
        return set()
    candidates = set()
    for gram in ngrams.entries:
        order = len(gram)
        for slot_order, i in slots:
            if order != slot_order:
                continue
            form, gpos = gram[i]
            if gpos == pos and form.lower() != lemma:
                candidates.add(form.lower())
    return candidates


def select_distractors(target: tuple[str, str], candidates: set[str],
                       relations: RelationSet, freqs: FreqTable,
                       k: int = 10, seed: int = 0) -> DistractorSet:
    """Filter candidates and draw k distractors with the seeded sampler.

    Rejects relatives of the target and anything rarer than it (absent
    frequency counts as rarer).  Survivors are sorted, shuffled with the
    seeded generator, and the first k taken.
    """
    lemma, pos = target
    lemma = lemma.lower()
    related = relations.related(lemma, pos)
    target_freq = freqs.get(lemma)
    if target_freq is None:
        target_freq = 0  # unseen target: any counted candidate passes

    filter_log: dict[str, str] = {}
    survivors = []
    for cand in sorted(candidates):
        if cand in related:
            filter_log[cand] = REASON_RELATION
            continue
        cand_freq = freqs.get(cand)
        if cand_freq is None:
            filter_log[cand] = REASON_NO_FREQUENCY
            continue
        if cand_freq < target_freq:
            filter_log[cand] = REASON_FREQUENCY
            continue
        survivors.append(cand)

    if len(survivors) < k:
        raise InsufficientCandidatesError(target, len(survivors), k)

    rng = Lcg64(seed)
    rng.shuffle(survivors)
    return DistractorSet(
        target=(lemma, pos),
        distractors=tuple(survivors[:k]),
        candidate_pool_size=len(candidates),
        seed=seed,
        filter_log=filter_log,
    )
