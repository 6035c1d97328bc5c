"""Synthetic corpora with known structure, for sanity checks and demos.

Real corpora give no ground truth about what a classifier or a selection
regime should find.  These builders construct small worlds where the
right answer is forced:

* `separable_cloze_world` gives the target and its distractors disjoint
  context vocabularies, so every classifier family has a clean signal
  (token identity for the bag model, context direction for the vector
  models, n-gram history for the LM features).
* `coinflip_dataset` removes all signal; anything much above chance
  accuracy on it indicates leakage.
* `informativeness_pools` scores sentences so that high-probability ones
  carry contexts whose vectors point where the target's pretrained
  vector points, and low-probability ones carry unrelated contexts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classify import ClozeDataset, LabeledExample, build_dataset
from .corpus import MaskedSentence, Sentence, SentenceStore, Token
from .curate import ScoredSentence
from .distractors import DistractorSet
from .rng import Lcg64, derive_seed
from .vectors import VectorStore


def _word_token(form: str, pos: str = "OTHER") -> Token:
    return Token(form, form, pos, "-")


def _noisy(rng: Lcg64, base: np.ndarray, scale: float) -> np.ndarray:
    return base + np.array([rng.uniform(-scale, scale) for _ in base])


@dataclass
class ClozeWorld:
    store: SentenceStore
    target: tuple[str, str]
    distractor_set: DistractorSet
    vectors: VectorStore


def separable_cloze_world(n_pos: int = 60, n_per_distractor: int = 6,
                          n_distractors: int = 10, sent_len: int = 7,
                          context_vocab: int = 30, dim: int = 16,
                          seed: int = 0) -> ClozeWorld:
    """Corpus where target sentences and distractor sentences never share
    a context word.

    Target sentences draw context from the "alpha" vocabulary, whose
    vectors cluster at +e1; distractor sentences draw from "beta" at
    -e1.  The target word's own vector sits at +e1 and the distractors'
    at -e1, so context similarity separates the classes too.
    """
    target = ("blick", "NOUN")
    distractors = tuple(f"dax{i}" for i in range(n_distractors))
    alpha = [f"alpha{i}" for i in range(context_vocab)]
    beta = [f"beta{i}" for i in range(context_vocab)]

    rng = Lcg64(derive_seed(seed, "corpus"))
    sentences = []

    def emit(filler: str, vocab: list[str]):
        slot = rng.next_below(sent_len)
        tokens = tuple(_word_token(filler, "NOUN") if i == slot
                       else _word_token(vocab[rng.next_below(len(vocab))])
                       for i in range(sent_len))
        sentences.append(Sentence(tokens, "synth", f"s{len(sentences)}"))

    for _ in range(n_pos):
        emit(target[0], alpha)
    for d in distractors:
        for _ in range(n_per_distractor):
            emit(d, beta)

    vec_rng = Lcg64(derive_seed(seed, "vectors"))
    e1 = np.zeros(dim)
    e1[0] = 1.0
    vectors = {}
    for w in alpha + [target[0]]:
        vectors[w] = _noisy(vec_rng, e1, 0.1)
    for w in beta + list(distractors):
        vectors[w] = _noisy(vec_rng, -e1, 0.1)

    dset = DistractorSet(target, distractors, len(distractors), seed, {})
    return ClozeWorld(SentenceStore(sentences), target, dset,
                      VectorStore(dim, vectors))


def separable_dataset(world: ClozeWorld, n_pos: int, n_per_distractor: int,
                      seed: int = 0) -> ClozeDataset:
    return build_dataset(world.store, world.target, world.distractor_set,
                         n_pos, n_per_distractor, seed=seed)


def coinflip_dataset(n: int = 1000, vocab: int = 40, sent_len: int = 7,
                     seed: int = 0) -> ClozeDataset:
    """Examples whose labels are fair coin flips, independent of content."""
    rng = Lcg64(derive_seed(seed, "coin"))
    words = [f"w{i}" for i in range(vocab)]
    examples = []
    for _ in range(n):
        slot = rng.next_below(sent_len)
        tokens = tuple("TARGET" if i == slot
                       else words[rng.next_below(vocab)]
                       for i in range(sent_len))
        label = rng.next_below(2) == 1
        examples.append(LabeledExample(MaskedSentence(tokens, slot, "w0"),
                                       label, "w0" if label else "w1"))
    n_test = n // 5
    dset = DistractorSet(("w0", "NOUN"), tuple(f"d{i}" for i in range(10)),
                         10, seed, {})
    return ClozeDataset(("w0", "NOUN"), dset, tuple(examples[:-n_test]),
                        (), tuple(examples[-n_test:]), seed)


def informativeness_pools(n_words: int = 3, pool: int = 120,
                          informative_frac: float = 0.5, sent_len: int = 6,
                          topic_vocab: int = 20, noise_vocab: int = 60,
                          dim: int = 12, seed: int = 0):
    """Scored pools plus a pretrained store for selection experiments.

    Each synthetic target word gets `pool` sentences: an informative
    fraction whose contexts are topic words (vectors near the target's)
    with probabilities in [0.7, 1], and the rest with unrelated contexts
    and probabilities in [0, 0.3].  Fine-tuning on the high-probability
    subset should therefore land nearer the pretrained target vector.

    Returns (pools, pretrained) with pools keyed by (lemma, pos).
    """
    pools = {}
    vectors = {}
    for w in range(n_words):
        lemma = f"targ{w}"
        rng = Lcg64(derive_seed(seed, "pool", lemma))
        base = np.zeros(dim)
        base[w % dim] = 1.0
        base[(w + 3) % dim] = 0.5
        vectors[lemma] = _noisy(rng, base, 0.05)
        topics = []
        for i in range(topic_vocab):
            name = f"{lemma}_top{i}"
            vectors[name] = _noisy(rng, base, 0.25)
            topics.append(name)
        noise = []
        for i in range(noise_vocab):
            name = f"{lemma}_rnd{i}"
            vectors[name] = np.array([rng.uniform(-1.0, 1.0) for _ in range(dim)])
            noise.append(name)

        scored = []
        n_inf = int(pool * informative_frac)
        for i in range(pool):
            informative = i < n_inf
            vocab = topics if informative else noise
            slot = rng.next_below(sent_len)
            tokens = tuple(
                _word_token(lemma, "NOUN") if j == slot
                else _word_token(vocab[rng.next_below(len(vocab))])
                for j in range(sent_len))
            sent = Sentence(tokens, lemma, f"s{i}")
            prob = (rng.uniform(0.7, 1.0) if informative
                    else rng.uniform(0.0, 0.3))
            scored.append(ScoredSentence(sent, slot, prob))
        pools[(lemma, "NOUN")] = scored
    return pools, VectorStore(dim, vectors)
