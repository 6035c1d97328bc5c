"""Backoff trigram language model.

Covers ARPA parsing/serialization, Katz-style backoff scoring, slot
scoring for cloze fillers, the distractor-rank feature, and a fallback
interpolated trainer for when no pretrained ARPA model is available.

All probabilities are log10.  Sentences are padded with two ``<s>``
symbols and one ``</s>`` so every scored position is trigram-shaped.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

from .corpus import MaskedSentence, SentenceStore
from .errors import IntegrityError, ParseError, TruncationError

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

# score for an unknown word when the model has no <unk> entry
UNKNOWN_FLOOR = -7.0
# stand-in for log10(0) in serialized models, following ARPA convention
LOG_ZERO = -99.0


@dataclass
class TrigramLM:
    # word -> (logprob, backoff); backoff weights are log10 too
    unigrams: dict[str, tuple[float, float]] = field(default_factory=dict)
    bigrams: dict[tuple[str, str], tuple[float, float]] = field(default_factory=dict)
    trigrams: dict[tuple[str, str, str], float] = field(default_factory=dict)

    @property
    def vocab(self) -> set[str]:
        return set(self.unigrams)

    @property
    def has_unk(self) -> bool:
        return UNK in self.unigrams

    def counts(self) -> tuple[int, int, int]:
        return len(self.unigrams), len(self.bigrams), len(self.trigrams)


def _map_unk(lm: TrigramLM, word: str) -> str:
    if word in lm.unigrams:
        return word
    return UNK if lm.has_unk else word


def score_word(lm: TrigramLM, w3: str, history: tuple[str, str]) -> float:
    """log10 P(w3 | w1, w2) with backoff to lower orders.

    Total: unknown words fall back to <unk> when the model has one, or to
    the UNKNOWN_FLOOR constant otherwise.
    """
    w1 = _map_unk(lm, history[0])
    w2 = _map_unk(lm, history[1])
    w3 = _map_unk(lm, w3)

    tri = lm.trigrams.get((w1, w2, w3))
    if tri is not None:
        return tri
    bow12 = lm.bigrams.get((w1, w2), (0.0, 0.0))[1]

    bi = lm.bigrams.get((w2, w3))
    if bi is not None:
        return bow12 + bi[0]
    bow2 = lm.unigrams.get(w2, (0.0, 0.0))[1]

    uni = lm.unigrams.get(w3)
    if uni is not None:
        return bow12 + bow2 + uni[0]
    return bow12 + bow2 + UNKNOWN_FLOOR


def _padded(forms) -> list[str]:
    return [BOS, BOS, *forms, EOS]


def score_sentence(lm: TrigramLM, forms) -> float:
    """Full-sentence log10 probability including the </s> transition."""
    seq = _padded(forms)
    return sum(score_word(lm, seq[i], (seq[i - 2], seq[i - 1]))
               for i in range(2, len(seq)))


def slot_scores(lm: TrigramLM, masked: MaskedSentence, fillers) -> dict[str, float]:
    """Per-filler sum of the trigram terms whose window covers the slot.

    Only positions slot .. slot+2 of the padded sequence change with the
    filler, so summing those ranks fillers identically to full-sentence
    scoring at a fraction of the cost.
    """
    fillers = list(fillers)
    if not fillers:
        raise ValueError("empty filler list")
    scores = {}
    for filler in fillers:
        seq = _padded(masked.filled(filler))
        lo = masked.slot_index + 2
        hi = min(lo + 2, len(seq) - 1)
        scores[filler] = sum(score_word(lm, seq[i], (seq[i - 2], seq[i - 1]))
                             for i in range(lo, hi + 1))
    return scores


def lm_rank_feature(lm: TrigramLM, masked: MaskedSentence, target: str,
                    distractors) -> float:
    """Proportion of distractors the LM scores strictly above the target."""
    distractors = list(distractors)
    if not distractors:
        raise ValueError("empty distractor list")
    scores = slot_scores(lm, masked, [target] + distractors)
    target_score = scores[target]
    above = sum(1 for d in distractors if scores[d] > target_score)
    return above / len(distractors)


# --- ARPA format ------------------------------------------------------------

def parse_arpa(stream) -> TrigramLM:
    """Parse an ARPA file (orders 1-3) into a TrigramLM."""
    lines = iter(enumerate(stream, start=1))
    declared: dict[int, int] = {}

    for line_no, raw in lines:
        if raw.strip() == "\\data\\":
            break
    else:
        raise TruncationError("no \\data\\ header found")

    for line_no, raw in lines:
        line = raw.strip()
        if not line:
            continue
        if line.startswith("\\"):
            break
        if not line.startswith("ngram "):
            raise ParseError(f"unexpected line in \\data\\ section: {line!r}", line_no)
        spec_part = line[len("ngram "):]
        try:
            order_s, count_s = spec_part.split("=")
            declared[int(order_s)] = int(count_s)
        except ValueError:
            raise ParseError(f"bad ngram count line {line!r}", line_no) from None
    else:
        raise TruncationError("file ended inside the \\data\\ section")

    lm = TrigramLM()
    tables = {1: {}, 2: {}, 3: {}}
    ended = False
    # `line` currently holds a section marker
    while True:
        if line == "\\end\\":
            ended = True
            break
        if not (line.startswith("\\") and line.endswith("-grams:")):
            raise ParseError(f"expected a section marker, got {line!r}", line_no)
        try:
            order = int(line[1:-len("-grams:")])
        except ValueError:
            raise ParseError(f"bad section marker {line!r}", line_no) from None
        if order not in (1, 2, 3):
            raise ParseError(f"unsupported n-gram order {order}", line_no)

        for line_no, raw in lines:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("\\"):
                break
            fields = line.split("\t")
            if len(fields) not in (2, 3):
                raise ParseError(f"expected logprob<TAB>words[<TAB>backoff], got {line!r}",
                                 line_no)
            try:
                logprob = float(fields[0])
            except ValueError:
                raise ParseError(f"bad log probability {fields[0]!r}", line_no) from None
            words = tuple(fields[1].split())
            if len(words) != order:
                raise ParseError(f"{len(words)}-gram in \\{order}-grams: section", line_no)
            backoff = 0.0
            if len(fields) == 3:
                try:
                    backoff = float(fields[2])
                except ValueError:
                    raise ParseError(f"bad backoff weight {fields[2]!r}", line_no) from None
            tables[order][words] = (logprob, backoff)
        else:
            break

    if not ended:
        raise TruncationError("missing \\end\\ marker")

    for order, count in declared.items():
        if order not in (1, 2, 3):
            raise IntegrityError(f"declared order {order} unsupported")
        if len(tables[order]) != count:
            raise IntegrityError(f"header declares {count} {order}-grams, "
                                 f"file has {len(tables[order])}")
    for order in (1, 2, 3):
        if tables[order] and order not in declared:
            raise IntegrityError(f"undeclared \\{order}-grams: section")

    lm.unigrams = {w[0]: v for w, v in tables[1].items()}
    lm.bigrams = dict(tables[2])
    lm.trigrams = {k: v[0] for k, v in tables[3].items()}
    return lm


def serialize_arpa(lm: TrigramLM) -> str:
    """Write the model in ARPA text form (6 decimal places)."""
    out = ["\\data\\"]
    n1, n2, n3 = lm.counts()
    out.append(f"ngram 1={n1}")
    if n2 or n3:
        out.append(f"ngram 2={n2}")
    if n3:
        out.append(f"ngram 3={n3}")
    out.append("")
    out.append("\\1-grams:")
    for w in sorted(lm.unigrams):
        logprob, backoff = lm.unigrams[w]
        out.append(f"{logprob:.6f}\t{w}\t{backoff:.6f}")
    if n2 or n3:
        out.append("")
        out.append("\\2-grams:")
        for key in sorted(lm.bigrams):
            logprob, backoff = lm.bigrams[key]
            out.append(f"{logprob:.6f}\t{' '.join(key)}\t{backoff:.6f}")
    if n3:
        out.append("")
        out.append("\\3-grams:")
        for key in sorted(lm.trigrams):
            out.append(f"{lm.trigrams[key]:.6f}\t{' '.join(key)}")
    out.append("")
    out.append("\\end\\")
    return "\n".join(out) + "\n"


# --- fallback trainer -------------------------------------------------------

def _log10_or_floor(p: float) -> float:
    return math.log10(p) if p > 0.0 else LOG_ZERO


def train_trigram(store: SentenceStore, lambdas: tuple[float, float, float] = (0.1, 0.3, 0.6),
                  add_k: float = 0.0) -> TrigramLM:
    """Interpolated trigram model from a sentence store.

    P(c|a,b) = l3*ML3 + l2*ML2 + l1*ML1 with add-k smoothing on the
    unigram term.  The interpolation is pre-applied to every stored
    n-gram, so exporting with all backoff weights at zero reproduces the
    model exactly under backoff scoring.
    """
    l1, l2, l3 = lambdas
    if min(lambdas) < 0 or abs(l1 + l2 + l3 - 1.0) > 1e-9:
        raise ValueError("lambdas must be nonnegative and sum to 1")
    if len(store) == 0:
        raise ValueError("empty corpus")

    c3: Counter = Counter()
    ctx3: Counter = Counter()
    c2: Counter = Counter()
    ctx2: Counter = Counter()
    c1: Counter = Counter()
    total = 0
    for sent in store.sentences:
        seq = _padded(sent.forms)
        for i in range(2, len(seq)):
            a, b, c = seq[i - 2], seq[i - 1], seq[i]
            c3[(a, b, c)] += 1
            ctx3[(a, b)] += 1
            c2[(b, c)] += 1
            ctx2[b] += 1
            c1[c] += 1
            total += 1

    vocab = sorted(c1)
    denom1 = total + add_k * len(vocab)

    def p_uni(c):
        return (c1[c] + add_k) / denom1

    def p_bi(b, c):
        return c2[(b, c)] / ctx2[b] if ctx2[b] else 0.0

    lm = TrigramLM()
    for w in vocab:
        lm.unigrams[w] = (_log10_or_floor(l1 * p_uni(w)), 0.0)
    lm.unigrams[BOS] = (LOG_ZERO, 0.0)  # history-only symbol
    if add_k > 0.0:
        lm.unigrams[UNK] = (_log10_or_floor(l1 * add_k / denom1), 0.0)
    for (b, c), n in c2.items():
        lm.bigrams[(b, c)] = (_log10_or_floor(l2 * p_bi(b, c) + l1 * p_uni(c)), 0.0)
    for (a, b, c), n in c3.items():
        p = l3 * n / ctx3[(a, b)] + l2 * p_bi(b, c) + l1 * p_uni(c)
        lm.trigrams[(a, b, c)] = _log10_or_floor(p)
    return lm
