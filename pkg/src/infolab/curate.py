"""Sentence-selection experiments over classifier-scored pools.

Sentences containing a target word are scored by a trained classifier,
subsets are picked by probability regime (most probable, least, random,
and mixtures), the target is renamed to a fresh token, and skip-gram
embeddings are fine-tuned from the pretrained vectors on each subset.
The quality of a subset is the cosine between the fresh token's trained
vector and the target's original pretrained vector.
"""

from __future__ import annotations

import json
import math
import statistics
from bisect import bisect_right
from dataclasses import dataclass, field, replace

import numpy as np

from .corpus import Sentence, SentenceStore, Token
from .errors import DataError
from .resources import FreqTable
from .rng import Lcg64, derive_seed
from .stats import spearman, spearman_pvalue
from .vectors import VectorStore, cosine

# stand-in token a fine-tuned vector is learned for
RETARGET_TOKEN = "target_word_new"

SELECT_MODES = ("top", "bottom", "random", "top_plus_bottom", "random_plus_bottom")

# report columns, in output order, with their selection regimes
REGIME_COLUMNS = ("sim_inf", "sim_uninf", "sim_inf_uninf",
                  "sim_rand250", "sim_rand200", "sim_rand_uninf")


@dataclass(frozen=True)
class ScoredSentence:
    sentence: Sentence
    position: int  # index of the target token
    prob: float

    def __post_init__(self):
        if not (0 <= self.position < len(self.sentence)):
            raise ValueError("target position out of range")
        if not (math.isfinite(self.prob) and 0.0 <= self.prob <= 1.0):
            raise ValueError(f"probability {self.prob!r} outside [0, 1]")

    @property
    def key(self):
        # position included: a sentence can hold the target twice
        return (self.sentence.doc_id, self.sentence.sent_id, self.position)


@dataclass(frozen=True)
class SGNSParams:
    dim: int
    window: int = 5
    negatives: int = 5
    lr0: float = 0.025
    lr_min: float = 1e-4
    epochs: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.negatives < 1:
            raise ValueError("need at least one negative sample")


def write_pool(stream, scored) -> None:
    """Scored-sentence interchange: JSONL of doc/sent ids and the prob."""
    for s in scored:
        stream.write(json.dumps({
            "doc_id": s.sentence.doc_id, "sent_id": s.sentence.sent_id,
            "position": s.position, "prob": s.prob,
        }) + "\n")


def read_pool(stream, store: SentenceStore) -> list[ScoredSentence]:
    """Resolve a pool file against the corpus it was scored from."""
    by_id = {(s.doc_id, s.sent_id): s for s in store.sentences}
    out = []
    for line_no, raw in enumerate(stream, start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
            key = (obj["doc_id"], obj["sent_id"])
            position, prob = obj["position"], obj["prob"]
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"line {line_no}: bad pool record: {exc}") from None
        sent = by_id.get(key)
        if sent is None:
            raise DataError(f"line {line_no}: sentence {key} not in the corpus")
        try:
            out.append(ScoredSentence(sent, position, prob))
        except (TypeError, ValueError) as exc:
            raise DataError(f"line {line_no}: {exc}") from None
    return out


def select_sentences(scored, mode: str, n: int, m: int = 0,
                     seed: int = 0) -> list[ScoredSentence]:
    """Pick a probability-regime subset of the pool.

    Ties and the random draw are deterministic: the pool is ordered by
    (doc_id, sent_id) first.  Mixture modes return the union, so overlap
    between the random part and the bottom part can shrink the result.
    """
    pool = sorted(scored, key=lambda s: s.key)
    need = {"top": n, "bottom": n, "random": n,
            "top_plus_bottom": 2 * n, "random_plus_bottom": n + m}
    if mode not in need:
        raise ValueError(f"unknown selection mode {mode!r}")
    if len(pool) < need[mode]:
        raise ValueError(f"pool has {len(pool)} sentences, "
                         f"mode {mode} needs {need[mode]}")

    def top(k):
        return sorted(pool, key=lambda s: (-s.prob,) + s.key)[:k]

    def bottom(k):
        return sorted(pool, key=lambda s: (s.prob,) + s.key)[:k]

    if mode == "top":
        picked = top(n)
    elif mode == "bottom":
        picked = bottom(n)
    elif mode == "random":
        picked = Lcg64(seed).sample(pool, n)
    elif mode == "top_plus_bottom":
        picked = top(n) + bottom(n)
    else:
        chosen = {s.key: s for s in Lcg64(seed).sample(pool, n)}
        chosen.update({s.key: s for s in bottom(m)})
        picked = chosen.values()
    return sorted(picked, key=lambda s: s.key)


def retarget(selection, target: tuple[str, str]) -> list[Sentence]:
    """Rename the target token so a fresh vector can be learned for it."""
    lemma, pos = target
    out = []
    for s in selection:
        tok = s.sentence.tokens[s.position]
        if tok.lemma.lower() != lemma.lower() or tok.pos != pos:
            raise DataError(
                f"sentence {s.sentence.doc_id}/{s.sentence.sent_id} position "
                f"{s.position} holds {tok.lemma}/{tok.pos}, expected {lemma}/{pos}")
        tokens = list(s.sentence.tokens)
        tokens[s.position] = Token(RETARGET_TOKEN, RETARGET_TOKEN,
                                   tok.pos, tok.pos_fine)
        out.append(Sentence(tuple(tokens), s.sentence.doc_id,
                            s.sentence.sent_id))
    return out


# ------------------------------------------------------------------ SGNS


@dataclass
class SgnsModel:
    words: tuple[str, ...]
    index: dict[str, int] = field(repr=False)
    w_in: np.ndarray = field(repr=False)  # (V, dim) float64
    w_out: np.ndarray = field(repr=False)

    @property
    def dim(self):
        return self.w_in.shape[1]


def init_sgns(pretrained: VectorStore, vocab, params: SGNSParams) -> SgnsModel:
    """Input vectors copied from pretrained where known, tiny uniform
    noise for the rest; output vectors all zero."""
    words = tuple(sorted(set(vocab)))
    dim = params.dim
    if dim != pretrained.dim:
        raise ValueError(f"params.dim {dim} != pretrained dim {pretrained.dim}")
    w_in = np.zeros((len(words), dim))
    lim = 0.5 / dim
    for i, word in enumerate(words):
        vec = pretrained.get(word)
        if vec is not None:
            w_in[i] = vec.astype(np.float64)
        else:
            rng = Lcg64(derive_seed(params.seed, "init", word))
            w_in[i] = [rng.uniform(-lim, lim) for _ in range(dim)]
    return SgnsModel(words, {w: i for i, w in enumerate(words)},
                     w_in, np.zeros((len(words), dim)))


def sgns_pair_loss_and_grads(center_vec, context_vecs, labels):
    """Loss of one (center, contexts, labels) update and its gradients.

    Row 0 of `context_vecs` is conventionally the true context (label 1)
    and the rest are negatives (label 0); the math does not care.
    Returns (loss, d_center, d_contexts), gradients of the summed
    logistic loss.
    """
    center_vec = np.asarray(center_vec, dtype=np.float64)
    context_vecs = np.atleast_2d(np.asarray(context_vecs, dtype=np.float64))
    labels = np.asarray(labels, dtype=np.float64).reshape(-1)
    z = context_vecs @ center_vec
    loss = float(np.sum(np.logaddexp(0.0, z) - labels * z))
    dz = 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500))) - labels
    return loss, context_vecs.T @ dz, np.outer(dz, center_vec)


def _noise_cdf(sentences, index):
    counts = np.zeros(len(index))
    for sent in sentences:
        for tok in sent.tokens:
            counts[index[tok.form]] += 1
    weights = counts ** 0.75
    return np.cumsum(weights / weights.sum()), int(np.count_nonzero(weights))


def sgns_train(model: SgnsModel, sentences, params: SGNSParams) -> VectorStore:
    """Skip-gram with negative sampling over the given sentences.

    Every (center, context) pair within the window is one update; the
    learning rate moves linearly from lr0 to lr_min across all updates.
    Negatives come from the unigram distribution of these sentences
    raised to 0.75, redrawn when they hit the true context.  Sentence
    order is reshuffled each epoch.  No subsampling of frequent words.
    """
    sentences = list(sentences)
    if not sentences:
        raise ValueError("empty fine-tuning corpus")
    for sent in sentences:
        for tok in sent.tokens:
            if tok.form not in model.index:
                raise ValueError(f"token {tok.form!r} missing from the model "
                                 f"vocabulary")
    seqs = [[model.index[t.form] for t in sent.tokens] for sent in sentences]
    cdf, noise_types = _noise_cdf(sentences, model.index)
    vocab_size = len(model.words)
    window = params.window

    per_sentence = []
    for seq in seqs:
        count = 0
        for i in range(len(seq)):
            count += min(i + window, len(seq) - 1) - max(i - window, 0)
        per_sentence.append(count)
    total = params.epochs * sum(per_sentence)
    if total == 0:
        return _store_from(model)

    rng = Lcg64(derive_seed(params.seed, "train"))

    def draw_negative(ctx_idx):
        while True:
            u = rng.next_float()
            idx = min(bisect_right(cdf, u), vocab_size - 1)
            if idx != ctx_idx:
                return idx

    t = 0
    lr_span = params.lr_min - params.lr0
    for _ in range(params.epochs):
        order = list(range(len(seqs)))
        rng.shuffle(order)
        for si in order:
            seq = seqs[si]
            for i, center in enumerate(seq):
                lo = max(i - window, 0)
                hi = min(i + window, len(seq) - 1)
                for j in range(lo, hi + 1):
                    if j == i:
                        continue
                    ctx = seq[j]
                    lr = params.lr0 + lr_span * (t / (total - 1) if total > 1 else 0.0)
                    t += 1
                    rows = [ctx]
                    # a one-type corpus leaves nothing to sample against
                    if noise_types > 1:
                        rows.extend(draw_negative(ctx)
                                    for _ in range(params.negatives))
                    labels = [1.0] + [0.0] * (len(rows) - 1)
                    _, d_center, d_ctx = sgns_pair_loss_and_grads(
                        model.w_in[center], model.w_out[rows], labels)
                    model.w_in[center] -= lr * d_center
                    # repeated negative rows must each apply their share
                    for r, row in enumerate(rows):
                        model.w_out[row] -= lr * d_ctx[r]
    return _store_from(model)


def _store_from(model: SgnsModel) -> VectorStore:
    return VectorStore(model.dim, {w: model.w_in[i].astype(np.float32)
                                   for i, w in enumerate(model.words)})


def eval_similarity(trained: VectorStore, pretrained: VectorStore,
                    target_lemma: str) -> float:
    """Cosine between the fresh token's vector and the original one."""
    learned = trained.get(RETARGET_TOKEN)
    if learned is None:
        raise ValueError(f"{RETARGET_TOKEN!r} not in the trained store")
    gold = pretrained.get(target_lemma)
    if gold is None:
        raise ValueError(f"{target_lemma!r} not in the pretrained store")
    return cosine(learned, gold)


# ------------------------------------------------------------ experiment


@dataclass
class ExperimentReport:
    pool_label: str  # which split the pool probabilities came from
    words: tuple[str, ...]
    cells: dict[str, dict[str, float]]  # column -> word -> similarity

    @property
    def columns(self):
        return tuple(c for c in REGIME_COLUMNS if c in self.cells)

    def column_mean(self, column: str) -> float:
        vals = self.cells[column]
        return sum(vals[w] for w in self.words) / len(self.words)

    def diff_vs_inf(self, column: str) -> float | None:
        if column == "sim_inf" or "sim_inf" not in self.cells:
            return None
        return self.column_mean("sim_inf") - self.column_mean(column)

    def to_tsv(self) -> str:
        cols = self.columns
        lines = ["\t".join(("word",) + cols)]
        for w in self.words:
            lines.append("\t".join([w] + ["%.3f" % self.cells[c][w] for c in cols]))
        lines.append("\t".join(["mean"] + ["%.3f" % self.column_mean(c) for c in cols]))
        diffs = [self.diff_vs_inf(c) for c in cols]
        lines.append("\t".join(["diff"] + ["-" if d is None else "%.3f" % d
                                           for d in diffs]))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        cols = self.columns
        return json.dumps({
            "pool": self.pool_label,
            "columns": list(cols),
            "words": {w: {c: self.cells[c][w] for c in cols} for w in self.words},
            "mean": {c: self.column_mean(c) for c in cols},
            "diff": {c: self.diff_vs_inf(c) for c in cols if c != "sim_inf"},
        }, indent=2, sort_keys=True)


def _regime_selection(column, pool, n, m, seed):
    if column == "sim_inf":
        return select_sentences(pool, "top", n, seed=seed)
    if column == "sim_uninf":
        return select_sentences(pool, "bottom", n, seed=seed)
    if column == "sim_inf_uninf":
        return select_sentences(pool, "top_plus_bottom", n, seed=seed)
    if column == "sim_rand250":
        return select_sentences(pool, "random", n, seed=seed)
    if column == "sim_rand200":
        return select_sentences(pool, "random", n - m, seed=seed)
    if column == "sim_rand_uninf":
        return select_sentences(pool, "random_plus_bottom", n - m, m, seed=seed)
    raise ValueError(f"unknown report column {column!r}")


def run_regime(target: tuple[str, str], pool, column: str,
               pretrained: VectorStore, params: SGNSParams,
               n: int, m: int) -> float:
    """One cell of the report: select, retarget, fine-tune, evaluate.

    All randomness (selection, init, training) derives from
    (params.seed, lemma, column), so cells are order-independent.
    """
    job_seed = derive_seed(params.seed, target[0], column)
    selection = _regime_selection(column, pool, n, m, job_seed)
    sentences = retarget(selection, target)
    vocab = {tok.form for sent in sentences for tok in sent.tokens}
    job_params = replace(params, seed=job_seed)
    model = init_sgns(pretrained, vocab, job_params)
    trained = sgns_train(model, sentences, job_params)
    return eval_similarity(trained, pretrained, target[0])


def run_selection_experiment(pools: dict[tuple[str, str], list[ScoredSentence]],
                             pretrained: VectorStore, params: SGNSParams,
                             n: int = 250, m: int = 50,
                             regimes=REGIME_COLUMNS,
                             pool_label: str = "test",
                             progress=None) -> ExperimentReport:
    """Fill the similarity table over all target words and regimes.

    `n` is the base selection size and `m` the bottom-augmentation size;
    the column names keep their full-scale forms regardless.
    """
    targets = sorted(pools)
    cells: dict[str, dict[str, float]] = {c: {} for c in regimes}
    for target in targets:
        for column in regimes:
            sim = run_regime(target, pools[target], column, pretrained,
                             params, n, m)
            cells[column][target[0]] = sim
            if progress is not None:
                progress(target[0], column, sim)
    return ExperimentReport(pool_label, tuple(t[0] for t in targets), cells)


def frequency_polysemy_analysis(report: ExperimentReport, freqs: FreqTable,
                                senses: dict[str, int],
                                permutations: int = 10000,
                                seed: int = 0) -> dict:
    """How does the informative-selection gain relate to word frequency
    and polysemy?

    The per-word gain is sim_inf - sim_rand250.  Returns the Spearman
    rho/p against frequency and mean gains for the words below/at-or-
    above the median sense count.
    """
    gains = {w: report.cells["sim_inf"][w] - report.cells["sim_rand250"][w]
             for w in report.words}
    x = [float(freqs.get(w) or 0) for w in report.words]
    y = [gains[w] for w in report.words]
    rho, degenerate = spearman(x, y)
    p = spearman_pvalue(x, y, permutations=permutations, seed=seed)

    threshold = statistics.median_low(senses.get(w, 1) for w in report.words)
    low = [gains[w] for w in report.words if senses.get(w, 1) < threshold]
    high = [gains[w] for w in report.words if senses.get(w, 1) >= threshold]
    return {
        "rho_freq": rho,
        "p_freq": p,
        "degenerate": degenerate,
        "sense_threshold": threshold,
        "low_senses_mean_gain": sum(low) / len(low) if low else None,
        "high_senses_mean_gain": sum(high) / len(high) if high else None,
        "low_count": len(low),
        "high_count": len(high),
    }
