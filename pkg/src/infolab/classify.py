"""Cloze datasets and the three sentence classifiers.

Each target word gets its own binary problem: did this sentence
originally contain the target (label True) or one of its distractors
(label False)?  Three model families are trained on it:

* ``BagNgramModel``   hashed bag of uni+bigrams, averaged embeddings,
                      linear output; cheap and strong.
* ``FeatureLRModel``  logistic regression over 3 features (backoff-LM
                      distractor proportion, target-context similarity,
                      mean distractor-context similarity).
* ``ContextFFNNModel`` feed-forward net over the mean context vector.

All arithmetic runs in float64; parameters are rounded to float32 when a
trainer returns, so a model predicts bit-identically before and after a
save/load round trip.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .corpus import MaskedSentence, SentenceStore, mask_at, normalize_numbers
from .distractors import DistractorSet
from .errors import InsufficientDataError, IntegrityError, ParseError, TruncationError
from .lm import TrigramLM, lm_rank_feature
from .rng import Lcg64, derive_seed, fnv1a64
from .vectors import VectorStore, context_vector, similarity_features

MODEL_MAGIC = b"CILM"
MODEL_VERSION = 1

# joins bigram halves before hashing so ("ab","c") and ("a","bc") differ
_BIGRAM_SEP = "\x1f"


@dataclass(frozen=True)
class LabeledExample:
    masked: MaskedSentence
    label: bool  # True = slot originally held the target word
    source_word: str  # lemma that actually filled the slot


@dataclass(frozen=True)
class ClozeDataset:
    target: tuple[str, str]  # (lemma, pos)
    distractor_set: DistractorSet
    train: tuple[LabeledExample, ...]
    dev: tuple[LabeledExample, ...]
    test: tuple[LabeledExample, ...]
    seed: int

    @property
    def splits(self):
        return {"train": self.train, "dev": self.dev, "test": self.test}


def _sample_class(store, lemma, pos, n, used, rng, label, min_len, max_len):
    """Pick n distinct sentences containing lemma/pos, masked at the hit.

    `used` holds (doc_id, sent_id) pairs already claimed; a sentence
    belongs to whichever class sampled it first.
    """
    occs = store.occurrences(lemma, pos, min_len=min_len, max_len=max_len)
    if len(occs) < n:
        raise InsufficientDataError(
            f"only {len(occs)} usable occurrences of {lemma}/{pos}, need {n}")
    order = list(range(len(occs)))
    rng.shuffle(order)
    picked = []
    for i in order:
        sent, position = occs[i]
        key = (sent.doc_id, sent.sent_id)
        if key in used:
            continue
        used.add(key)
        masked = mask_at(normalize_numbers(sent), position)
        picked.append(LabeledExample(masked, label, lemma))
        if len(picked) == n:
            return picked
    raise InsufficientDataError(
        f"only {len(picked)} distinct sentences for {lemma}/{pos} after "
        f"cross-class dedup, need {n}")


def _split_counts(n: int, split) -> tuple[int, int, int]:
    p_train, p_dev, p_test = split
    if abs(p_train + p_dev + p_test - 1.0) > 1e-9:
        raise ValueError("split proportions must sum to 1")
    n_dev = int(n * p_dev)
    n_test = int(n * p_test)
    return n - n_dev - n_test, n_dev, n_test


def build_dataset(store: SentenceStore, target: tuple[str, str],
                  distractor_set: DistractorSet, n_pos: int,
                  n_per_distractor: int, split=(0.8, 0.1, 0.1),
                  seed: int = 0, min_len: int = 1,
                  max_len: int | None = None) -> ClozeDataset:
    """Sample a balanced labeled dataset for one target word.

    Positives are occurrences of the target itself, negatives are
    occurrences of each distractor (n_per_distractor apiece), every
    sentence number-normalized and masked at the occurrence.  Splitting
    is stratified per class so each split keeps the class ratio.
    """
    lemma, pos = target
    used: set[tuple[str, str]] = set()
    rng = Lcg64(derive_seed(seed, "sample", lemma))
    positives = _sample_class(store, lemma, pos, n_pos, used, rng,
                              True, min_len, max_len)
    negatives = []
    for d in distractor_set.distractors:
        rng = Lcg64(derive_seed(seed, "sample", d))
        negatives.extend(_sample_class(store, d, pos, n_per_distractor,
                                       used, rng, False, min_len, max_len))

    train, dev, test = [], [], []
    for name, examples in (("pos", positives), ("neg", negatives)):
        Lcg64(derive_seed(seed, "split", name)).shuffle(examples)
        n_train, n_dev, _ = _split_counts(len(examples), split)
        train.extend(examples[:n_train])
        dev.extend(examples[n_train:n_train + n_dev])
        test.extend(examples[n_train + n_dev:])
    return ClozeDataset(target, distractor_set, tuple(train), tuple(dev),
                        tuple(test), seed)


def write_examples(stream, examples) -> None:
    """One JSON object per line: tokens, slot_index, label, source_word."""
    for ex in examples:
        stream.write(json.dumps({
            "tokens": list(ex.masked.tokens),
            "slot_index": ex.masked.slot_index,
            "label": bool(ex.label),
            "source_word": ex.source_word,
        }) + "\n")


def read_examples(stream) -> list[LabeledExample]:
    out = []
    for line_no, raw in enumerate(stream, start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
            masked = MaskedSentence(tuple(obj["tokens"]), obj["slot_index"],
                                    obj["source_word"])
            out.append(LabeledExample(masked, bool(obj["label"]),
                                      obj["source_word"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad example record: {exc}", line_no) from None
    return out


def sigmoid(z: float) -> float:
    # split on sign so exp never overflows
    if z >= 0.0:
        return 1.0 / (1.0 + np.exp(-z))
    e = np.exp(z)
    return float(e / (1.0 + e))


def _logistic_loss(z, y):
    """Mean of softplus(z) - y*z, the negative log-likelihood."""
    z = np.asarray(z, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


# ---------------------------------------------------------------- bag n-gram


@dataclass
class BagNgramModel:
    buckets: int
    dim: int
    seed: int  # drives lazy per-bucket embedding init
    hash_seed: int
    embeddings: dict[int, np.ndarray] = field(repr=False)  # touched buckets, float32
    out_w: np.ndarray = field(repr=False)  # (dim,) float32
    out_b: float = 0.0

    def feature_indices(self, tokens) -> list[int]:
        """Hashed unigrams plus adjacent bigrams, as a multiset."""
        idxs = [fnv1a64(t.encode("utf-8"), self.hash_seed) % self.buckets
                for t in tokens]
        for a, b in zip(tokens, tokens[1:]):
            text = a + _BIGRAM_SEP + b
            idxs.append(fnv1a64(text.encode("utf-8"), self.hash_seed) % self.buckets)
        return idxs

    def bucket_vector(self, idx: int) -> np.ndarray:
        vec = self.embeddings.get(idx)
        if vec is None:
            vec = _bucket_init(self.seed, idx, self.dim).astype(np.float32)
        return vec.astype(np.float64)

    def predict_proba(self, masked: MaskedSentence) -> float:
        idxs = self.feature_indices(masked.tokens)
        x = np.zeros(self.dim)
        for i in idxs:
            x += self.bucket_vector(i)
        x /= len(idxs)
        return sigmoid(float(np.dot(self.out_w.astype(np.float64), x)) + self.out_b)


def _bucket_init(seed: int, bucket: int, dim: int) -> np.ndarray:
    """Initial embedding of one bucket, derived from its id alone."""
    rng = Lcg64(derive_seed(seed, "bucket", str(bucket)))
    lim = 1.0 / dim
    return np.array([rng.uniform(-lim, lim) for _ in range(dim)])


def bag_example_grads(bucket_vecs: np.ndarray, out_w: np.ndarray,
                      out_b: float, y: float):
    """Loss and gradients of logistic loss for one bag-of-features example.

    `bucket_vecs` has one row per feature occurrence (a bucket hit twice
    contributes two rows, and receives its total gradient through both).
    Returns (loss, grad_rows, grad_out_w, grad_out_b).
    """
    n = bucket_vecs.shape[0]
    x = bucket_vecs.mean(axis=0)
    z = float(np.dot(out_w, x)) + out_b
    p = sigmoid(z)
    loss = float(np.logaddexp(0.0, z)) - y * z
    g = p - y
    grad_rows = np.tile(g / n * out_w, (n, 1))
    return loss, grad_rows, g * x, g


def train_bag_ngram(dataset: ClozeDataset, buckets: int = 1 << 21,
                    dim: int = 50, lr0: float = 0.1, epochs: int = 5,
                    seed: int = 0, hash_seed: int | None = None) -> BagNgramModel:
    """SGD on logistic loss; learning rate decays linearly to 0.

    Bucket embeddings are created on first touch from a per-bucket
    generator, so memory tracks the observed feature set, not `buckets`.
    """
    train = dataset.train
    if not train:
        raise ValueError("empty train split")
    if hash_seed is None:
        hash_seed = seed
    model = BagNgramModel(buckets, dim, seed, hash_seed, {},
                          np.zeros(dim, dtype=np.float32), 0.0)

    work: dict[int, np.ndarray] = {}  # float64 working copies
    out_w = np.zeros(dim)
    out_b = 0.0
    rng = Lcg64(derive_seed(seed, "shuffle"))
    total_updates = epochs * len(train)
    t = 0
    for _ in range(epochs):
        order = list(range(len(train)))
        rng.shuffle(order)
        for i in order:
            ex = train[i]
            idxs = model.feature_indices(ex.masked.tokens)
            for idx in idxs:
                if idx not in work:
                    work[idx] = _bucket_init(seed, idx, dim)
            vecs = np.stack([work[idx] for idx in idxs])
            _, grad_rows, grad_out, grad_b = bag_example_grads(
                vecs, out_w, out_b, 1.0 if ex.label else 0.0)
            lr = lr0 * (1.0 - t / total_updates)
            t += 1
            out_w -= lr * grad_out
            out_b -= lr * grad_b
            for row, idx in enumerate(idxs):
                work[idx] -= lr * grad_rows[row]

    model.embeddings = {idx: vec.astype(np.float32) for idx, vec in work.items()}
    model.out_w = out_w.astype(np.float32)
    model.out_b = float(np.float32(out_b))
    return model


# ----------------------------------------------------------- 3-feature LR


@dataclass
class FeatureLRModel:
    weights: np.ndarray  # (3,) float32
    bias: float
    mean: np.ndarray  # standardization, from the train split
    std: np.ndarray

    def predict_proba(self, masked: MaskedSentence, lm: TrigramLM,
                      vstore: VectorStore, target: str, distractors) -> float:
        x = linguistic_features(masked, lm, vstore, target, distractors)
        xs = (x - self.mean.astype(np.float64)) / self.std.astype(np.float64)
        z = float(np.dot(self.weights.astype(np.float64), xs)) + self.bias
        return sigmoid(z)


def linguistic_features(masked: MaskedSentence, lm: TrigramLM,
                        vstore: VectorStore, target: str,
                        distractors) -> np.ndarray:
    """(distractor proportion beating the target under the LM,
    target-context similarity, mean distractor-context similarity).

    Slot fillers are the lemma strings of the target and its distractors.
    """
    f1 = lm_rank_feature(lm, masked, target, distractors)
    ctx = context_vector(masked, vstore)
    f2, f3 = similarity_features(ctx, target, distractors, vstore)
    return np.array([f1, f2, f3])


def lr_loss_and_grad(weights, bias, X, y):
    """Full-batch logistic loss and its gradient (means over examples)."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    z = X @ weights + bias
    loss = _logistic_loss(z, y)
    g = 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500))) - y
    return loss, X.T @ g / len(y), float(np.mean(g))


def train_feature_lr(dataset: ClozeDataset, lm: TrigramLM,
                     vstore: VectorStore, lr: float = 0.1,
                     iters: int = 500) -> FeatureLRModel:
    """Full-batch gradient descent over standardized features."""
    train = dataset.train
    if not train:
        raise ValueError("empty train split")
    target = dataset.target[0]
    distractors = dataset.distractor_set.distractors
    X = np.array([linguistic_features(ex.masked, lm, vstore, target, distractors)
                  for ex in train])
    y = np.array([1.0 if ex.label else 0.0 for ex in train])
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std[std == 0.0] = 1.0  # constant feature carries no signal
    Xs = (X - mean) / std

    w = np.zeros(3)
    b = 0.0
    for _ in range(iters):
        _, gw, gb = lr_loss_and_grad(w, b, Xs, y)
        w -= lr * gw
        b -= lr * gb
    return FeatureLRModel(w.astype(np.float32), float(np.float32(b)),
                          mean.astype(np.float32), std.astype(np.float32))


# ----------------------------------------------------------- context FFNN


@dataclass
class ContextFFNNModel:
    dim: int
    h1: int
    h2: int
    w1: np.ndarray = field(repr=False)  # (h1, dim) float32
    b1: np.ndarray = field(repr=False)
    w2: np.ndarray = field(repr=False)  # (h2, h1)
    b2: np.ndarray = field(repr=False)
    w3: np.ndarray = field(repr=False)  # (h2,)
    b3: float = 0.0

    def weights64(self):
        return (self.w1.astype(np.float64), self.b1.astype(np.float64),
                self.w2.astype(np.float64), self.b2.astype(np.float64),
                self.w3.astype(np.float64), float(self.b3))

    def predict_proba(self, masked: MaskedSentence, vstore: VectorStore) -> float:
        x = context_vector(masked, vstore).values
        return sigmoid(_ffnn_logit(self.weights64(), x))


def _ffnn_logit(weights, x):
    w1, b1, w2, b2, w3, b3 = weights
    a1 = np.maximum(w1 @ x + b1, 0.0)
    a2 = np.maximum(w2 @ a1 + b2, 0.0)
    return float(np.dot(w3, a2)) + b3


def ffnn_loss_and_grads(weights, X, y):
    """Mean logistic loss over a batch and gradients for every parameter.

    `weights` is the (w1, b1, w2, b2, w3, b3) tuple in float64; the same
    code backs the trainer, one example at a time.
    """
    w1, b1, w2, b2, w3, b3 = weights
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    n = len(y)

    z1 = X @ w1.T + b1  # (n, h1)
    a1 = np.maximum(z1, 0.0)
    z2 = a1 @ w2.T + b2
    a2 = np.maximum(z2, 0.0)
    z3 = a2 @ w3 + b3  # (n,)
    loss = _logistic_loss(z3, y)

    g3 = (1.0 / (1.0 + np.exp(-np.clip(z3, -500, 500))) - y) / n
    gw3 = a2.T @ g3
    gb3 = float(np.sum(g3))
    d2 = np.outer(g3, w3) * (z2 > 0.0)
    gw2 = d2.T @ a1
    gb2 = d2.sum(axis=0)
    d1 = d2 @ w2 * (z1 > 0.0)
    gw1 = d1.T @ X
    gb1 = d1.sum(axis=0)
    return loss, (gw1, gb1, gw2, gb2, gw3, gb3)


def train_context_ffnn(dataset: ClozeDataset, vstore: VectorStore,
                       h1: int = 128, h2: int = 64, lr: float = 0.01,
                       epochs: int = 20, seed: int = 0) -> ContextFFNNModel:
    """Per-example SGD; weights start uniform(-1/sqrt(fan_in), +)."""
    train = dataset.train
    if not train:
        raise ValueError("empty train split")
    dim = vstore.dim
    rng = Lcg64(derive_seed(seed, "init"))

    def init(rows, cols):
        lim = 1.0 / np.sqrt(cols)
        return np.array([[rng.uniform(-lim, lim) for _ in range(cols)]
                         for _ in range(rows)])

    w1 = init(h1, dim)
    b1 = np.zeros(h1)
    w2 = init(h2, h1)
    b2 = np.zeros(h2)
    w3 = init(1, h2)[0]
    b3 = 0.0

    X = np.array([context_vector(ex.masked, vstore).values for ex in train])
    y = np.array([1.0 if ex.label else 0.0 for ex in train])
    order_rng = Lcg64(derive_seed(seed, "shuffle"))
    for _ in range(epochs):
        order = list(range(len(train)))
        order_rng.shuffle(order)
        for i in order:
            _, (gw1, gb1, gw2, gb2, gw3, gb3) = ffnn_loss_and_grads(
                (w1, b1, w2, b2, w3, b3), X[i], y[i:i + 1])
            w1 -= lr * gw1
            b1 -= lr * gb1
            w2 -= lr * gw2
            b2 -= lr * gb2
            w3 -= lr * gw3
            b3 -= lr * gb3
    return ContextFFNNModel(dim, h1, h2,
                            w1.astype(np.float32), b1.astype(np.float32),
                            w2.astype(np.float32), b2.astype(np.float32),
                            w3.astype(np.float32), float(np.float32(b3)))


# ------------------------------------------------------------- shared API


def predict_proba(model, masked: MaskedSentence, *, lm: TrigramLM = None,
                  vstore: VectorStore = None, target: str = None,
                  distractors=None) -> float:
    """Probability that the slot held the target word, any model kind."""
    if isinstance(model, BagNgramModel):
        return model.predict_proba(masked)
    if isinstance(model, FeatureLRModel):
        if lm is None or vstore is None or target is None or distractors is None:
            raise ValueError("feature model needs lm, vstore, target, distractors")
        return model.predict_proba(masked, lm, vstore, target, distractors)
    if isinstance(model, ContextFFNNModel):
        if vstore is None:
            raise ValueError("context model needs vstore")
        return model.predict_proba(masked, vstore)
    raise TypeError(f"not a classifier model: {type(model).__name__}")


def evaluate_accuracy(model, examples, **inputs) -> float:
    """Fraction of examples where thresholding at 0.5 matches the label."""
    examples = list(examples)
    if not examples:
        raise ValueError("empty evaluation split")
    hits = 0
    for ex in examples:
        p = predict_proba(model, ex.masked, **inputs)
        if (p >= 0.5) == ex.label:
            hits += 1
    return hits / len(examples)


# ---------------------------------------------------------- model files


def _pack_block(name: str, arr: np.ndarray) -> bytes:
    dtype = 1 if arr.dtype == np.uint64 else 0
    payload = arr.astype("<u8" if dtype else "<f4").tobytes()
    return (struct.pack("<B", len(name)) + name.encode("ascii")
            + struct.pack("<BI", dtype, arr.size) + payload)


def _model_blocks(model):
    if isinstance(model, FeatureLRModel):
        return "feature-lr", {}, [
            ("weights", model.weights), ("bias", np.array([model.bias])),
            ("mean", model.mean), ("std", model.std)]
    if isinstance(model, ContextFFNNModel):
        hyper = {"dim": model.dim, "h1": model.h1, "h2": model.h2}
        return "context-ffnn", hyper, [
            ("w1", model.w1.reshape(-1)), ("b1", model.b1),
            ("w2", model.w2.reshape(-1)), ("b2", model.b2),
            ("w3", model.w3), ("b3", np.array([model.b3]))]
    if isinstance(model, BagNgramModel):
        hyper = {"buckets": model.buckets, "dim": model.dim,
                 "seed": model.seed, "hash_seed": model.hash_seed}
        ids = np.array(sorted(model.embeddings), dtype=np.uint64)
        if len(ids):
            emb = np.concatenate([model.embeddings[int(i)] for i in ids])
        else:
            emb = np.zeros(0, dtype=np.float32)
        return "bag-ngram", hyper, [
            ("bucket_ids", ids), ("embeddings", emb),
            ("out_w", model.out_w), ("out_b", np.array([model.out_b]))]
    raise TypeError(f"not a classifier model: {type(model).__name__}")


def save_model(model, path) -> None:
    """Write the versioned binary model container."""
    kind, hyper, blocks = _model_blocks(model)
    header = json.dumps(hyper, sort_keys=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MODEL_MAGIC)
        f.write(struct.pack("<H", MODEL_VERSION))
        f.write(struct.pack("<B", len(kind)) + kind.encode("ascii"))
        f.write(struct.pack("<I", len(header)) + header)
        f.write(struct.pack("<H", len(blocks)))
        for name, arr in blocks:
            f.write(_pack_block(name, np.asarray(arr)))


def _read_exact(f, n, what):
    data = f.read(n)
    if len(data) != n:
        raise TruncationError(f"model file ended inside {what}")
    return data


def load_model(path):
    """Read a model container back into the matching model class."""
    with open(path, "rb") as f:
        if _read_exact(f, 4, "magic") != MODEL_MAGIC:
            raise IntegrityError("not a model file (bad magic bytes)")
        (version,) = struct.unpack("<H", _read_exact(f, 2, "version"))
        if version != MODEL_VERSION:
            raise IntegrityError(f"unsupported model format version {version}")
        (klen,) = struct.unpack("<B", _read_exact(f, 1, "kind"))
        kind = _read_exact(f, klen, "kind").decode("ascii")
        (hlen,) = struct.unpack("<I", _read_exact(f, 4, "header"))
        hyper = json.loads(_read_exact(f, hlen, "header"))
        (nblocks,) = struct.unpack("<H", _read_exact(f, 2, "block count"))
        blocks = {}
        for _ in range(nblocks):
            (nlen,) = struct.unpack("<B", _read_exact(f, 1, "block name"))
            name = _read_exact(f, nlen, "block name").decode("ascii")
            dtype, count = struct.unpack("<BI", _read_exact(f, 5, name))
            np_dtype = "<u8" if dtype else "<f4"
            size = count * (8 if dtype else 4)
            blocks[name] = np.frombuffer(
                _read_exact(f, size, f"block {name}"), dtype=np_dtype).copy()
        if f.read(1):
            raise IntegrityError("trailing bytes after the last block")
    return _assemble_model(kind, hyper, blocks)


def _block(blocks, name, size=None):
    if name not in blocks:
        raise IntegrityError(f"model file is missing block {name!r}")
    arr = blocks[name]
    if size is not None and arr.size != size:
        raise IntegrityError(f"block {name!r} has {arr.size} values, want {size}")
    return arr


def _assemble_model(kind, hyper, blocks):
    if kind == "feature-lr":
        return FeatureLRModel(_block(blocks, "weights", 3),
                              float(_block(blocks, "bias", 1)[0]),
                              _block(blocks, "mean", 3), _block(blocks, "std", 3))
    if kind == "context-ffnn":
        dim, h1, h2 = hyper["dim"], hyper["h1"], hyper["h2"]
        return ContextFFNNModel(
            dim, h1, h2,
            _block(blocks, "w1", h1 * dim).reshape(h1, dim),
            _block(blocks, "b1", h1),
            _block(blocks, "w2", h2 * h1).reshape(h2, h1),
            _block(blocks, "b2", h2),
            _block(blocks, "w3", h2), float(_block(blocks, "b3", 1)[0]))
    if kind == "bag-ngram":
        dim = hyper["dim"]
        ids = _block(blocks, "bucket_ids")
        emb = _block(blocks, "embeddings", len(ids) * dim)
        table = {int(b): emb[i * dim:(i + 1) * dim]
                 for i, b in enumerate(ids)}
        return BagNgramModel(hyper["buckets"], dim, hyper["seed"],
                             hyper["hash_seed"], table,
                             _block(blocks, "out_w", dim),
                             float(_block(blocks, "out_b", 1)[0]))
    raise IntegrityError(f"unknown model kind {kind!r}")
