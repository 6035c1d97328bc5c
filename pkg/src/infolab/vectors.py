"""Pretrained word vectors: loading, cosine similarity, context encoding,
and the similarity-rank baseline.

The context encoder is deliberately pluggable: `context_vector` is the
shipped implementation (unweighted mean of the vectors around the slot),
and anything producing a `ContextVector` can stand in for it downstream.
Stop words are kept in the average.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .corpus import MaskedSentence
from .errors import DataError, IntegrityError

# similarity assigned to out-of-vocabulary fillers so ranks stay in 1..11
OOV_SIMILARITY = -1.0


class VectorStore:
    def __init__(self, dim: int, vectors: dict[str, np.ndarray]):
        self.dim = dim
        self.vectors = {}
        for word, vec in vectors.items():
            arr = np.asarray(vec, dtype=np.float32)
            if arr.shape != (dim,):
                raise ValueError(f"vector for {word!r} has shape {arr.shape}, want ({dim},)")
            self.vectors[word] = arr

    def __len__(self):
        return len(self.vectors)

    def __contains__(self, word):
        return word in self.vectors or word.lower() in self.vectors

    def get(self, word: str) -> np.ndarray | None:
        vec = self.vectors.get(word)
        if vec is None:
            vec = self.vectors.get(word.lower())
        return vec

    def __getitem__(self, word: str) -> np.ndarray:
        vec = self.get(word)
        if vec is None:
            raise KeyError(word)
        return vec


@dataclass(frozen=True)
class ContextVector:
    values: np.ndarray
    support: int  # number of in-vocabulary tokens averaged


def load_vectors(path, fmt: str = "text") -> VectorStore:
    """Load a vector file; `fmt` is "text" or "binary" (word2vec C layout)."""
    if fmt == "text":
        with open(path, encoding="utf-8") as f:
            return _load_text(f)
    if fmt == "binary":
        with open(path, "rb") as f:
            return _load_binary(f)
    raise ValueError(f"unknown vector format {fmt!r}")


def _check_finite(word, arr):
    if not np.all(np.isfinite(arr)):
        raise DataError(f"non-finite component in vector for {word!r}")


def _load_text(f) -> VectorStore:
    header = f.readline().split()
    if len(header) != 2:
        raise IntegrityError("vector file header must be 'vocab_count dim'")
    count, dim = int(header[0]), int(header[1])
    vectors = {}
    for line in f:
        parts = line.rstrip("\n").split(" ")
        if len(parts) < 2:
            continue
        word = parts[0]
        if len(parts) - 1 != dim:
            raise IntegrityError(f"vector for {word!r} has {len(parts) - 1} "
                                 f"components, header says {dim}")
        arr = np.array([float(x) for x in parts[1:]], dtype=np.float32)
        _check_finite(word, arr)
        vectors[word] = arr
    if len(vectors) != count:
        raise IntegrityError(f"header declares {count} words, file has {len(vectors)}")
    return VectorStore(dim, vectors)


def _load_binary(f) -> VectorStore:
    header = b""
    while not header.endswith(b"\n"):
        c = f.read(1)
        if not c:
            raise IntegrityError("binary vector file ended inside the header")
        header += c
    parts = header.split()
    if len(parts) != 2:
        raise IntegrityError("vector file header must be 'vocab_count dim'")
    count, dim = int(parts[0]), int(parts[1])
    vectors = {}
    for _ in range(count):
        word_bytes = b""
        while True:
            c = f.read(1)
            if not c:
                raise IntegrityError(f"binary vector file truncated after "
                                     f"{len(vectors)} of {count} words")
            if c == b" ":
                break
            if c != b"\n":  # word2vec writers differ on leading newlines
                word_bytes += c
        word = word_bytes.decode("utf-8")
        data = f.read(4 * dim)
        if len(data) != 4 * dim:
            raise IntegrityError(f"truncated vector data for {word!r}")
        arr = np.frombuffer(data, dtype="<f4").copy()
        _check_finite(word, arr)
        vectors[word] = arr
    return VectorStore(dim, vectors)


def save_vectors(store: VectorStore, path, fmt: str = "text") -> None:
    words = sorted(store.vectors)
    if fmt == "text":
        with open(path, "w", encoding="utf-8") as f:
            f.write(f"{len(words)} {store.dim}\n")
            for word in words:
                # %.9g is enough digits to reconstruct any float32 exactly
                comps = " ".join("%.9g" % x for x in store.vectors[word])
                f.write(f"{word} {comps}\n")
    elif fmt == "binary":
        with open(path, "wb") as f:
            f.write(f"{len(words)} {store.dim}\n".encode("utf-8"))
            for word in words:
                f.write(word.encode("utf-8") + b" ")
                f.write(struct.pack(f"<{store.dim}f", *store.vectors[word]))
                f.write(b"\n")
    else:
        raise ValueError(f"unknown vector format {fmt!r}")


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity; 0.0 when either vector has zero norm."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def context_vector(masked: MaskedSentence, store: VectorStore,
                   window: int | None = None) -> ContextVector:
    """Mean vector of in-vocabulary tokens around the slot.

    `window` is a half-width in tokens; None means the whole sentence.
    The slot itself never contributes.  With no in-vocabulary context the
    result is the zero vector with support 0.
    """
    total = np.zeros(store.dim, dtype=np.float64)
    support = 0
    for i, form in enumerate(masked.tokens):
        if i == masked.slot_index:
            continue
        if window is not None and abs(i - masked.slot_index) > window:
            continue
        vec = store.get(form)
        if vec is not None:
            total += vec
            support += 1
    if support:
        total /= support
    return ContextVector(total, support)


def _filler_similarity(ctx: ContextVector, word: str, store: VectorStore) -> float:
    vec = store.get(word)
    if vec is None:
        return OOV_SIMILARITY
    return cosine(vec, ctx.values)


def filler_rank(ctx: ContextVector, target: str, distractors,
                store: VectorStore) -> int:
    """Rank of the target among all fillers by context similarity.

    1 is most similar.  Ties count against the target, keeping the rank
    deterministic and pessimistic.
    """
    target_sim = _filler_similarity(ctx, target, store)
    rank = 1
    for d in distractors:
        if _filler_similarity(ctx, d, store) >= target_sim:
            rank += 1
    return rank


def similarity_features(ctx: ContextVector, target: str, distractors,
                        store: VectorStore) -> tuple[float, float]:
    """(target-context similarity, mean distractor-context similarity)."""
    distractors = list(distractors)
    sim_target = _filler_similarity(ctx, target, store)
    mean_sim = (sum(_filler_similarity(ctx, d, store) for d in distractors)
                / len(distractors)) if distractors else 0.0
    return sim_target, mean_sim
