import io

import numpy as np
import pytest

from infolab import synth
from infolab.classify import (BagNgramModel, ClozeDataset, ContextFFNNModel,
                              FeatureLRModel, LabeledExample,
                              bag_example_grads, build_dataset,
                              evaluate_accuracy, ffnn_loss_and_grads,
                              linguistic_features, load_model,
                              lr_loss_and_grad, predict_proba, read_examples,
                              save_model, sigmoid, train_bag_ngram,
                              train_context_ffnn, train_feature_lr,
                              write_examples)
from infolab.corpus import SLOT_TOKEN, SentenceStore, mask_at
from infolab.distractors import DistractorSet
from infolab.errors import (InsufficientDataError, IntegrityError, ParseError,
                            TruncationError)
from infolab.lm import train_trigram
from infolab.vectors import VectorStore

from helpers import make_sentence


@pytest.fixture(scope="module")
def world():
    return synth.separable_cloze_world()


@pytest.fixture(scope="module")
def data(world):
    return synth.separable_dataset(world, 50, 5)


# ------------------------------------------------------------ dataset


def test_build_dataset_sizes_and_stratification(world):
    # 10 positives + 10 distractors x 1 = 20 examples, split 16/2/2
    d = synth.separable_dataset(world, 10, 1)
    assert len(d.train) == 16 and len(d.dev) == 2 and len(d.test) == 2
    for split in (d.train, d.dev, d.test):
        pos = sum(1 for ex in split if ex.label)
        assert pos == len(split) // 2  # stratified by label


def test_build_dataset_examples_are_masked(data):
    for ex in data.train + data.dev + data.test:
        assert ex.masked.tokens[ex.masked.slot_index] == SLOT_TOKEN
        assert SLOT_TOKEN not in ex.masked.filled("q")
        if ex.label:
            assert ex.source_word == "blick"
        else:
            assert ex.source_word.startswith("dax")


def test_build_dataset_deterministic(world):
    a = synth.separable_dataset(world, 20, 2)
    b = synth.separable_dataset(world, 20, 2)
    assert a == b


def test_build_dataset_insufficient_occurrences(world):
    with pytest.raises(InsufficientDataError) as err:
        synth.separable_dataset(world, 10_000, 1)
    assert "blick" in str(err.value)


def test_build_dataset_dedups_within_sentence():
    # one sentence holding the target twice is one usable sentence
    sents = [make_sentence(["blick", "saw", "blick"], "d", "s0",
                           ["NOUN", "VERB", "NOUN"]),
             make_sentence(["a", "blick", "ran"], "d", "s1",
                           ["OTHER", "NOUN", "VERB"]),
             make_sentence(["a", "dax", "ran"], "d", "s2",
                           ["OTHER", "NOUN", "VERB"])]
    store = SentenceStore(sents)
    dset = DistractorSet(("blick", "NOUN"), ("dax",), 1, 0)
    with pytest.raises(InsufficientDataError) as err:
        build_dataset(store, ("blick", "NOUN"), dset, n_pos=3,
                      n_per_distractor=1, split=(1.0, 0.0, 0.0))
    assert "blick" in str(err.value)
    # two distinct sentences work
    d = build_dataset(store, ("blick", "NOUN"), dset, n_pos=2,
                      n_per_distractor=1, split=(1.0, 0.0, 0.0))
    assert len(d.train) == 3


def test_build_dataset_length_bounds(world):
    with pytest.raises(InsufficientDataError):
        build_dataset(world.store, world.target, world.distractor_set,
                      10, 1, min_len=100)


def test_split_validation(world):
    with pytest.raises(ValueError):
        build_dataset(world.store, world.target, world.distractor_set,
                      10, 1, split=(0.5, 0.2, 0.2))


def test_examples_round_trip(data):
    buf = io.StringIO()
    write_examples(buf, data.test)
    buf.seek(0)
    again = read_examples(buf)
    assert tuple(again) == data.test


def test_read_examples_rejects_garbage():
    with pytest.raises(ParseError):
        read_examples(io.StringIO('{"tokens": ["a"]}\n'))
    with pytest.raises(ParseError):
        read_examples(io.StringIO("not json\n"))


# ------------------------------------------------------------ primitives


def test_sigmoid_stable_and_correct():
    assert sigmoid(0.0) == 0.5
    assert sigmoid(1000.0) == 1.0
    assert sigmoid(-1000.0) == pytest.approx(0.0)
    assert sigmoid(2.0) == pytest.approx(1 / (1 + np.exp(-2.0)))
    assert sigmoid(-2.0) + sigmoid(2.0) == pytest.approx(1.0)


def _fd_check(loss_fn, params, analytic, eps=1e-6):
    """Max relative error between analytic grads and central differences."""
    worst = 0.0
    for arr, grad in zip(params, analytic):
        arr = np.atleast_1d(arr)
        grad = np.atleast_1d(np.asarray(grad, dtype=np.float64))
        it = np.nditer(arr, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = arr[idx]
            arr[idx] = orig + eps
            hi = loss_fn()
            arr[idx] = orig - eps
            lo = loss_fn()
            arr[idx] = orig
            fd = (hi - lo) / (2 * eps)
            denom = max(abs(fd), abs(float(grad[idx])), 1e-8)
            worst = max(worst, abs(fd - float(grad[idx])) / denom)
    return worst


def test_bag_gradients_match_finite_differences():
    rng = np.random.default_rng(1)
    for y in (0.0, 1.0, 0.0, 1.0, 0.0):  # 5 probes
        vecs = rng.standard_normal((4, 6))
        out_w = rng.standard_normal(6)
        out_b = float(rng.standard_normal())
        box = {"b": out_b}

        def loss():
            return bag_example_grads(vecs, out_w, box["b"], y)[0]

        _, grad_rows, grad_out, grad_b = bag_example_grads(
            vecs, out_w, box["b"], y)
        worst = _fd_check(loss, [vecs, out_w], [grad_rows, grad_out])
        # scalar bias by hand
        eps = 1e-6
        box["b"] = out_b + eps
        hi = loss()
        box["b"] = out_b - eps
        lo = loss()
        box["b"] = out_b
        fd_b = (hi - lo) / (2 * eps)
        worst = max(worst, abs(fd_b - grad_b) / max(abs(fd_b), 1e-8))
        assert worst <= 1e-4


def test_lr_gradients_match_finite_differences():
    rng = np.random.default_rng(2)
    X = rng.standard_normal((5, 3))
    y = np.array([1.0, 0.0, 1.0, 1.0, 0.0])
    w = rng.standard_normal(3)
    b = float(rng.standard_normal())
    _, gw, gb = lr_loss_and_grad(w, b, X, y)

    def loss():
        return lr_loss_and_grad(w, b, X, y)[0]

    worst = _fd_check(loss, [w], [gw])
    eps = 1e-6
    fd_b = (lr_loss_and_grad(w, b + eps, X, y)[0]
            - lr_loss_and_grad(w, b - eps, X, y)[0]) / (2 * eps)
    worst = max(worst, abs(fd_b - gb) / max(abs(fd_b), 1e-8))
    assert worst <= 1e-4


def test_ffnn_gradients_match_finite_differences():
    rng = np.random.default_rng(3)
    dim, h1, h2 = 4, 5, 3
    # offsets keep ReLU inputs away from the kink
    w1 = rng.standard_normal((h1, dim)) * 0.5
    b1 = rng.standard_normal(h1) * 0.1 + 0.3
    w2 = rng.standard_normal((h2, h1)) * 0.5
    b2 = rng.standard_normal(h2) * 0.1 + 0.3
    w3 = rng.standard_normal(h2) * 0.5
    b3 = np.array([0.1])
    X = rng.standard_normal((5, dim))
    y = np.array([1.0, 0.0, 1.0, 0.0, 1.0])

    def loss():
        return ffnn_loss_and_grads((w1, b1, w2, b2, w3, float(b3[0])), X, y)[0]

    _, grads = ffnn_loss_and_grads((w1, b1, w2, b2, w3, float(b3[0])), X, y)
    gw1, gb1, gw2, gb2, gw3, gb3 = grads
    worst = _fd_check(loss, [w1, b1, w2, b2, w3, b3],
                      [gw1, gb1, gw2, gb2, gw3, np.array([gb3])])
    assert worst <= 1e-4


# ------------------------------------------------------------ training


def test_bag_single_step_descends():
    masked = mask_at(make_sentence(["u", "v", "w"]), 1)
    ex = (LabeledExample(masked, True, "v"),)
    dset = DistractorSet(("v", "NOUN"), ("q",), 1, 0)
    data = ClozeDataset(("v", "NOUN"), dset, ex, (), (), 0)
    m = train_bag_ngram(data, buckets=64, dim=4, epochs=1, lr0=0.5)
    # one positive example: probability must move above the 0.5 start
    assert m.predict_proba(masked) > 0.5


def test_bag_converges_on_separable(data):
    m = train_bag_ngram(data, buckets=1 << 15, dim=10, epochs=20)
    assert evaluate_accuracy(m, data.test) >= 0.95


def test_bag_feature_indices_multiset():
    m = BagNgramModel(1 << 10, 4, 0, 0, {}, np.zeros(4, np.float32), 0.0)
    idxs = m.feature_indices(("a", "b", "a"))
    assert len(idxs) == 5  # 3 unigrams + 2 bigrams
    assert idxs[0] == idxs[2]  # repeated unigram hashes alike
    # bigram boundary: ("ab","c") vs ("a","bc")
    x = m.feature_indices(("ab", "c"))
    z = m.feature_indices(("a", "bc"))
    assert x[2] != z[2]


def test_bag_untouched_bucket_regenerates(data):
    m = train_bag_ngram(data, buckets=1 << 15, dim=10, epochs=1)
    probe = 12345
    while probe in m.embeddings:
        probe += 1
    vec = m.bucket_vector(probe)
    assert vec.shape == (10,)
    assert np.all(np.abs(vec) <= 1 / 10 + 1e-7)  # float32 rounding slack
    assert np.allclose(vec, m.bucket_vector(probe))


def test_lr_trains_and_separates(world, data):
    lm = train_trigram(world.store)
    m = train_feature_lr(data, lm, world.vectors)
    acc = evaluate_accuracy(m, data.test, lm=lm, vstore=world.vectors,
                            target="blick",
                            distractors=data.distractor_set.distractors)
    assert acc >= 0.95
    assert m.weights.dtype == np.float32


def test_lr_constant_feature_guard(world, data):
    # a vector store covering nothing makes both similarity features
    # constant; training must not divide by zero
    empty = VectorStore(world.vectors.dim, {})
    lm = train_trigram(world.store)
    m = train_feature_lr(data, lm, empty, iters=10)
    assert np.all(np.isfinite(m.weights))
    assert np.all(m.std > 0)


def test_linguistic_features_shape(world, data):
    lm = train_trigram(world.store)
    ex = data.train[0]
    feats = linguistic_features(ex.masked, lm, world.vectors, "blick",
                                data.distractor_set.distractors)
    assert feats.shape == (3,)
    assert 0.0 <= feats[0] <= 1.0
    assert -1.0 <= feats[1] <= 1.0


def test_ffnn_converges_on_separable(world, data):
    m = train_context_ffnn(data, world.vectors, h1=16, h2=8, epochs=5)
    assert evaluate_accuracy(m, data.test, vstore=world.vectors) >= 0.95


def test_ffnn_seeded_init_bounds(world, data):
    m = train_context_ffnn(data, world.vectors, h1=4, h2=3, epochs=0)
    lim1 = 1 / np.sqrt(world.vectors.dim)
    assert np.all(np.abs(m.w1) <= lim1 + 1e-7)
    assert np.all(np.abs(m.w2) <= 1 / 2 + 1e-7)  # fan_in 4
    assert np.all(m.b1 == 0) and np.all(m.b2 == 0) and m.b3 == 0
    m2 = train_context_ffnn(data, world.vectors, h1=4, h2=3, epochs=0)
    assert np.array_equal(m.w1, m2.w1)
    m3 = train_context_ffnn(data, world.vectors, h1=4, h2=3, epochs=0, seed=1)
    assert not np.array_equal(m.w1, m3.w1)


def test_coinflip_labels_stay_near_chance():
    data = synth.coinflip_dataset(n=600)
    m = train_bag_ngram(data, buckets=1 << 15, dim=10, epochs=5)
    acc = evaluate_accuracy(m, data.test)
    assert 0.30 <= acc <= 0.70


# ------------------------------------------------------------ dispatcher


def test_predict_dispatcher_validates_inputs(world, data):
    lm = train_trigram(world.store)
    m = train_feature_lr(data, lm, world.vectors, iters=5)
    ex = data.test[0]
    with pytest.raises(ValueError):
        predict_proba(m, ex.masked)  # missing lm/vstore/target/distractors
    f = train_context_ffnn(data, world.vectors, h1=4, h2=3, epochs=1)
    with pytest.raises(ValueError):
        predict_proba(f, ex.masked)
    with pytest.raises(TypeError):
        predict_proba(object(), ex.masked)
    with pytest.raises(ValueError):
        evaluate_accuracy(m, [], lm=lm, vstore=world.vectors, target="blick",
                          distractors=data.distractor_set.distractors)


# ------------------------------------------------------------ containers


def _bitwise_same_predictions(model, loaded, data, **inputs):
    for ex in data.test:
        a = predict_proba(model, ex.masked, **inputs)
        b = predict_proba(loaded, ex.masked, **inputs)
        assert a == b  # bitwise, no tolerance


def test_bag_model_round_trip(tmp_path, data):
    m = train_bag_ngram(data, buckets=1 << 15, dim=8, epochs=2)
    path = tmp_path / "bag.cilm"
    save_model(m, path)
    loaded = load_model(path)
    assert isinstance(loaded, BagNgramModel)
    assert loaded.buckets == m.buckets and loaded.hash_seed == m.hash_seed
    assert set(loaded.embeddings) == set(m.embeddings)
    _bitwise_same_predictions(m, loaded, data)


def test_lr_model_round_trip(tmp_path, world, data):
    lm = train_trigram(world.store)
    m = train_feature_lr(data, lm, world.vectors, iters=50)
    path = tmp_path / "lr.cilm"
    save_model(m, path)
    loaded = load_model(path)
    assert isinstance(loaded, FeatureLRModel)
    _bitwise_same_predictions(m, loaded, data, lm=lm, vstore=world.vectors,
                              target="blick",
                              distractors=data.distractor_set.distractors)


def test_ffnn_model_round_trip(tmp_path, world, data):
    m = train_context_ffnn(data, world.vectors, h1=8, h2=4, epochs=2)
    path = tmp_path / "ffnn.cilm"
    save_model(m, path)
    loaded = load_model(path)
    assert isinstance(loaded, ContextFFNNModel)
    assert loaded.w1.dtype == np.float32
    _bitwise_same_predictions(m, loaded, data, vstore=world.vectors)


def test_container_rejects_corruption(tmp_path, world, data):
    lm = train_trigram(world.store)
    m = train_feature_lr(data, lm, world.vectors, iters=5)
    path = tmp_path / "m.cilm"
    save_model(m, path)
    blob = path.read_bytes()

    bad = tmp_path / "bad.cilm"
    bad.write_bytes(b"XXXX" + blob[4:])
    with pytest.raises(IntegrityError):
        load_model(bad)  # magic
    bad.write_bytes(blob[:4] + b"\xff\x00" + blob[6:])
    with pytest.raises(IntegrityError):
        load_model(bad)  # version
    bad.write_bytes(blob[:-3])
    with pytest.raises(TruncationError):
        load_model(bad)  # truncated block payload
    bad.write_bytes(blob + b"\x00")
    with pytest.raises(IntegrityError):
        load_model(bad)  # trailing bytes
    bad.write_bytes(blob[:6])
    with pytest.raises(TruncationError):
        load_model(bad)  # header cut short


def test_save_model_rejects_non_models(tmp_path):
    with pytest.raises(TypeError):
        save_model(object(), tmp_path / "x.cilm")
