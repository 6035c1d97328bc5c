"""
Train the three cloze classifiers on a fully separable toy world
================================================================

The synthetic corpus gives the target and its distractors disjoint
context vocabularies, so every model should approach perfect test
accuracy.  A nice smoke test for the whole classification stack.
"""

import tempfile
from pathlib import Path

from infolab import synth
from infolab.classify import (build_dataset, evaluate_accuracy, load_model,
                              predict_proba, save_model, train_bag_ngram,
                              train_context_ffnn, train_feature_lr)
from infolab.lm import train_trigram

# one call builds the corpus, the distractor set and the word vectors
world = synth.separable_cloze_world(n_pos=120, n_per_distractor=12, seed=0)
data = build_dataset(world.store, world.target, world.distractor_set,
                     n_pos=120, n_per_distractor=12, seed=0)
print(f"splits: {len(data.train)} train / {len(data.dev)} dev / "
      f"{len(data.test)} test")

# hashed bag of n-grams needs nothing but the masked tokens
bag = train_bag_ngram(data, buckets=1 << 16, dim=16, epochs=10, seed=0)
print("bag accuracy:   ", evaluate_accuracy(bag, data.test))

# the feature model reads a trigram LM and the vector table
lm = train_trigram(world.store)
lr = train_feature_lr(data, lm, world.vectors, iters=200)
acc = evaluate_accuracy(lr, data.test, lm=lm, vstore=world.vectors,
                        target=data.target[0],
                        distractors=data.distractor_set.distractors)
print("feature accuracy:", acc)

# the feed-forward net averages context vectors around the slot
ffnn = train_context_ffnn(data, world.vectors, h1=32, h2=16, epochs=5, seed=0)
print("ffnn accuracy:  ", evaluate_accuracy(ffnn, data.test,
                                            vstore=world.vectors))

# models round-trip through the container format bit for bit
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "bag.cilm"
    save_model(bag, path)
    again = load_model(path)
    ex = data.test[0]
    assert predict_proba(again, ex.masked) == predict_proba(bag, ex.masked)
    print("saved, reloaded, predictions identical")
