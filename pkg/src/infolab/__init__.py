"""Toolkit for estimating how much a sentence tells a reader about one of
its words, and for using that estimate to pick training data for word
embeddings.

The pipeline: ingest a POS-tagged corpus (`corpus`), pick distractor words
that share contexts with a target (`resources`, `distractors`), build
balanced cloze datasets and train sentence classifiers (`lm`, `vectors`,
`classify`), select sentences by classifier score and fine-tune skip-gram
embeddings on them (`curate`), and collect human judgments over HTTP
(`annoserve`).  `stats` holds the shared rank statistics.
"""

__version__ = "0.1.0"
