"""Shared fixtures over a tiny in-memory corpus."""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import make_sentence  # noqa: E402

from infolab.corpus import SentenceStore  # noqa: E402


@pytest.fixture
def tiny_store():
    sents = [
        make_sentence(["the", "big", "dog", "barked"], "a", "s0",
                      ["OTHER", "ADJ", "NOUN", "VERB"]),
        make_sentence(["a", "dog", "slept"], "a", "s1",
                      ["OTHER", "NOUN", "VERB"]),
        make_sentence(["the", "cat", "slept"], "b", "s0",
                      ["OTHER", "NOUN", "VERB"]),
    ]
    return SentenceStore(sents)
