"""Builders shared across test modules."""

from infolab.corpus import Sentence, Token


def make_sentence(words, doc_id="d0", sent_id="s0", pos="OTHER"):
    """Sentence from plain forms; `pos` is one tag for all or a list."""
    tags = [pos] * len(words) if isinstance(pos, str) else list(pos)
    toks = tuple(Token(w, w.lower(), t) for w, t in zip(words, tags))
    return Sentence(toks, doc_id, sent_id)
