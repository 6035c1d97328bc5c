"""POS-tagged sentence store: parsing, masking, and occurrence lookup.

Corpus files are UTF-8 text with one token per line,

    form<TAB>lemma<TAB>pos_fine<TAB>pos_coarse

sentences separated by blank lines, and an optional header line
``# doc_id=<s> sent_id=<s>`` before a block.  POS tagging and
lemmatization happen upstream; this module only consumes the result.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import DuplicateIdError, ParseError

COARSE_TAGS = ("NOUN", "VERB", "ADJ", "ADV", "OTHER")
CONTENT_TAGS = ("NOUN", "VERB", "ADJ", "ADV")

SLOT_TOKEN = "TARGET"
NUMBER_TOKEN = "NUMBER"

# Penn Treebank -> coarse tag. Anything unlisted maps to OTHER.
PTB_TO_COARSE = {
    "NN": "NOUN", "NNS": "NOUN", "NNP": "NOUN", "NNPS": "NOUN",
    "VB": "VERB", "VBD": "VERB", "VBG": "VERB", "VBN": "VERB",
    "VBP": "VERB", "VBZ": "VERB", "MD": "VERB",
    "JJ": "ADJ", "JJR": "ADJ", "JJS": "ADJ",
    "RB": "ADV", "RBR": "ADV", "RBS": "ADV", "WRB": "ADV",
}

# digits, commas, periods, optional leading sign; at least one digit
_NUMERIC_RE = re.compile(r"[+-]?[0-9.,]+")

_HEADER_RE = re.compile(r"#\s*doc_id=(\S+)\s+sent_id=(\S+)\s*$")


def coarse_from_ptb(tag: str) -> str:
    return PTB_TO_COARSE.get(tag, "OTHER")


def is_numeric_form(form: str) -> bool:
    return bool(_NUMERIC_RE.fullmatch(form)) and any(c.isdigit() for c in form)


@dataclass(frozen=True)
class Token:
    form: str
    lemma: str
    pos: str  # coarse tag
    pos_fine: str = "-"

    def __post_init__(self):
        if not self.form:
            raise ValueError("token form must be non-empty")
        if self.pos not in COARSE_TAGS:
            raise ValueError(f"unknown coarse POS tag {self.pos!r}")


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]
    doc_id: str
    sent_id: str

    def __post_init__(self):
        if not self.tokens:
            raise ValueError("sentence must contain at least one token")

    def __len__(self):
        return len(self.tokens)

    @property
    def forms(self) -> list[str]:
        return [t.form for t in self.tokens]


@dataclass(frozen=True)
class MaskedSentence:
    """Token forms with one position replaced by the literal SLOT_TOKEN."""

    tokens: tuple[str, ...]
    slot_index: int
    original_form: str

    def __post_init__(self):
        if not (0 <= self.slot_index < len(self.tokens)):
            raise ValueError("slot_index out of range")
        if self.tokens.count(SLOT_TOKEN) != 1 or self.tokens[self.slot_index] != SLOT_TOKEN:
            raise ValueError(f"masked sentence must contain exactly one {SLOT_TOKEN} at the slot")

    def filled(self, form: str) -> list[str]:
        out = list(self.tokens)
        out[self.slot_index] = form
        return out


class SentenceStore:
    """Immutable collection of sentences plus a (lemma, pos) occurrence index.

    The index keys lemmas lowercased; only NOUN/VERB/ADJ/ADV tokens are
    indexed.  Every lookup result is sorted by (doc_id, sent_id, position).
    """

    def __init__(self, sentences: list[Sentence]):
        self.sentences = tuple(sentences)
        seen = set()
        for s in self.sentences:
            key = (s.doc_id, s.sent_id)
            if key in seen:
                raise DuplicateIdError(f"duplicate sentence id {key}")
            seen.add(key)
        index: dict[tuple[str, str], list[tuple[int, int]]] = {}
        order = sorted(range(len(self.sentences)),
                       key=lambda i: (self.sentences[i].doc_id, self.sentences[i].sent_id))
        for i in order:
            for pos_idx, tok in enumerate(self.sentences[i].tokens):
                if tok.pos in CONTENT_TAGS:
                    index.setdefault((tok.lemma.lower(), tok.pos), []).append((i, pos_idx))
        self._index = index

    def __len__(self):
        return len(self.sentences)

    def occurrences(self, lemma: str, pos: str, min_len: int = 1,
                    max_len: int | None = None) -> list[tuple[Sentence, int]]:
        """All indexed occurrences whose sentence length is within bounds."""
        hits = self._index.get((lemma.lower(), pos), [])
        out = []
        for sent_idx, tok_idx in hits:
            sent = self.sentences[sent_idx]
            if len(sent) < min_len:
                continue
            if max_len is not None and len(sent) > max_len:
                continue
            out.append((sent, tok_idx))
        return out

    def vocabulary(self) -> set[str]:
        return {t.form for s in self.sentences for t in s.tokens}


def parse_tagged_corpus(stream) -> SentenceStore:
    """Parse the tab-separated corpus format into a SentenceStore.

    `stream` is any iterable of lines.  Raises ParseError with the line
    number on malformed lines and DuplicateIdError on repeated ids.
    """
    sentences: list[Sentence] = []
    tokens: list[Token] = []
    doc_id = sent_id = None
    auto_idx = 0

    def flush():
        nonlocal tokens, doc_id, sent_id, auto_idx
        if tokens:
            d = doc_id if doc_id is not None else "_"
            s = sent_id if sent_id is not None else f"s{auto_idx}"
            sentences.append(Sentence(tuple(tokens), d, s))
            auto_idx += 1
        tokens = []
        doc_id = sent_id = None

    for line_no, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            flush()
            continue
        if line.startswith("#"):
            m = _HEADER_RE.match(line)
            if not m:
                raise ParseError(f"bad header line {line!r}", line_no)
            doc_id, sent_id = m.group(1), m.group(2)
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise ParseError(f"expected 4 tab-separated fields, got {len(fields)}", line_no)
        form, lemma, pos_fine, pos_coarse = fields
        if pos_coarse not in COARSE_TAGS:
            raise ParseError(f"unknown coarse POS {pos_coarse!r}", line_no)
        if not form:
            raise ParseError("empty token form", line_no)
        tokens.append(Token(form, lemma, pos_coarse, pos_fine))
    flush()
    return SentenceStore(sentences)


def serialize_tagged_corpus(store: SentenceStore) -> str:
    """Inverse of parse_tagged_corpus (headers included)."""
    blocks = []
    for sent in store.sentences:
        lines = [f"# doc_id={sent.doc_id} sent_id={sent.sent_id}"]
        lines.extend(f"{t.form}\t{t.lemma}\t{t.pos_fine}\t{t.pos}" for t in sent.tokens)
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + ("\n" if blocks else "")


def convert_plain_text(stream, doc_id: str = "plain") -> str:
    """One-sentence-per-line plain text -> tagged format.

    Tokens are whitespace-split; lemma is the lowercased form and the
    coarse tag is OTHER throughout.
    """
    blocks = []
    n = 0
    for raw in stream:
        forms = raw.split()
        if not forms:
            continue
        lines = [f"# doc_id={doc_id} sent_id=s{n}"]
        lines.extend(f"{f}\t{f.lower()}\t-\tOTHER" for f in forms)
        blocks.append("\n".join(lines))
        n += 1
    return "\n\n".join(blocks) + ("\n" if blocks else "")


def normalize_numbers(sentence: Sentence) -> Sentence:
    """Replace numeric token forms (and lemmas) with the NUMBER literal."""
    changed = False
    out = []
    for tok in sentence.tokens:
        if is_numeric_form(tok.form):
            out.append(Token(NUMBER_TOKEN, NUMBER_TOKEN, tok.pos, tok.pos_fine))
            changed = True
        else:
            out.append(tok)
    if not changed:
        return sentence
    return Sentence(tuple(out), sentence.doc_id, sentence.sent_id)


def mask_at(sentence: Sentence, position: int) -> MaskedSentence:
    """Replace the token at `position` with the slot literal."""
    if not (0 <= position < len(sentence)):
        raise IndexError(f"mask position {position} out of range for sentence "
                         f"of length {len(sentence)}")
    forms = sentence.forms
    original = forms[position]
    forms[position] = SLOT_TOKEN
    return MaskedSentence(tuple(forms), position, original)
