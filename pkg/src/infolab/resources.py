"""Lexical resources for distractor selection.

Three tables, all immutable after loading:

* `NgramTable` -- POS-tagged 3/4/5-grams with counts, from a TSV of the
  form ``count<TAB>w1/pos1<TAB>w2/pos2<TAB>...``
* `FreqTable`  -- unigram counts, from ``word<TAB>count`` lines
* `RelationSet` -- per (lemma, pos) sets of synonyms/hyponyms/hypernyms,
  from ``lemma<TAB>pos<TAB>relation<TAB>related_lemma`` lines

`extract_wordnet_relations` turns WordNet database files into the
relations TSV; it lives here so the bundled script stays a thin wrapper.
"""

from __future__ import annotations

import logging
from pathlib import Path

from .errors import ParseError

log = logging.getLogger(__name__)

NGRAM_ORDERS = (3, 4, 5)
DEFAULT_MIN_COUNTS = {3: 40, 4: 20, 5: 5}
RELATION_KINDS = ("synonym", "hyponym", "hypernym")


class NgramTable:
    def __init__(self, entries: dict[tuple[tuple[str, str], ...], int]):
        for key, count in entries.items():
            if len(key) not in NGRAM_ORDERS:
                raise ValueError(f"n-gram order {len(key)} outside {NGRAM_ORDERS}")
            if count < 1:
                raise ValueError("n-gram counts must be >= 1")
        self.entries = dict(entries)

    def __len__(self):
        return len(self.entries)

    def by_order(self, order: int):
        return {k: c for k, c in self.entries.items() if len(k) == order}


class FreqTable:
    """Word -> count; absent words are reported as None, never 0."""

    def __init__(self, counts: dict[str, int]):
        self.counts = dict(counts)

    def get(self, word: str) -> int | None:
        return self.counts.get(word.lower())

    def __contains__(self, word):
        return word.lower() in self.counts

    def __len__(self):
        return len(self.counts)


class RelationSet:
    def __init__(self, relations: dict[tuple[str, str], set[str]]):
        self.relations = {}
        for (lemma, pos), rel in relations.items():
            self.relations[(lemma.lower(), pos)] = {r for r in rel if r != lemma.lower()}

    def related(self, lemma: str, pos: str) -> set[str]:
        return self.relations.get((lemma.lower(), pos), set())


def load_ngrams(stream, min_counts: dict[int, int] | None = None) -> NgramTable:
    """Parse the n-gram TSV, keeping entries with count >= min_counts[order]."""
    if min_counts is None:
        min_counts = DEFAULT_MIN_COUNTS
    entries = {}
    for line_no, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            continue
        fields = line.split("\t")
        if not (1 + min(NGRAM_ORDERS) <= len(fields) <= 1 + max(NGRAM_ORDERS)):
            raise ParseError(f"expected a count and 3-5 word/pos fields, got "
                             f"{len(fields)} fields", line_no)
        try:
            count = int(fields[0])
        except ValueError:
            raise ParseError(f"bad count {fields[0]!r}", line_no) from None
        if count < 1:
            raise ParseError(f"count must be >= 1, got {count}", line_no)
        gram = []
        for field in fields[1:]:
            if "/" not in field:
                raise ParseError(f"token {field!r} lacks a /pos suffix", line_no)
            form, pos = field.rsplit("/", 1)
            if not form or not pos:
                raise ParseError(f"bad token {field!r}", line_no)
            gram.append((form, pos))
        order = len(gram)
        if count >= min_counts.get(order, 1):
            entries[tuple(gram)] = count
    return NgramTable(entries)


def load_unigram_freq(stream) -> FreqTable:
    """Parse ``word<TAB>count`` lines; duplicate words keep the later count."""
    counts: dict[str, int] = {}
    for line_no, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise ParseError(f"expected word<TAB>count, got {len(fields)} fields", line_no)
        word = fields[0].lower()
        try:
            count = int(fields[1])
        except ValueError:
            raise ParseError(f"bad count {fields[1]!r}", line_no) from None
        if word in counts:
            log.warning("duplicate frequency entry for %r at line %d; keeping the later value",
                        word, line_no)
        counts[word] = count
    return FreqTable(counts)


def load_relations(stream) -> RelationSet:
    """Parse the relations TSV into a RelationSet (self-pairs dropped)."""
    relations: dict[tuple[str, str], set[str]] = {}
    for line_no, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise ParseError(f"expected 4 fields, got {len(fields)}", line_no)
        lemma, pos, relation, related = fields
        if relation not in RELATION_KINDS:
            raise ParseError(f"unknown relation {relation!r}", line_no)
        lemma = lemma.lower()
        related = related.lower()
        if lemma == related:
            continue
        relations.setdefault((lemma, pos), set()).add(related)
    return RelationSet(relations)


# --- WordNet database extraction -------------------------------------------

_WN_POS_FILES = {"NOUN": ("noun", "n"), "VERB": ("verb", "v"), "ADJ": ("adj", "a")}
_HYPERNYM_PTRS = {"@", "@i"}
_HYPONYM_PTRS = {"~", "~i"}


def _parse_wn_data(path: Path, pos_letter: str):
    """Yield (offset, words, hypernym_offsets, hyponym_offsets) per synset."""
    with open(path, encoding="utf-8") as f:
        for raw in f:
            if raw.startswith("  "):  # license header
                continue
            fields = raw.split(" ")
            offset = fields[0]
            w_cnt = int(fields[3], 16)
            words = [fields[4 + 2 * i].lower() for i in range(w_cnt)]
            base = 4 + 2 * w_cnt
            p_cnt = int(fields[base])
            hypers, hypos = [], []
            for i in range(p_cnt):
                sym, target, tpos = fields[base + 1 + 4 * i: base + 4 + 4 * i]
                if tpos == pos_letter:  # same-POS links only
                    if sym in _HYPERNYM_PTRS:
                        hypers.append(target)
                    elif sym in _HYPONYM_PTRS:
                        hypos.append(target)
            yield offset, words, hypers, hypos


def _walk(offset, link_map, depth):
    """Offsets reachable within `depth` steps along one link direction."""
    frontier = {offset}
    seen = set()
    for _ in range(depth):
        frontier = {t for o in frontier for t in link_map.get(o, ())} - seen - {offset}
        if not frontier:
            break
        seen |= frontier
    return seen


def extract_wordnet_relations(wordnet_dir, depth: int = 1):
    """Yield relations TSV rows from WordNet `data.noun/verb/adj` files.

    Synonyms are co-members of a synset; hypernyms/hyponyms follow the
    @/~ pointers up to `depth` steps.  Multiword lemmas (underscored) are
    skipped.  Adverbs carry no hierarchy in WordNet and are not extracted.
    """
    wordnet_dir = Path(wordnet_dir)
    for pos, (suffix, letter) in _WN_POS_FILES.items():
        path = wordnet_dir / f"data.{suffix}"
        if not path.exists():
            continue
        synsets = {}
        hyper_map: dict[str, list[str]] = {}
        hypo_map: dict[str, list[str]] = {}
        for offset, words, hypers, hypos in _parse_wn_data(path, letter):
            synsets[offset] = words
            hyper_map[offset] = hypers
            hypo_map[offset] = hypos
        for offset, words in sorted(synsets.items()):
            hyper_words = sorted({w for o in _walk(offset, hyper_map, depth)
                                  for w in synsets.get(o, ())})
            hypo_words = sorted({w for o in _walk(offset, hypo_map, depth)
                                 for w in synsets.get(o, ())})
            for lemma in words:
                if "_" in lemma:
                    continue
                for other in words:
                    if other != lemma and "_" not in other:
                        yield f"{lemma}\t{pos}\tsynonym\t{other}"
                for w in hyper_words:
                    if w != lemma and "_" not in w:
                        yield f"{lemma}\t{pos}\thypernym\t{w}"
                for w in hypo_words:
                    if w != lemma and "_" not in w:
                        yield f"{lemma}\t{pos}\thyponym\t{w}"
