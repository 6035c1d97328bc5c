"""
Score cloze slots with a trigram model and pick distractors
===========================================================
"""

import io

from infolab import synth
from infolab.corpus import SLOT_TOKEN, MaskedSentence
from infolab.distractors import candidate_fillers, select_distractors
from infolab.lm import score_sentence, slot_scores, train_trigram
from infolab.resources import load_ngrams, load_relations, load_unigram_freq

world = synth.separable_cloze_world(seed=0)
lm = train_trigram(world.store)

# full-sentence log10 score, padded with sentence boundaries
sent = world.store.sentences[0]
forms = tuple(tok.form for tok in sent.tokens)
print("sentence:", " ".join(forms))
print("log10 score:", round(score_sentence(lm, forms), 3))

# ranking fillers for one slot only needs the trigram windows that
# touch it, the rest of the sentence cancels
slot = len(forms) // 2
masked = MaskedSentence(forms[:slot] + (SLOT_TOKEN,) + forms[slot + 1:],
                        slot, forms[slot])
fillers = [forms[slot], "dax0", "blick"]
for filler, s in sorted(slot_scores(lm, masked, fillers).items(),
                        key=lambda kv: -kv[1]):
    print(f"  {filler:>8}  {s:8.3f}")

# distractor selection works from three plain TSV tables.  Candidates
# share an n-gram slot with the target; relatives and rarer words are
# filtered, then a seeded shuffle draws k.
rows = [(50, "cat"), (45, "dog"), (44, "fox"), (43, "own"), (42, "hen")]
ngrams = load_ngrams(io.StringIO("".join(
    f"{c}\tthe/OTHER\t{w}/NOUN\tslept/VERB\n" for c, w in rows)),
    min_counts={3: 1})
freqs = load_unigram_freq(io.StringIO(
    "cat\t100\ndog\t300\nfox\t150\nown\t20\nhen\t120\n"))
rels = load_relations(io.StringIO("cat\tNOUN\thypernym\tdog\n"))

cands = candidate_fillers(("cat", "NOUN"), ngrams)
picked = select_distractors(("cat", "NOUN"), cands, rels, freqs, k=2, seed=1)
print("candidates:", sorted(cands))
print("distractors:", picked.distractors)
print("filtered:", picked.filter_log)
