import io

import pytest

from infolab.distractors import (REASON_FREQUENCY, REASON_NO_FREQUENCY,
                                 REASON_RELATION, DistractorSet,
                                 InsufficientCandidatesError,
                                 candidate_fillers, select_distractors)
from infolab.resources import (FreqTable, RelationSet, load_ngrams,
                               load_relations, load_unigram_freq)


def ngrams(*rows):
    text = "\n".join(rows) + "\n"
    return load_ngrams(io.StringIO(text), min_counts={3: 1, 4: 1, 5: 1})


def test_candidates_come_from_matching_slots():
    table = ngrams(
        "9\tthe/OTHER\ttest/NOUN\tfailed/VERB",   # slot: order 3, position 1
        "9\tthe/OTHER\texam/NOUN\tfailed/VERB",   # exam fills that slot
        "9\tthe/OTHER\ttrial/NOUN\tfailed/VERB",
        "9\ta/OTHER\tshot/NOUN\tmissed/VERB",     # same (3, 1) slot
        "9\tto/OTHER\ttest/VERB\tit/OTHER",       # verb reading: POS mismatch
        "9\tit/OTHER\twas/VERB\tluck/NOUN",       # position 2: not a slot
    )
    got = candidate_fillers(("test", "NOUN"), table)
    # "was" has the right position but the wrong POS; "luck" the wrong position
    assert got == {"exam", "trial", "shot"}


def test_candidates_respect_order_and_position():
    table = ngrams(
        "9\ttest/NOUN\tcases/NOUN\tpass/VERB",            # slot (3, 0)
        "9\tthe/OTHER\tbest/ADJ\ttest/NOUN\tyet/OTHER",   # slot (4, 2)
        "9\tdemo/NOUN\truns/VERB\tfail/VERB",             # (3, 0) -> candidate
        "9\tthe/OTHER\told/ADJ\tgame/NOUN\tyet/OTHER",    # (4, 2) -> candidate
        "9\tthe/OTHER\tgame/NOUN\tends/VERB",             # (3, 1): not a slot
        "9\tlab/NOUN\twork/NOUN\tpays/VERB\toff/OTHER",   # (4, 0): not a slot
    )
    got = candidate_fillers(("test", "NOUN"), table)
    assert got == {"demo", "game"}
    assert "lab" not in got and "work" not in got


def test_candidates_case_fold_and_exclude_target():
    table = ngrams(
        "9\tthe/OTHER\tTest/NOUN\tfailed/VERB",
        "9\tthe/OTHER\ttest/NOUN\tpassed/VERB",
        "9\tthe/OTHER\tExam/NOUN\tfailed/VERB",
    )
    got = candidate_fillers(("test", "NOUN"), table)
    assert got == {"exam"}


def test_candidates_empty_when_target_absent():
    table = ngrams("9\tthe/OTHER\texam/NOUN\tfailed/VERB")
    assert candidate_fillers(("test", "NOUN"), table) == set()


def _fixture():
    candidates = {"exam", "quiz", "trial", "shot", "game", "match", "probe"}
    relations = RelationSet({("test", "NOUN"): {"exam", "trial"}})
    freqs = FreqTable({"test": 100, "quiz": 150, "shot": 400, "game": 90,
                       "match": 100, "exam": 500, "trial": 500})
    # probe has no frequency entry at all
    return candidates, relations, freqs


def test_filters_and_log():
    candidates, relations, freqs = _fixture()
    dset = select_distractors(("test", "NOUN"), candidates, relations, freqs,
                              k=3, seed=1)
    assert dset.filter_log["exam"] == REASON_RELATION
    assert dset.filter_log["trial"] == REASON_RELATION
    assert dset.filter_log["game"] == REASON_FREQUENCY  # 90 < 100
    assert dset.filter_log["probe"] == REASON_NO_FREQUENCY
    # survivors: quiz, shot, match (count >= target's own 100)
    assert set(dset.distractors) == {"quiz", "shot", "match"}
    assert dset.candidate_pool_size == 7


def test_selection_is_seeded_and_stable():
    candidates, relations, freqs = _fixture()
    a = select_distractors(("test", "NOUN"), candidates, relations, freqs,
                           k=2, seed=5)
    b = select_distractors(("test", "NOUN"), candidates, relations, freqs,
                           k=2, seed=5)
    assert a.distractors == b.distractors
    c = select_distractors(("test", "NOUN"), set(candidates), relations,
                           freqs, k=2, seed=6)
    assert set(c.distractors) <= {"quiz", "shot", "match"}


def test_insufficient_candidates():
    candidates, relations, freqs = _fixture()
    with pytest.raises(InsufficientCandidatesError) as err:
        select_distractors(("test", "NOUN"), candidates, relations, freqs,
                           k=4, seed=0)
    assert err.value.survivors == 3
    assert "test" in str(err.value)


def test_absent_target_frequency_passes_everything_counted():
    candidates = {"a1", "a2"}
    freqs = FreqTable({"a1": 1, "a2": 2})
    dset = select_distractors(("zzz", "NOUN"), candidates,
                              RelationSet({}), freqs, k=2, seed=0)
    assert set(dset.distractors) == {"a1", "a2"}


def test_distractor_set_validation():
    with pytest.raises(ValueError):
        DistractorSet(("t", "NOUN"), ("a", "a"), 2, 0)
    with pytest.raises(ValueError):
        DistractorSet(("t", "NOUN"), ("t", "b"), 2, 0)


def test_to_dict_shapes():
    dset = DistractorSet(("t", "NOUN"), ("a", "b"), 9, 3, {"c": REASON_RELATION})
    d = dset.to_dict()
    assert d == {"target": "t", "pos": "NOUN", "distractors": ["a", "b"],
                 "seed": 3, "pool_size": 9}
    assert dset.to_dict(verbose=True)["filter_log"] == {"c": REASON_RELATION}
