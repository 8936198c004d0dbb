import json
import math
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from btsimp.errors import DegenerateInput, ShapeError
from btsimp.metrics import ReadabilityStats, bleu, count_syllables, fkgl, sari

from oracles import oracle_bleu, oracle_sari, oracle_syllables

GOLDEN = Path(__file__).parent / "golden"

word_st = st.sampled_from(["the", "cat", "dog", "sat", "ran", "big", "mat", "saw"])
sentence_st = st.lists(word_st, min_size=1, max_size=9).map(tuple)


def _load(name):
    return json.loads((GOLDEN / name).read_text())


def _as_sentences(rows):
    return [tuple(r) for r in rows]


# ---------------------------------------------------------------- syllables


@pytest.mark.parametrize(
    "word,expected",
    [("cat", 1), ("tired", 2), ("table", 2), ("the", 1), ("banana", 3), ("123", 1), (".", 1)],
)
def test_count_syllables_cases(word, expected):
    assert count_syllables(word) == expected


@given(st.text(alphabet="abcdefglmnorstuy", min_size=1, max_size=10))
def test_count_syllables_matches_oracle(word):
    assert count_syllables(word) == oracle_syllables(word)


def test_count_syllables_empty_word():
    with pytest.raises(DegenerateInput):
        count_syllables("")


# --------------------------------------------------------------------- fkgl


def test_fkgl_arithmetic():
    # 1 sentence, 10 words, 15 syllables -> 0.39*10 + 11.8*1.5 - 15.59.
    words = ["cat"] * 5 + ["tired"] * 5
    stats = fkgl([tuple(words)])
    assert stats.words == 10 and stats.syllables == 15
    assert stats.fkgl == pytest.approx(6.01, abs=1e-12)


def test_fkgl_hand_case():
    stats = fkgl([("The", "cat", "sat", "on", "the", "mat", ".")])
    assert stats.words == 6 and stats.syllables == 6 and stats.sentences == 1
    assert stats.fkgl == pytest.approx(-1.45, abs=1e-12)


def test_fkgl_empty_corpus():
    with pytest.raises(DegenerateInput):
        fkgl([])
    with pytest.raises(DegenerateInput):
        fkgl([(".", "!!")])


def test_fkgl_syllable_covariance():
    base = fkgl([("cat", "dog", "mat", "sun")]).fkgl
    plus = fkgl([("cat", "dog", "mat", "sunny")]).fkgl
    assert plus - base == pytest.approx(11.8 / 4, abs=1e-12)


def test_fkgl_golden():
    for case in _load("fkgl_golden.json"):
        if case["kind"] == "syllables":
            assert count_syllables(case["word"]) == case["expected"]
        else:
            got = fkgl([tuple(s) for s in case["sentences"]]).fkgl
            assert got == pytest.approx(case["expected"], abs=1e-9)


# --------------------------------------------------------------------- sari


def test_sari_identity_triple_is_perfect():
    rows = [("a", "b", "c", "d"), ("the", "cat", "sat", "on", "a", "mat")]
    report = sari(rows, rows, [[r] for r in rows])
    assert (report.sari, report.f_keep, report.f_del, report.f_add) == (100.0, 100.0, 100.0, 100.0)


def test_sari_disjoint_output_zeroes_keep_and_add():
    src = ("a", "b", "c", "d", "e")
    out = ("v", "w", "x", "y", "z")
    report = sari([src], [out], [[src]])
    assert report.f_keep == 0.0
    assert report.f_add == 0.0


def test_sari_mean_identity():
    report = sari(
        [("a", "b", "c", "d")], [("a", "b", "d")], [[("a", "b", "d"), ("a", "d")]]
    )
    assert report.sari == pytest.approx((report.f_keep + report.f_del + report.f_add) / 3, abs=1e-12)


def test_sari_shape_errors():
    with pytest.raises(ShapeError):
        sari([("a",)], [], [])
    with pytest.raises(ShapeError):
        sari([("a",)], [("a",)], [[]])
    with pytest.raises(ShapeError):
        sari([], [], [])


def test_sari_golden_against_oracle():
    cases = _load("sari_golden.json")
    assert len(cases) >= 20
    for case in cases:
        inputs = _as_sentences(case["inputs"])
        outputs = _as_sentences(case["outputs"])
        references = [[tuple(r) for r in refs] for refs in case["references"]]
        report = sari(inputs, outputs, references)
        for key in ("sari", "f_keep", "f_del", "f_add"):
            assert getattr(report, key) == pytest.approx(case["expected"][key], abs=1e-9)


@settings(max_examples=30)
@given(
    st.lists(st.tuples(sentence_st, sentence_st, st.lists(sentence_st, min_size=1, max_size=3)),
             min_size=2, max_size=5),
    st.randoms(),
)
def test_sari_row_permutation_invariance(rows, rnd):
    inputs = [r[0] for r in rows]
    outputs = [r[1] for r in rows]
    references = [r[2] for r in rows]
    before = sari(inputs, outputs, references)
    order = list(range(len(rows)))
    rnd.shuffle(order)
    after = sari([inputs[i] for i in order], [outputs[i] for i in order],
                 [references[i] for i in order])
    assert before == after


@settings(max_examples=30)
@given(
    st.lists(st.tuples(sentence_st, sentence_st, st.lists(sentence_st, min_size=1, max_size=3)),
             min_size=1, max_size=5)
)
def test_sari_matches_oracle_on_random_rows(rows):
    inputs = [r[0] for r in rows]
    outputs = [r[1] for r in rows]
    references = [r[2] for r in rows]
    report = sari(inputs, outputs, references)
    expected = oracle_sari(inputs, outputs, references)
    for key in ("sari", "f_keep", "f_del", "f_add"):
        assert getattr(report, key) == pytest.approx(expected[key], abs=1e-9)


def test_sari_alternative_empty_convention():
    rows = [("a", "b", "c", "d")]
    strict = sari(rows, rows, [[r] for r in rows], vacuous_is_perfect=False)
    assert strict.f_keep == 100.0
    assert strict.f_del == 0.0  # nothing to delete scores 0 under the alternative
    assert strict.f_add == 0.0


# --------------------------------------------------------------------- bleu


def test_bleu_identity_is_100():
    rows = [("the", "cat", "sat", "on", "the", "mat"), ("a", "big", "dog", "ran", "far")]
    assert bleu(rows, [[r] for r in rows]) == 100.0


def test_bleu_disjoint_is_0():
    assert bleu([("x", "y", "z", "w")], [[("a", "b", "c", "d")]]) == 0.0


def test_bleu_brevity_penalty_applies():
    out = [("the", "cat", "sat", "on")]
    refs = [[("the", "cat", "sat", "on", "the", "mat")]]
    got = bleu(out, refs)
    expected = oracle_bleu(out, refs)
    assert got == pytest.approx(expected, abs=1e-9)
    assert 0.0 < got < 100.0
    assert got == pytest.approx(100.0 * math.exp(1 - 6 / 4), abs=1e-9)


def test_bleu_shape_errors():
    with pytest.raises(ShapeError):
        bleu([("a",)], [])
    with pytest.raises(ShapeError):
        bleu([], [])
    with pytest.raises(ShapeError):
        bleu([("a",)], [[]])


def test_bleu_golden_against_oracle():
    cases = _load("bleu_golden.json")
    assert len(cases) >= 20
    for case in cases:
        outputs = _as_sentences(case["outputs"])
        references = [[tuple(r) for r in refs] for refs in case["references"]]
        assert bleu(outputs, references) == pytest.approx(case["expected"], abs=1e-9)


@settings(max_examples=30)
@given(
    st.lists(st.tuples(sentence_st, st.lists(sentence_st, min_size=1, max_size=3)),
             min_size=2, max_size=5),
    st.randoms(),
)
def test_bleu_row_permutation_invariance(rows, rnd):
    outputs = [r[0] for r in rows]
    references = [r[1] for r in rows]
    before = bleu(outputs, references)
    order = list(range(len(rows)))
    rnd.shuffle(order)
    after = bleu([outputs[i] for i in order], [references[i] for i in order])
    assert before == after


def test_readability_stats_fields():
    stats = ReadabilityStats(10, 15, 1, 6.01)
    assert stats.words == 10
