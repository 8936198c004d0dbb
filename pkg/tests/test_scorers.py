import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from btsimp.errors import (
    CheckpointError,
    ConfigError,
    DegenerateInput,
    EmptyCorpus,
    RangeError,
    ShapeError,
)
from btsimp.scorers import (
    EOS,
    EmbeddingTable,
    FkglStats,
    NGramLM,
    complexity_reward,
    corpus_fkgl_stats,
    fluency_reward,
    load_embeddings,
    perplexity,
    relevance_reward,
    save_embeddings,
    sentence_vector,
    train_embeddings,
    train_lm,
)
from btsimp.textcore import Corpus, Vocabulary, make_rng


def _corpus(lines, tag="unlabeled"):
    return Corpus(tuple(tuple(line.split()) for line in lines), tag)


# ------------------------------------------------------------------- n-gram LM


def test_lm_concentrates_on_repeated_token():
    # A corpus of nothing but the token "a": the conditional tends to 1 as
    # the corpus grows (boundary events keep it just below).
    lm = train_lm(_corpus(["a " * 20] * 100), order=3)
    assert lm.conditional("a", ()) >= 0.9
    assert lm.conditional("a", ("a", "a")) >= 0.9
    small = train_lm(_corpus(["a " * 20] * 5), order=3)
    assert lm.conditional("a", ("a", "a")) > small.conditional("a", ("a", "a"))


def test_lm_conditionals_sum_to_one():
    corpus = _corpus(["a b c", "b c a", "c a b", "a c b"])
    lm = train_lm(corpus, order=3)
    rng = make_rng(3)
    tokens = sorted(lm.vocab_tokens)
    histories = [()]
    for _ in range(100):
        length = rng.randint(4)
        histories.append(tuple(tokens[rng.randint(len(tokens))] for _ in range(length)))
    for history in histories:
        total = sum(lm.conditional(t, history) for t in tokens)
        total += lm.conditional("COMPLETELY-UNSEEN", history)
        assert total == pytest.approx(1.0, abs=1e-9)


def test_lm_positive_probability_everywhere():
    lm = train_lm(_corpus(["a b", "b a"]), order=2)
    for token in lm.vocab_tokens:
        assert lm.conditional(token, ("never", "seen", "history")) > 0.0


def test_lm_perplexity_separates_sides():
    simple = _corpus(["the cat sat", "the dog ran", "a cat ran", "a dog sat"] * 5)
    complex_side = _corpus(
        ["notwithstanding the feline reposed", "whereupon the canine perambulated"] * 5
    )
    lm_s = train_lm(simple, order=3)
    lm_c = train_lm(complex_side, order=3)
    assert perplexity(lm_s, simple) < perplexity(lm_s, complex_side)
    assert perplexity(lm_c, complex_side) < perplexity(lm_c, simple)


def test_lm_empty_corpus():
    with pytest.raises(EmptyCorpus):
        train_lm(Corpus((), "simple"))


def test_lm_weight_validation():
    with pytest.raises(RangeError):
        train_lm(_corpus(["a b"]), order=2, weights=(0.5, 0.6))
    with pytest.raises(RangeError):
        train_lm(_corpus(["a b"]), order=2, weights=(1.0,))


def test_lm_save_load_roundtrip(tmp_path):
    lm = train_lm(_corpus(["a b c", "c b a"]), order=3)
    path = tmp_path / "lm.bin"
    lm.save(path)
    loaded = NGramLM.load(path)
    assert loaded.event_counts == lm.event_counts
    assert loaded.context_counts == lm.context_counts
    assert loaded.weights == lm.weights
    probe = ("a", "b", "c")
    assert loaded.sentence_logprobs(probe) == lm.sentence_logprobs(probe)


def test_lm_load_rejects_truncated(tmp_path):
    lm = train_lm(_corpus(["a b"]), order=2)
    path = tmp_path / "lm.bin"
    lm.save(path)
    path.write_bytes(path.read_bytes()[:10])
    with pytest.raises(CheckpointError):
        NGramLM.load(path)


def test_lm_load_rejects_version_mismatch(tmp_path):
    import pickle

    path = tmp_path / "lm.bin"
    with open(path, "wb") as fh:
        pickle.dump({"format_version": 999}, fh)
    with pytest.raises(CheckpointError):
        NGramLM.load(path)


# -------------------------------------------------------------------- fluency


class FixedLM:
    """Assigns a fixed probability to every event."""

    def __init__(self, p):
        self.p = p

    def sentence_logprobs(self, sentence):
        return [math.log(self.p)] * (len(sentence) + 1)


def test_fluency_uniform_lm():
    assert fluency_reward(FixedLM(1 / 50), ("a", "b", "c")) == pytest.approx(1 / 50, abs=1e-12)


def test_fluency_deterministic_lm():
    assert fluency_reward(FixedLM(1.0), ("a", "b")) == pytest.approx(1.0, abs=1e-12)


def test_fluency_monotone_in_token_probability():
    class TwoTokenLM:
        def __init__(self, p_b):
            self.p = {"a": 0.5, "b": p_b}

        def sentence_logprobs(self, sentence):
            return [math.log(self.p[t]) for t in sentence] + [math.log(0.5)]

    high = fluency_reward(TwoTokenLM(0.5), ("a", "b"))
    low = fluency_reward(TwoTokenLM(0.1), ("a", "b"))
    assert low < high


def test_fluency_equals_exp_negative_cross_entropy():
    lm = train_lm(_corpus(["a b c", "b a c", "c c a"]), order=3)
    sentence = ("a", "b", "c")
    logs = lm.sentence_logprobs(sentence)
    cross_entropy = -sum(logs) / len(logs)
    assert fluency_reward(lm, sentence) == pytest.approx(math.exp(-cross_entropy), abs=1e-12)


def test_fluency_rejects_empty():
    with pytest.raises(DegenerateInput):
        fluency_reward(FixedLM(0.5), ())


def test_fluency_in_unit_interval():
    lm = train_lm(_corpus(["a b", "b a", "a a"]), order=2)
    for sentence in [("a",), ("a", "b"), ("b", "b", "b")]:
        assert 0.0 < fluency_reward(lm, sentence) <= 1.0


# ----------------------------------------------------------------- embeddings


def test_embeddings_deterministic():
    corpus = _corpus(["a b c d", "b c d a", "d a b c"] * 3)
    e1 = train_embeddings([corpus], dim=3)
    e2 = train_embeddings([corpus], dim=3)
    assert e1.dim == 3
    for token in e1.vectors:
        assert np.array_equal(e1.vectors[token], e2.vectors[token])


def test_embeddings_identical_contexts_identical_vectors():
    # "x" and "y" occur in exactly the same contexts with the same counts.
    lines = []
    for mid in ("x", "y"):
        lines += [f"a {mid} b", f"c {mid} d", f"b {mid} a", f"d {mid} c"]
    emb = train_embeddings([_corpus(lines)], dim=2)
    assert np.allclose(emb.vectors["x"], emb.vectors["y"], atol=1e-9)


def test_embeddings_dim_validation():
    with pytest.raises(ConfigError):
        train_embeddings([_corpus(["a b"])], dim=1)
    with pytest.raises(ConfigError):
        train_embeddings([_corpus(["a b a b"])], dim=5)


def test_embeddings_synonyms_beat_random_candidates():
    # A word's true synonym scores above the median random complex-side
    # word. (Same-class template twins are distributionally identical by
    # construction, so they are not a meaningful null here.)
    from btsimp import synthdata

    ds = synthdata.generate(synthdata.ToyGrammarConfig(seed=3), 1500, 1500, 10, 10)
    emb = train_embeddings([ds.embedding_corpus], dim=16)
    rng = make_rng(0)

    def cosine(a, b):
        u, v = emb.vectors[a], emb.vectors[b]
        return float(u @ v / (np.linalg.norm(u) * np.linalg.norm(v)))

    pairs = list(ds.lexicon.synonym_map.items())
    complex_vocab = sorted(set(ds.lexicon.synonym_map.values()))
    synonym_cosines = [cosine(s, c) for s, c in pairs]
    mismatched = []
    for s, c in pairs:
        for _ in range(8):
            other = complex_vocab[rng.randint(len(complex_vocab))]
            if other != c:
                mismatched.append(cosine(s, other))
    assert np.mean(synonym_cosines) > np.median(mismatched)


def test_embeddings_file_roundtrip(tmp_path):
    emb = train_embeddings([_corpus(["a b c d", "d c b a"] * 2)], dim=2)
    path = tmp_path / "vectors.txt"
    save_embeddings(emb, path)
    loaded = load_embeddings(path)
    assert loaded.dim == emb.dim
    for token, vec in emb.vectors.items():
        assert np.allclose(loaded.vectors[token], vec, atol=0)


def test_load_embeddings_dim_mismatch(tmp_path):
    path = tmp_path / "vectors.txt"
    path.write_text("a 1.0 2.0\nb 1.0\n")
    with pytest.raises(ShapeError):
        load_embeddings(path)


# ------------------------------------------------------------ sentence vector


def _table(vectors):
    dim = len(next(iter(vectors.values())))
    return EmbeddingTable({k: np.array(v, dtype=float) for k, v in vectors.items()}, dim)


def test_sentence_vector_single_token():
    emb = _table({"cat": [2.0, 0.0]})
    vocab = Vocabulary({"cat": 1, "pad": 999}, 100)
    vec = sentence_vector(emb, ("cat",), vocab, a=1e-3)
    weight = 1e-3 / (1e-3 + vocab.probability("cat"))
    assert np.allclose(vec, weight * np.array([2.0, 0.0]))


def test_sentence_vector_all_unknown():
    emb = _table({"cat": [1.0, 1.0]})
    vocab = Vocabulary({"cat": 1}, 100)
    assert np.array_equal(sentence_vector(emb, ("dog", "bird"), vocab), np.zeros(2))


def test_sentence_vector_halving_weight():
    # A token with p(w) = a gets exactly half the weight of a token with
    # p(w) ~ 0 (not in the vocabulary counts).
    a = 1e-3
    emb = _table({"common": [1.0, 0.0], "rare": [1.0, 0.0]})
    vocab = Vocabulary({"common": 1, "filler": 999}, 100)
    assert vocab.probability("common") == pytest.approx(a)
    common_vec = sentence_vector(emb, ("common",), vocab, a)
    rare_vec = sentence_vector(emb, ("rare",), vocab, a)
    assert common_vec[0] == pytest.approx(rare_vec[0] / 2, abs=1e-12)


def test_sentence_vector_validates_a():
    emb = _table({"cat": [1.0]})
    with pytest.raises(RangeError):
        sentence_vector(emb, ("cat",), Vocabulary({"cat": 1}, 100), a=0.0)


# -------------------------------------------------------------------- cosine


def test_relevance_identical():
    v = np.array([1.0, 2.0, 3.0])
    assert relevance_reward(v, v) == pytest.approx(1.0, abs=1e-12)


def test_relevance_orthogonal_and_opposite():
    assert relevance_reward([1.0, 0.0], [0.0, 1.0]) == 0.0
    assert relevance_reward([1.0, 0.0], [-1.0, 0.0]) == 0.0


def test_relevance_zero_vector():
    assert relevance_reward([0.0, 0.0], [1.0, 1.0]) == 0.0


def test_relevance_shape_mismatch():
    with pytest.raises(ShapeError):
        relevance_reward([1.0, 2.0], [1.0, 2.0, 3.0])


@given(st.lists(st.floats(-5, 5), min_size=2, max_size=5))
def test_relevance_symmetric(values):
    u = np.array(values)
    v = np.array(values[::-1])
    assert relevance_reward(u, v) == relevance_reward(v, u)


# ----------------------------------------------------------- complexity

def test_fkgl_stats_identical_sentences_hit_floor():
    corpus = _corpus(["the cat sat"] * 5)
    stats = corpus_fkgl_stats(corpus)
    assert stats.std == pytest.approx(1e-6)


def test_fkgl_stats_two_sentence_mean():
    from btsimp.metrics import fkgl

    s1 = ("the", "cat", "sat")
    s2 = ("a", "tremendous", "elephant", "ambled", "away")
    f1 = fkgl([s1]).fkgl
    f2 = fkgl([s2]).fkgl
    stats = corpus_fkgl_stats(Corpus((s1, s2), "unlabeled"))
    assert stats.mean == pytest.approx((f1 + f2) / 2, abs=1e-12)


def test_fkgl_stats_deterministic():
    corpus = _corpus(["the cat sat", "a dog ran far", "tired voices sound"])
    a = corpus_fkgl_stats(corpus)
    b = corpus_fkgl_stats(corpus)
    assert a == b


def test_fkgl_stats_degenerate():
    with pytest.raises(DegenerateInput):
        corpus_fkgl_stats(_corpus(["the cat sat"]))


def test_complexity_reward_at_mean():
    stats = FkglStats(5.0, 2.0)
    assert complexity_reward(5.0, stats, "simple") == pytest.approx(0.5)
    assert complexity_reward(5.0, stats, "complex") == pytest.approx(0.5)


def test_complexity_reward_limits():
    stats = FkglStats(0.0, 1.0)
    assert complexity_reward(1e3, stats, "complex") == pytest.approx(1.0, abs=1e-9)
    assert complexity_reward(1e3, stats, "simple") == pytest.approx(0.0, abs=1e-9)


@given(st.floats(-30, 30))
def test_complexity_rewards_sum_to_one(value):
    stats = FkglStats(2.0, 3.0)
    total = complexity_reward(value, stats, "simple") + complexity_reward(value, stats, "complex")
    assert total == pytest.approx(1.0, abs=1e-12)


@given(st.floats(-20, 20), st.floats(-20, 20))
def test_complexity_reward_monotone(a, b):
    if abs(a - b) < 1e-6:
        return
    lo, hi = sorted((a, b))
    stats = FkglStats(1.0, 2.0)
    assert complexity_reward(hi, stats, "complex") > complexity_reward(lo, stats, "complex")
    assert complexity_reward(hi, stats, "simple") < complexity_reward(lo, stats, "simple")


def test_fkgl_stats_requires_positive_std():
    with pytest.raises(RangeError):
        FkglStats(0.0, 0.0)


def test_eos_constant_is_reserved():
    lm = train_lm(_corpus(["a b"]), order=2)
    assert EOS in lm.vocab_tokens
