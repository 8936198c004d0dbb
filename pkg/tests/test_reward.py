import numpy as np
import pytest
from hypothesis import given, strategies as st

from btsimp.errors import RangeError
from btsimp.metrics import fkgl
from btsimp.reward import (
    GammaSchedule,
    RewardBundle,
    ZERO_BUNDLE,
    advantage,
    blend_gradients,
    combined_loss,
    gamma_at,
    harmonic_mean,
    total_reward,
)
from btsimp.scorers import EmbeddingTable, FkglStats
from btsimp.textcore import Vocabulary

unit_st = st.floats(1e-6, 1.0)


def test_harmonic_all_ones():
    assert harmonic_mean((1.0, 1.0, 1.0)) == 1.0


def test_harmonic_hand_case():
    assert harmonic_mean((0.5, 1.0, 1.0)) == pytest.approx(0.75, abs=1e-12)


def test_harmonic_zero_convention():
    assert harmonic_mean((0.0, 0.9, 0.9)) == 0.0
    assert harmonic_mean((1e-13, 0.9, 0.9)) == 0.0


def test_harmonic_rejects_negative():
    with pytest.raises(RangeError):
        harmonic_mean((-0.1, 0.5))
    with pytest.raises(RangeError):
        harmonic_mean(())


@given(unit_st)
def test_harmonic_of_equal_values(v):
    assert harmonic_mean((v, v, v)) == pytest.approx(v, rel=1e-12)


@given(st.lists(unit_st, min_size=1, max_size=6))
def test_harmonic_le_arithmetic(values):
    h = harmonic_mean(values)
    assert h <= sum(values) / len(values) + 1e-12


@given(unit_st, unit_st, unit_st)
def test_harmonic_bounded_by_three_times_min(a, b, c):
    assert harmonic_mean((a, b, c)) <= 3 * min(a, b, c) + 1e-12


# ------------------------------------------------------------- total reward


class PerfectLM:
    def sentence_logprobs(self, sentence):
        return [0.0] * (len(sentence) + 1)


def _constant_embeddings(tokens, vec=(1.0, 0.0)):
    return EmbeddingTable({t: np.array(vec) for t in tokens}, len(vec))


def test_total_reward_componentwise():
    sentence = ("the", "cat", "sat")
    vocab = Vocabulary({t: 1 for t in sentence}, 100)
    emb = _constant_embeddings(sentence)
    stats = FkglStats(fkgl([sentence]).fkgl, 1.0)
    bundle = total_reward(sentence, sentence, "simple", PerfectLM(), emb, vocab, stats)
    assert bundle.r_f == pytest.approx(1.0, abs=1e-12)
    assert bundle.r_s == pytest.approx(1.0, abs=1e-12)
    assert bundle.r_c == pytest.approx(0.5, abs=1e-12)
    assert bundle.total == pytest.approx(0.75, abs=1e-12)


def test_total_reward_zero_relevance_zeroes_total():
    sentence = ("cat",)
    other = ("dog",)
    vocab = Vocabulary({"cat": 1, "dog": 1}, 100)
    emb = _constant_embeddings(("cat",))  # "dog" unknown -> zero vector
    stats = FkglStats(0.0, 1.0)
    bundle = total_reward(other, sentence, "simple", PerfectLM(), emb, vocab, stats)
    assert bundle.r_s == 0.0
    assert bundle.total == 0.0


def test_total_reward_deterministic():
    sentence = ("the", "cat", "sat")
    vocab = Vocabulary({t: 2 for t in sentence}, 100)
    emb = _constant_embeddings(sentence)
    stats = FkglStats(1.0, 2.0)
    a = total_reward(sentence, sentence, "complex", PerfectLM(), emb, vocab, stats)
    b = total_reward(sentence, sentence, "complex", PerfectLM(), emb, vocab, stats)
    assert a == b


# ---------------------------------------------------------------- advantage


def test_advantage_cases():
    mk = lambda t: RewardBundle(t, t, t, t)
    assert advantage(mk(0.5), mk(0.5)) == 0.0
    assert advantage(mk(0.8), mk(0.5)) == pytest.approx(0.3)


def test_greedy_vs_greedy_advantage_is_zero():
    bundle = RewardBundle(0.9, 0.8, 0.7, 0.79)
    assert advantage(bundle, bundle) == 0.0


@given(st.floats(0, 1), st.floats(0, 1))
def test_advantage_bounded(a, b):
    mk = lambda t: RewardBundle(t, t, t, t)
    assert -1.0 <= advantage(mk(a), mk(b)) <= 1.0


def test_zero_bundle():
    assert ZERO_BUNDLE.total == 0.0


# -------------------------------------------------------------------- gamma


def test_gamma_zero_before_ramp():
    schedule = GammaSchedule(ramp_start=100, ramp_length=200)
    assert gamma_at(schedule, 0) == 0.0
    assert gamma_at(schedule, 99) == 0.0


def test_gamma_midpoint():
    schedule = GammaSchedule(ramp_start=100, ramp_length=200)
    assert gamma_at(schedule, 200) == pytest.approx(0.45, abs=1e-12)


def test_gamma_saturates():
    schedule = GammaSchedule(ramp_start=0, ramp_length=100)
    assert gamma_at(schedule, 10_000) == pytest.approx(0.9, abs=1e-3)


@given(st.integers(0, 5000), st.integers(0, 5000))
def test_gamma_monotone(a, b):
    schedule = GammaSchedule(ramp_start=50, ramp_length=300)
    lo, hi = sorted((a, b))
    assert gamma_at(schedule, lo) <= gamma_at(schedule, hi)
    assert 0.0 <= gamma_at(schedule, hi) <= 0.9


def test_gamma_validation():
    with pytest.raises(RangeError):
        GammaSchedule(gamma_max=1.5)
    with pytest.raises(RangeError):
        gamma_at(GammaSchedule(), -1)


# ------------------------------------------------------------ combined loss


def test_combined_loss_endpoints():
    assert combined_loss(2.0, 4.0, 0.0) == 2.0
    assert combined_loss(2.0, 4.0, 1.0) == 4.0
    assert combined_loss(2.0, 4.0, 0.5) == 3.0


def test_combined_loss_gamma_range():
    with pytest.raises(RangeError):
        combined_loss(1.0, 1.0, 1.5)


def test_blend_gradients_gamma_zero_returns_ce_untouched():
    ce = {"a": np.array([1.0, 2.0])}
    pg = {"a": np.array([5.0, 5.0])}
    assert blend_gradients(ce, pg, 0.0) is ce


def test_blend_gradients_mixes():
    ce = {"a": np.array([1.0, 2.0])}
    pg = {"a": np.array([3.0, 4.0])}
    out = blend_gradients(ce, pg, 0.5)
    assert np.allclose(out["a"], [2.0, 3.0])


def test_blend_gradients_zero_pg_equals_scaled_ce():
    ce = {"a": np.array([1.0, -2.0]), "b": np.array([0.5])}
    pg = {k: np.zeros_like(v) for k, v in ce.items()}
    out = blend_gradients(ce, pg, 0.3)
    for k in ce:
        assert np.array_equal(out[k], (1.0 - 0.3) * ce[k])
