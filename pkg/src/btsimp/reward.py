"""Reward combination, baselines, and the policy-gradient mixing schedule.

The total reward for a generated sentence is the harmonic mean of fluency,
relevance, and complexity rewards; a zero component zeroes the total. The
advantage subtracts the greedy-decoded baseline's total. The mixing weight
gamma ramps from 0 toward its maximum along a logistic curve.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import RangeError
from .metrics import fkgl
from .scorers import (
    FkglStats,
    complexity_reward,
    fluency_reward,
    logistic,
    relevance_reward,
    sentence_vector,
)
from .textcore import Sentence

ZERO_EPS = 1e-12


def harmonic_mean(values) -> float:
    """n / sum(1/v); zero (within 1e-12) components pull the mean to 0."""
    values = list(values)
    if not values:
        raise RangeError("harmonic mean of an empty list")
    if any(v < 0 for v in values):
        raise RangeError(f"harmonic mean needs non-negative values, got {values}")
    if any(v <= ZERO_EPS for v in values):
        return 0.0
    return len(values) / sum(1.0 / v for v in values)


@dataclass(frozen=True)
class RewardBundle:
    r_f: float
    r_s: float
    r_c: float
    total: float
    advantage: float = 0.0


ZERO_BUNDLE = RewardBundle(0.0, 0.0, 0.0, 0.0)


def total_reward(
    sentence: Sentence,
    model_input: Sentence,
    side: str,
    lm,
    emb,
    vocab,
    stats: FkglStats,
    sif_a: float = 1e-3,
) -> RewardBundle:
    """Score one generated sentence against the input it was decoded from.

    Fluency comes from the given side's language model, relevance from the
    cosine of the two sentence vectors, complexity from the sentence's own
    grade level normalized by the corpus statistics.
    """
    r_f = fluency_reward(lm, sentence)
    v_in = sentence_vector(emb, model_input, vocab, sif_a)
    v_out = sentence_vector(emb, sentence, vocab, sif_a)
    r_s = relevance_reward(v_in, v_out)
    r_c = complexity_reward(fkgl([sentence]).fkgl, stats, side)
    return RewardBundle(r_f, r_s, r_c, harmonic_mean((r_f, r_s, r_c)))


def advantage(sample_bundle: RewardBundle, greedy_bundle: RewardBundle) -> float:
    """Self-critical advantage: sampled total minus greedy-baseline total."""
    return sample_bundle.total - greedy_bundle.total


@dataclass(frozen=True)
class GammaSchedule:
    """Logistic ramp of the policy-gradient weight, saturating at gamma_max."""

    gamma_max: float = 0.9
    ramp_start: int = 0
    ramp_length: int = 1000
    slope: float = 8.0

    def __post_init__(self):
        if not 0.0 <= self.gamma_max <= 1.0:
            raise RangeError("gamma_max must lie in [0, 1]")
        if self.ramp_length < 1:
            raise RangeError("ramp_length must be >= 1")


def gamma_at(schedule: GammaSchedule, step: int) -> float:
    """0 before the ramp; gamma_max * logistic along it; clamped to the cap."""
    if step < 0:
        raise RangeError(f"step must be >= 0, got {step}")
    if step < schedule.ramp_start:
        return 0.0
    progress = (step - schedule.ramp_start) / schedule.ramp_length
    value = schedule.gamma_max * logistic(schedule.slope * (progress - 0.5))
    return min(max(value, 0.0), schedule.gamma_max)


def combined_loss(l_ce: float, l_pg: float, gamma: float) -> float:
    """(1 - gamma) * l_ce + gamma * l_pg."""
    if not 0.0 <= gamma <= 1.0:
        raise RangeError(f"gamma must lie in [0, 1], got {gamma}")
    return (1.0 - gamma) * l_ce + gamma * l_pg


def blend_gradients(g_ce, g_pg, gamma: float):
    """Per-parameter (1 - gamma) * ce + gamma * pg; pure ce when gamma is 0."""
    if gamma == 0.0 or g_pg is None:
        return g_ce
    return {k: (1.0 - gamma) * g_ce[k] + gamma * g_pg[k] for k in g_ce}
