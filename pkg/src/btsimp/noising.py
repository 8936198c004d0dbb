"""Asymmetric corruption pipelines for denoising-autoencoder training.

Simple sentences are made to look complex: simple phrases are rewritten to
harder candidates via the reverse rule index, bigrams sampled from a donor
sentence are appended, and the whole sequence is shuffled at the bigram
level. Complex sentences are lightly degraded instead: complex phrases are
rewritten to simpler candidates, frequent words are dropped, and tokens are
shuffled within a bounded displacement window.

Three presets gate the stages:

* ``original``  - drop frequent words + bounded shuffle on both sides
  (machine-translation-style noise, the ablation baseline);
* ``additive``  - simple side adds donor bigrams and complete bigram
  shuffling on top; no phrase substitution anywhere;
* ``full``      - everything, including substitution (the default).

All functions are pure given (inputs, config, RandomSource) and never
return an empty sentence.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import RangeError
from .ppdb import RuleTable
from .textcore import RandomSource, Sentence, Vocabulary, is_frequent

PRESETS = ("original", "additive", "full")


@dataclass(frozen=True)
class NoiseConfig:
    """All noising knobs; defaults follow the reference configuration."""

    p_rep: float = 0.9
    p_del: float = 0.6
    additive_frac_lo: float = 0.25
    additive_frac_hi: float = 0.35
    shuffle_k: int = 3
    preset: str = "full"

    def __post_init__(self):
        if not (0.0 <= self.p_rep <= 1.0 and 0.0 <= self.p_del <= 1.0):
            raise RangeError("p_rep and p_del must lie in [0, 1]")
        if not 0.0 < self.additive_frac_lo <= self.additive_frac_hi < 1.0:
            raise RangeError("additive fraction range must satisfy 0 < lo <= hi < 1")
        if self.shuffle_k < 0:
            raise RangeError("shuffle_k must be non-negative")
        if self.preset not in PRESETS:
            raise RangeError(f"preset must be one of {PRESETS}, got {self.preset!r}")


def substitute(
    sentence: Sentence,
    table: RuleTable,
    direction: str,
    p_rep: float,
    rng: RandomSource,
) -> Sentence:
    """Replace indexed phrases with sampled candidates.

    Scans left to right with longest-match-first, non-overlapping matching
    against the given index direction. Each matched occurrence is consumed
    by the scan and independently replaced with probability ``p_rep`` by a
    candidate drawn uniformly from its list; unmatched tokens pass through.
    """
    if direction not in ("forward", "reverse"):
        raise ValueError(f"bad direction {direction!r}")
    index = table.forward if direction == "forward" else table.reverse
    if not index:
        return tuple(sentence)
    out: list[str] = []
    i = 0
    n = len(sentence)
    max_len = table.max_phrase_len
    while i < n:
        match = None
        for width in range(min(max_len, n - i), 0, -1):
            phrase = tuple(sentence[i : i + width])
            candidates = index.get(phrase)
            if candidates:
                match = (width, candidates)
                break
        if match is None:
            out.append(sentence[i])
            i += 1
            continue
        width, candidates = match
        if rng.random() < p_rep:
            replacement, _score = candidates[rng.choice_index(len(candidates))]
            out.extend(replacement)
        else:
            out.extend(sentence[i : i + width])
        i += width
    return tuple(out)


def _bigram_units(tokens) -> list[tuple[str, ...]]:
    """Consecutive bigram units, with a final unigram when length is odd."""
    units = [tuple(tokens[i : i + 2]) for i in range(0, len(tokens) - 1, 2)]
    if len(tokens) % 2:
        units.append((tokens[-1],))
    return units


def sample_additive_bigrams(donor: Sentence, n_tokens: int, rng: RandomSource) -> Sentence:
    """Sample whole bigram units from the donor without replacement.

    Units are taken in a uniformly random order until at least ``n_tokens``
    tokens are collected or the donor is exhausted; within-unit order is
    preserved. Callers observe the actual returned length.
    """
    if n_tokens <= 0:
        return ()
    units = _bigram_units(donor)
    order = rng.permutation(len(units))
    collected: list[str] = []
    for idx in order:
        if len(collected) >= n_tokens:
            break
        collected.extend(units[idx])
    return tuple(collected)


def shuffle_complete_bigrams(tokens: Sentence, rng: RandomSource) -> Sentence:
    """Uniformly permute consecutive bigram units, keeping pairs together."""
    units = _bigram_units(tokens)
    order = rng.permutation(len(units))
    out: list[str] = []
    for idx in order:
        out.extend(units[idx])
    return tuple(out)


def drop_frequent(
    sentence: Sentence, vocab: Vocabulary, p_del: float, rng: RandomSource
) -> Sentence:
    """Independently delete each frequent token with probability p_del.

    Infrequent tokens are always kept. If every token would be deleted,
    one token chosen uniformly at random is retained instead.
    """
    kept = [
        tok
        for tok in sentence
        if not (is_frequent(vocab, tok) and rng.random() < p_del)
    ]
    if not kept and sentence:
        kept = [sentence[rng.choice_index(len(sentence))]]
    return tuple(kept)


def shuffle_bounded(sentence: Sentence, k: int, rng: RandomSource) -> Sentence:
    """Shuffle tokens so no token moves more than k positions.

    Position i receives sort key i + u_i with u_i ~ Uniform[0, k + 1); a
    stable sort by key bounds every displacement by k and preserves the
    token multiset.
    """
    if k < 0:
        raise RangeError(f"k must be non-negative, got {k}")
    if k == 0 or len(sentence) < 2:
        return tuple(sentence)
    keys = [i + rng.uniform(0.0, k + 1.0) for i in range(len(sentence))]
    order = sorted(range(len(sentence)), key=lambda i: keys[i])
    return tuple(sentence[i] for i in order)


def additive_token_count(n: int, frac: float) -> int:
    """Even token count a with a / (n + a) closest to frac: round(f*n/(1-f)/2)*2."""
    ideal = frac * n / (1.0 - frac)
    return 2 * round(ideal / 2.0)


def noise_simple(
    sentence: Sentence,
    donor: Sentence,
    table: RuleTable,
    config: NoiseConfig,
    vocab: Vocabulary,
    rng: RandomSource,
) -> Sentence:
    """Corrupt a simple sentence so the autoencoder must simplify it back.

    full:     reverse substitution, then append donor bigrams sized so the
              additive share of the result falls in the configured range,
              then complete bigram shuffle of the concatenation.
    additive: same without the substitution stage.
    original: frequent-word drop + bounded shuffle only (no donor tokens).
    """
    if config.preset == "original":
        dropped = drop_frequent(sentence, vocab, config.p_del, rng)
        return shuffle_bounded(dropped, config.shuffle_k, rng)
    noised = sentence
    if config.preset == "full":
        noised = substitute(noised, table, "reverse", config.p_rep, rng)
    frac = rng.uniform(config.additive_frac_lo, config.additive_frac_hi)
    wanted = additive_token_count(len(noised), frac)
    extra = sample_additive_bigrams(donor, wanted, rng)
    return shuffle_complete_bigrams(noised + extra, rng)


def noise_complex(
    sentence: Sentence,
    table: RuleTable,
    config: NoiseConfig,
    vocab: Vocabulary,
    rng: RandomSource,
) -> Sentence:
    """Corrupt a complex sentence so the autoencoder must re-complicate it.

    full applies forward substitution, then frequent-word drop, then
    bounded shuffle; the other presets skip the substitution stage.
    """
    noised = sentence
    if config.preset == "full":
        noised = substitute(noised, table, "forward", config.p_rep, rng)
    dropped = drop_frequent(noised, vocab, config.p_del, rng)
    return shuffle_bounded(dropped, config.shuffle_k, rng)
