"""Corpus-level evaluation metrics: SARI, BLEU, and FKGL.

SARI scores a simplification against both its input and its references by
measuring how well n-grams (orders 1-4) were kept, deleted, and added; each
operation is scored with a micro-averaged F1 over the corpus, averaged over
orders, and the three F1s are averaged into the final score. BLEU is the
standard corpus-level geometric mean of clipped modified precisions with a
brevity penalty and no smoothing. FKGL is the Flesch-Kincaid grade level
with a deterministic vowel-group syllable heuristic.

All corpus accumulations use exactly-rounded summation (math.fsum) so that
scores are invariant under identical permutations of the corpus rows.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from .errors import DegenerateInput, ShapeError
from .textcore import Sentence

N_GRAM_ORDERS = (1, 2, 3, 4)
VOWELS = frozenset("aeiouy")


@dataclass(frozen=True)
class SariReport:
    sari: float
    f_keep: float
    f_del: float
    f_add: float


@dataclass(frozen=True)
class ReadabilityStats:
    words: int
    syllables: int
    sentences: int
    fkgl: float


def count_syllables(word: str) -> int:
    """Heuristic syllable count: vowel-letter groups with a silent-e rule.

    Counts maximal runs of a/e/i/o/u/y (case-insensitive), subtracts one
    for a trailing 'e' unless the word ends in consonant+'le', and floors
    the result at 1. Tokens with no alphabetic characters count as 1.
    """
    if not word:
        raise DegenerateInput("cannot count syllables of an empty word")
    w = word.lower()
    if not any(c.isalpha() for c in w):
        return 1
    groups = 0
    in_group = False
    for c in w:
        if c in VOWELS:
            if not in_group:
                groups += 1
            in_group = True
        else:
            in_group = False
    silent_le = len(w) >= 3 and w.endswith("le") and w[-3] not in VOWELS
    if w.endswith("e") and not silent_le:
        groups -= 1
    return max(groups, 1)


def _is_word(token: str) -> bool:
    return any(c.isalnum() for c in token)


def fkgl(corpus) -> ReadabilityStats:
    """Flesch-Kincaid grade level of a list of sentences.

    0.39 * (words / sentences) + 11.8 * (syllables / words) - 15.59, where
    words are tokens containing at least one alphanumeric character.
    """
    sentences = list(corpus)
    words = 0
    syllables = 0
    for sentence in sentences:
        for token in sentence:
            if _is_word(token):
                words += 1
                syllables += count_syllables(token)
    if words == 0 or not sentences:
        raise DegenerateInput("FKGL needs at least one word token")
    grade = 0.39 * (words / len(sentences)) + 11.8 * (syllables / words) - 15.59
    return ReadabilityStats(words, syllables, len(sentences), grade)


def _ngrams(tokens: Sentence, order: int) -> Counter:
    return Counter(
        tuple(tokens[i : i + order]) for i in range(len(tokens) - order + 1)
    )


def _counter_min(*counters) -> dict:
    keys = set(counters[0])
    for c in counters[1:]:
        keys &= set(c)
    return {g: min(c[g] for c in counters) for g in keys}


def _counter_diff(a, b) -> dict:
    """max(a - b, 0) per key, over keys of a."""
    out = {}
    for g, count in a.items():
        d = count - b.get(g, 0)
        if d > 0:
            out[g] = d
    return out


def _f1(num: float, p_den: float, r_den: float, vacuous_value: float) -> float:
    """F1 from a shared true-positive mass and the two denominators.

    When candidate and target sets are both empty the score is vacuous and
    takes ``vacuous_value`` (1 under the default convention, 0 under the
    alternative).
    """
    if p_den == 0.0 and r_den == 0.0:
        return vacuous_value
    precision = num / p_den if p_den > 0.0 else 0.0
    recall = num / r_den if r_den > 0.0 else 0.0
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def sari(inputs, outputs, references, vacuous_is_perfect: bool = True) -> SariReport:
    """Corpus-level SARI with keep/delete/add F1 decomposition.

    ``references[i]`` is the non-empty list of reference sentences for row
    i. Reference n-gram counts are averaged over the references of a row.
    ``vacuous_is_perfect`` selects the 0/0 convention: True scores an
    operation/order with no candidate and no target n-grams anywhere as
    perfect agreement (so an identity triple scores exactly 100).
    """
    inputs, outputs, references = list(inputs), list(outputs), list(references)
    if not (len(inputs) == len(outputs) == len(references)):
        raise ShapeError(
            f"parallel lengths differ: {len(inputs)}/{len(outputs)}/{len(references)}"
        )
    if not inputs:
        raise ShapeError("need at least one row")
    if any(len(refs) == 0 for refs in references):
        raise ShapeError("every row needs at least one reference")

    vacuous = 1.0 if vacuous_is_perfect else 0.0
    per_order_f1 = {"keep": [], "del": [], "add": []}
    for order in N_GRAM_ORDERS:
        sums = {op: {"num": [], "p_den": [], "r_den": []} for op in ("keep", "del", "add")}
        for src, out, refs in zip(inputs, outputs, references):
            s = _ngrams(tuple(src), order)
            o = _ngrams(tuple(out), order)
            m = len(refs)
            r_total: Counter = Counter()
            for ref in refs:
                r_total.update(_ngrams(tuple(ref), order))
            r_avg = {g: c / m for g, c in r_total.items()}

            keep_cand = _counter_min(s, o)
            keep_target = _counter_min(s, r_avg)
            keep_good = _counter_min(keep_cand, keep_target)

            del_cand = _counter_diff(s, o)
            del_target = _counter_diff(s, r_avg)
            del_good = _counter_min(del_cand, del_target)

            add_cand = _counter_diff(o, s)
            add_target = _counter_diff(r_avg, s)
            add_good = _counter_min(add_cand, add_target)

            for op, good, cand, target in (
                ("keep", keep_good, keep_cand, keep_target),
                ("del", del_good, del_cand, del_target),
                ("add", add_good, add_cand, add_target),
            ):
                sums[op]["num"].append(float(sum(good.values())))
                sums[op]["p_den"].append(float(sum(cand.values())))
                sums[op]["r_den"].append(float(sum(target.values())))
        for op in ("keep", "del", "add"):
            per_order_f1[op].append(
                _f1(
                    math.fsum(sums[op]["num"]),
                    math.fsum(sums[op]["p_den"]),
                    math.fsum(sums[op]["r_den"]),
                    vacuous,
                )
            )

    f_keep = 100.0 * math.fsum(per_order_f1["keep"]) / len(N_GRAM_ORDERS)
    f_del = 100.0 * math.fsum(per_order_f1["del"]) / len(N_GRAM_ORDERS)
    f_add = 100.0 * math.fsum(per_order_f1["add"]) / len(N_GRAM_ORDERS)
    return SariReport((f_keep + f_del + f_add) / 3.0, f_keep, f_del, f_add)


def bleu(outputs, references) -> float:
    """Corpus-level BLEU (orders 1-4), no smoothing, in [0, 100].

    Modified precisions clip output n-gram counts by the per-row maximum
    over references; the brevity penalty compares the total output length
    with the sum of closest-length references (ties broken toward the
    shorter reference). Any order with zero matches yields 0, except that
    orders with no n-grams anywhere in outputs or references are vacuously
    perfect (degenerate ultra-short corpora).
    """
    outputs, references = list(outputs), list(references)
    if len(outputs) != len(references):
        raise ShapeError(
            f"parallel lengths differ: {len(outputs)}/{len(references)}"
        )
    if not outputs:
        raise ShapeError("need at least one row")
    if any(len(refs) == 0 for refs in references):
        raise ShapeError("every row needs at least one reference")

    out_len = 0
    ref_len = 0
    matched = {order: 0 for order in N_GRAM_ORDERS}
    total = {order: 0 for order in N_GRAM_ORDERS}
    for out, refs in zip(outputs, references):
        out = tuple(out)
        out_len += len(out)
        ref_len += min(
            (len(ref) for ref in refs),
            key=lambda L: (abs(L - len(out)), L),
        )
        for order in N_GRAM_ORDERS:
            o = _ngrams(out, order)
            if not o:
                continue
            clip: dict[tuple, int] = {}
            for ref in refs:
                for g, c in _ngrams(tuple(ref), order).items():
                    clip[g] = max(clip.get(g, 0), c)
            total[order] += sum(o.values())
            matched[order] += sum(min(c, clip.get(g, 0)) for g, c in o.items())

    log_precisions = []
    for order in N_GRAM_ORDERS:
        if total[order] == 0:
            ref_has = any(
                len(ref) >= order for refs in references for ref in refs
            )
            if ref_has:
                return 0.0
            continue
        if matched[order] == 0:
            return 0.0
        log_precisions.append(math.log(matched[order] / total[order]))
    if out_len == 0:
        return 0.0
    brevity = 1.0 if out_len >= ref_len else math.exp(1.0 - ref_len / out_len)
    if not log_precisions:
        return 100.0 * brevity
    return 100.0 * brevity * math.exp(sum(log_precisions) / len(log_precisions))
