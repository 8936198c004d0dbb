"""Reward primitives: fluency language models, sentence-vector relevance,
and normalized-readability complexity.

Fluency comes from an interpolated n-gram language model (any object with
a ``sentence_logprobs`` method is pluggable); relevance from the cosine of
frequency-discounted sentence vectors over deterministic PPMI-factorized
embeddings; complexity from a logistic-normalized per-sentence grade level.
All trained artifacts are immutable and all scoring functions are pure.
"""

from __future__ import annotations

import math
import pickle
from dataclasses import dataclass

import numpy as np

from .errors import (
    CheckpointError,
    ConfigError,
    DegenerateInput,
    EmptyCorpus,
    RangeError,
    ShapeError,
)
from .metrics import fkgl
from .textcore import Sentence, Vocabulary

BOS = "<s>"
EOS = "</s>"

LM_FORMAT_VERSION = 1


class NGramLM:
    """Interpolated n-gram language model with an add-one unigram floor.

    Conditional probabilities mix maximum-likelihood estimates of orders
    1..order with fixed weights; orders whose history is unseen drop out
    and the remaining weights are renormalized. The unigram level is
    add-one smoothed over the training vocabulary plus one shared
    unseen-token slot, so every token receives strictly positive
    probability under any history.
    """

    def __init__(self, order, weights, context_counts, event_counts, vocab_tokens, total_tokens):
        self.order = order
        self.weights = tuple(weights)
        self.context_counts = context_counts
        self.event_counts = event_counts
        self.vocab_tokens = frozenset(vocab_tokens)
        self.total_tokens = total_tokens
        self.vocab_size = len(self.vocab_tokens)

    def _unigram(self, token: str) -> float:
        seen = self.event_counts[1].get((), {}).get(token, 0)
        return (seen + 1) / (self.total_tokens + self.vocab_size + 1)

    def conditional(self, token: str, history) -> float:
        """P(token | history); history is the raw preceding-token tuple."""
        history = tuple(history)
        parts = [(self.weights[0], self._unigram(token))]
        for k in range(2, self.order + 1):
            context = ((BOS,) * max(0, k - 1 - len(history)) + history)[-(k - 1):]
            denom = self.context_counts[k].get(context, 0)
            if denom == 0:
                continue
            num = self.event_counts[k].get(context, {}).get(token, 0)
            parts.append((self.weights[k - 1], num / denom))
        weight_sum = sum(w for w, _ in parts)
        return sum(w * p for w, p in parts) / weight_sum

    def sentence_logprobs(self, sentence: Sentence) -> list[float]:
        """Per-event log probabilities, including the end-of-sentence step."""
        if not sentence:
            raise DegenerateInput("cannot score an empty sentence")
        logs = []
        history: tuple[str, ...] = ()
        for token in tuple(sentence) + (EOS,):
            logs.append(math.log(self.conditional(token, history)))
            history = history + (token,)
        return logs

    def save(self, path) -> None:
        payload = {
            "format_version": LM_FORMAT_VERSION,
            "order": self.order,
            "weights": self.weights,
            "context_counts": self.context_counts,
            "event_counts": self.event_counts,
            "vocab_tokens": sorted(self.vocab_tokens),
            "total_tokens": self.total_tokens,
        }
        with open(path, "wb") as fh:
            pickle.dump(payload, fh)

    @classmethod
    def load(cls, path) -> "NGramLM":
        try:
            with open(path, "rb") as fh:
                payload = pickle.load(fh)
        except (OSError, pickle.UnpicklingError, EOFError, AttributeError) as exc:
            raise CheckpointError(f"cannot load language model from {path}: {exc}") from exc
        if not isinstance(payload, dict) or payload.get("format_version") != LM_FORMAT_VERSION:
            raise CheckpointError(
                f"language model format version mismatch in {path}"
            )
        return cls(
            payload["order"],
            payload["weights"],
            payload["context_counts"],
            payload["event_counts"],
            payload["vocab_tokens"],
            payload["total_tokens"],
        )


DEFAULT_LM_WEIGHTS = {1: (1.0,), 2: (0.3, 0.7), 3: (0.2, 0.3, 0.5)}


def train_lm(corpus, order: int = 3, weights=None) -> NGramLM:
    """Count n-grams of orders 1..order with sentence-boundary padding."""
    sentences = list(corpus)
    if not sentences:
        raise EmptyCorpus("cannot train a language model on an empty corpus")
    if order < 1:
        raise RangeError(f"order must be >= 1, got {order}")
    if weights is None:
        weights = DEFAULT_LM_WEIGHTS.get(order)
        if weights is None:
            weights = tuple(2**i for i in range(order))
            weights = tuple(w / sum(weights) for w in weights)
    weights = tuple(float(w) for w in weights)
    if len(weights) != order:
        raise RangeError(f"need {order} weights, got {len(weights)}")
    if any(w <= 0 for w in weights) or abs(sum(weights) - 1.0) > 1e-9:
        raise RangeError("weights must be positive and sum to 1")

    context_counts: dict[int, dict] = {k: {} for k in range(1, order + 1)}
    event_counts: dict[int, dict] = {k: {} for k in range(1, order + 1)}
    vocab_tokens: set[str] = set()
    total_tokens = 0
    for sentence in sentences:
        tokens = tuple(sentence)
        vocab_tokens.update(tokens)
        padded = (BOS,) * (order - 1) + tokens + (EOS,)
        events = len(tokens) + 1
        total_tokens += events
        for pos in range(order - 1, order - 1 + events):
            token = padded[pos]
            for k in range(1, order + 1):
                context = padded[pos - (k - 1) : pos]
                context_counts[k][context] = context_counts[k].get(context, 0) + 1
                table = event_counts[k].setdefault(context, {})
                table[token] = table.get(token, 0) + 1
    vocab_tokens.add(EOS)
    return NGramLM(order, weights, context_counts, event_counts, vocab_tokens, total_tokens)


def perplexity(lm, corpus) -> float:
    logs = [lp for sentence in corpus for lp in lm.sentence_logprobs(sentence)]
    return math.exp(-sum(logs) / len(logs))


def fluency_reward(lm, sentence: Sentence) -> float:
    """Geometric mean of per-event conditional probabilities, in (0, 1].

    Equals the inverse perplexity of the sentence under the model; the
    end-of-sentence transition counts as an event.
    """
    if not sentence:
        raise DegenerateInput("cannot score an empty sentence")
    logs = lm.sentence_logprobs(sentence)
    return math.exp(sum(logs) / len(logs))


@dataclass(frozen=True)
class EmbeddingTable:
    vectors: dict[str, np.ndarray]
    dim: int

    def get(self, token: str):
        return self.vectors.get(token)


def train_embeddings(corpora, dim: int = 32, window: int = 5) -> EmbeddingTable:
    """Deterministic embeddings: PPMI co-occurrence factorized by SVD.

    Co-occurrence is counted in a symmetric window, the PPMI matrix is
    decomposed with numpy's SVD, and vectors are the top-``dim`` left
    singular vectors scaled by the square roots of their singular values.
    Each basis vector's sign is fixed so its first nonzero component is
    positive, making the table bit-reproducible for a given corpus.
    """
    if dim < 2:
        raise ConfigError(f"dim must be >= 2, got {dim}")
    sentences = [tuple(s) for corpus in corpora for s in corpus]
    tokens = sorted({t for s in sentences for t in s})
    if len(tokens) < dim:
        raise ConfigError(
            f"vocabulary of {len(tokens)} tokens cannot support dim={dim}"
        )
    total = sum(len(s) for s in sentences)
    if total < dim:
        raise ConfigError("corpus smaller than embedding dimension")
    index = {t: i for i, t in enumerate(tokens)}
    v = len(tokens)
    cooc = np.zeros((v, v))
    for sentence in sentences:
        ids = [index[t] for t in sentence]
        for i, a in enumerate(ids):
            for j in range(max(0, i - window), min(len(ids), i + window + 1)):
                if j != i:
                    cooc[a, ids[j]] += 1.0
    total_pairs = cooc.sum()
    if total_pairs == 0:
        raise ConfigError("no co-occurrences; corpus sentences are all length 1")
    row = cooc.sum(axis=1)
    col = cooc.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        pmi = np.log((cooc * total_pairs) / np.outer(row, col))
    ppmi = np.where(np.isfinite(pmi) & (pmi > 0), pmi, 0.0)
    u, s, _vt = np.linalg.svd(ppmi, full_matrices=False)
    u = u[:, :dim]
    s = s[:dim]
    for j in range(dim):
        nonzero = np.nonzero(u[:, j])[0]
        if nonzero.size and u[nonzero[0], j] < 0:
            u[:, j] = -u[:, j]
    vectors = u * np.sqrt(s)
    return EmbeddingTable({t: vectors[i].copy() for t, i in index.items()}, dim)


def save_embeddings(emb: EmbeddingTable, path) -> None:
    """Text format: "word v1 v2 ... vd" per line."""
    with open(path, "w", encoding="utf-8") as fh:
        for token in sorted(emb.vectors):
            values = " ".join(repr(float(x)) for x in emb.vectors[token])
            fh.write(f"{token} {values}\n")


def load_embeddings(path) -> EmbeddingTable:
    vectors: dict[str, np.ndarray] = {}
    dim = None
    for line in open(path, encoding="utf-8"):
        parts = line.split()
        if not parts:
            continue
        token, values = parts[0], np.array([float(x) for x in parts[1:]])
        if dim is None:
            dim = values.size
        elif values.size != dim:
            raise ShapeError(f"embedding for {token!r} has dim {values.size}, expected {dim}")
        vectors[token] = values
    if dim is None:
        raise EmptyCorpus(f"no embeddings in {path}")
    return EmbeddingTable(vectors, dim)


def sentence_vector(emb: EmbeddingTable, sentence: Sentence, vocab: Vocabulary, a: float = 1e-3):
    """Frequency-discounted average of word vectors: sum a/(a+p(w)) vec(w) / |s|.

    Unknown tokens contribute the zero vector; an all-unknown sentence
    yields the zero vector.
    """
    if a <= 0:
        raise RangeError(f"weighting parameter a must be positive, got {a}")
    acc = np.zeros(emb.dim)
    for token in sentence:
        vec = emb.get(token)
        if vec is None:
            continue
        acc += (a / (a + vocab.probability(token))) * vec
    return acc / max(len(sentence), 1)


def relevance_reward(v1, v2) -> float:
    """Cosine similarity clamped below at 0; zero vectors score 0."""
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    if v1.shape != v2.shape:
        raise ShapeError(f"vector shapes differ: {v1.shape} vs {v2.shape}")
    n1 = np.linalg.norm(v1)
    n2 = np.linalg.norm(v2)
    if n1 == 0.0 or n2 == 0.0:
        return 0.0
    return max(float(v1 @ v2 / (n1 * n2)), 0.0)


@dataclass(frozen=True)
class FkglStats:
    mean: float
    std: float

    def __post_init__(self):
        if self.std <= 0:
            raise RangeError("std must be positive")


STD_FLOOR = 1e-6


def corpus_fkgl_stats(corpus) -> FkglStats:
    """Mean and population std of per-sentence grade levels."""
    grades = []
    for sentence in corpus:
        if any(_has_word(t) for t in sentence):
            grades.append(fkgl([sentence]).fkgl)
    if len(grades) < 2:
        raise DegenerateInput("need at least 2 sentences containing words")
    mean = float(np.mean(grades))
    std = float(np.std(grades))
    return FkglStats(mean, max(std, STD_FLOOR))


def _has_word(token: str) -> bool:
    return any(c.isalnum() for c in token)


def logistic(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def complexity_reward(fkgl_value: float, stats: FkglStats, side: str) -> float:
    """Logistic of the grade-level z-score; simple side takes the complement."""
    if side not in ("simple", "complex"):
        raise ValueError(f"side must be 'simple' or 'complex', got {side!r}")
    normalized = logistic((fkgl_value - stats.mean) / stats.std)
    return normalized if side == "complex" else 1.0 - normalized
