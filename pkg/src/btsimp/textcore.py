"""Tokenization, corpus I/O, vocabulary statistics, and seeded randomness.

A token is a plain ``str`` with no whitespace; a sentence is a tuple of
tokens. Corpora are ordered lists of sentences with a complexity tag.
Every stochastic component in the package draws from a :class:`RandomSource`
so that a fixed (seed, stream) pair makes the whole pipeline reproducible.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyCorpus, EmptyLine, EncodingError, IoError

log = logging.getLogger(__name__)

Sentence = tuple[str, ...]

COMPLEXITY_TAGS = ("simple", "complex", "unlabeled")


def tokenize(line: str) -> Sentence:
    """Split a line into whitespace-delimited tokens.

    Raises EmptyLine if the line has no non-whitespace content.
    """
    tokens = tuple(line.split())
    if not tokens:
        raise EmptyLine(f"no tokens in line: {line!r}")
    return tokens


def detokenize(sentence: Sentence) -> str:
    """Join tokens with single spaces; inverse of tokenize on its output."""
    return " ".join(sentence)


@dataclass(frozen=True)
class Corpus:
    """Ordered sentences sharing one complexity tag."""

    sentences: tuple[Sentence, ...]
    tag: str = "unlabeled"

    def __post_init__(self):
        if self.tag not in COMPLEXITY_TAGS:
            raise ValueError(f"unknown complexity tag: {self.tag!r}")

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)


def read_corpus(path, tag: str = "unlabeled") -> Corpus:
    """Read a UTF-8, one-sentence-per-line file into a Corpus.

    Blank lines are skipped; their count is logged as a single warning.
    Raises IoError if the file cannot be read and EncodingError (with the
    1-based line number) on invalid UTF-8.
    """
    try:
        raw = open(path, "rb").read()
    except OSError as exc:
        raise IoError(f"cannot read corpus file {path}: {exc}") from exc
    sentences = []
    blank = 0
    for lineno, line in enumerate(raw.splitlines(), start=1):
        try:
            text = line.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise EncodingError(
                f"{path}: invalid UTF-8 on line {lineno}", line_number=lineno
            ) from exc
        if not text.strip():
            blank += 1
            continue
        sentences.append(tokenize(text))
    if blank:
        log.warning("%s: skipped %d blank line(s)", path, blank)
    return Corpus(tuple(sentences), tag)


def write_corpus(corpus: Corpus, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sentence in corpus:
            fh.write(detokenize(sentence) + "\n")


@dataclass(frozen=True)
class Vocabulary:
    """Exact token occurrence counts with a frequent-word threshold.

    A token is "frequent" iff its count is strictly greater than the
    threshold (default 100).
    """

    counts: dict[str, int]
    frequent_threshold: int = 100
    total: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "total", sum(self.counts.values()))

    def count(self, token: str) -> int:
        return self.counts.get(token, 0)

    def probability(self, token: str) -> float:
        """Unigram relative frequency; 0 for unseen tokens."""
        if self.total == 0:
            return 0.0
        return self.counts.get(token, 0) / self.total

    def __len__(self) -> int:
        return len(self.counts)


def build_vocabulary(corpora, frequent_threshold: int = 100) -> Vocabulary:
    """Count token occurrences over all given corpora jointly."""
    counts: dict[str, int] = {}
    for corpus in corpora:
        for sentence in corpus:
            for token in sentence:
                counts[token] = counts.get(token, 0) + 1
    if not counts:
        raise EmptyCorpus("cannot build a vocabulary from empty corpora")
    return Vocabulary(counts, frequent_threshold)


def is_frequent(vocab: Vocabulary, token: str) -> bool:
    """True iff the token occurs strictly more often than the threshold."""
    return vocab.count(token) > vocab.frequent_threshold


def save_vocabulary(vocab: Vocabulary, path) -> None:
    """Dump as TSV "token<TAB>count", descending count then lexicographic."""
    rows = sorted(vocab.counts.items(), key=lambda kv: (-kv[1], kv[0]))
    with open(path, "w", encoding="utf-8") as fh:
        for token, count in rows:
            fh.write(f"{token}\t{count}\n")


def load_vocabulary(path, frequent_threshold: int = 100) -> Vocabulary:
    counts: dict[str, int] = {}
    try:
        lines = open(path, encoding="utf-8").read().splitlines()
    except OSError as exc:
        raise IoError(f"cannot read vocabulary file {path}: {exc}") from exc
    for line in lines:
        if not line.strip():
            continue
        token, count = line.split("\t")
        counts[token] = int(count)
    return Vocabulary(counts, frequent_threshold)


class RandomSource:
    """Deterministic random stream keyed by (seed, stream).

    Identical (seed, stream) pairs always yield identical draw sequences;
    distinct stream ids yield statistically independent streams (PCG64
    seeded through numpy's SeedSequence spawn keys). A RandomSource is
    single-owner: hand each one to exactly one consumer.
    """

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed)
        self.stream = int(stream)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream,))
        self.gen = np.random.Generator(np.random.PCG64(ss))

    def random(self) -> float:
        return float(self.gen.random())

    def uniform(self, lo: float, hi: float) -> float:
        return float(self.gen.uniform(lo, hi))

    def randint(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        return int(self.gen.integers(0, n))

    def permutation(self, n: int) -> np.ndarray:
        return self.gen.permutation(n)

    def choice_index(self, n: int) -> int:
        return self.randint(n)

    def __repr__(self):
        return f"RandomSource(seed={self.seed}, stream={self.stream})"


def make_rng(seed: int, stream: int = 0) -> RandomSource:
    """Create the package-wide deterministic random source."""
    return RandomSource(seed, stream)
