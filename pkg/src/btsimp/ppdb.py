"""Scored simplification rules and their bidirectional phrase index.

Rules map a complex phrase to a simpler one with a confidence score in
[0, 1]. The table keeps only rules at or above ``min_score`` and, per key
and direction, at most ``top_k`` candidates ordered by descending score
(ties broken lexicographically). The forward index serves complex-side
noising; the reverse index serves simple-side noising.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ParseError, RangeError
from .textcore import Sentence, tokenize

MAX_PHRASE_TOKENS = 5


@dataclass(frozen=True)
class SimplificationRule:
    score: float
    complex_phrase: Sentence
    simple_phrase: Sentence

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise RangeError(f"rule score {self.score} outside [0, 1]")
        if not self.complex_phrase or not self.simple_phrase:
            raise ParseError("rule phrases must be non-empty")
        if not (
            len(self.complex_phrase) <= MAX_PHRASE_TOKENS
            and len(self.simple_phrase) <= MAX_PHRASE_TOKENS
        ):
            raise ParseError(f"rule phrases longer than {MAX_PHRASE_TOKENS} tokens")
        if self.complex_phrase == self.simple_phrase:
            raise ParseError("rule must relate two distinct phrases")


def parse_rules(tsv_content: str) -> list[SimplificationRule]:
    """Parse "score<TAB>complex phrase<TAB>simple phrase" lines.

    Blank lines and '#'-prefixed comment lines are ignored. Raises
    ParseError (with line number) on malformed lines and RangeError on
    scores outside [0, 1].
    """
    rules = []
    for lineno, line in enumerate(tsv_content.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ParseError(
                f"line {lineno}: expected 3 tab-separated fields, got {len(fields)}",
                line_number=lineno,
            )
        score_text, complex_text, simple_text = fields
        try:
            score = float(score_text)
        except ValueError as exc:
            raise ParseError(
                f"line {lineno}: bad score {score_text!r}", line_number=lineno
            ) from exc
        if not 0.0 <= score <= 1.0:
            raise RangeError(f"line {lineno}: score {score} outside [0, 1]")
        if not complex_text.strip() or not simple_text.strip():
            raise ParseError(f"line {lineno}: empty phrase", line_number=lineno)
        try:
            rule = SimplificationRule(score, tokenize(complex_text), tokenize(simple_text))
        except ParseError as exc:
            raise ParseError(f"line {lineno}: {exc}", line_number=lineno) from exc
        rules.append(rule)
    return rules


def load_rules(path) -> list[SimplificationRule]:
    return parse_rules(open(path, encoding="utf-8").read())


def serialize_rules(rules) -> str:
    """Inverse of parse_rules on well-formed rule lists."""
    lines = [
        f"{rule.score!r}\t{' '.join(rule.complex_phrase)}\t{' '.join(rule.simple_phrase)}"
        for rule in rules
    ]
    return "\n".join(lines) + ("\n" if lines else "")


CandidateList = list[tuple[Sentence, float]]


@dataclass(frozen=True)
class RuleTable:
    """Score-filtered, top-k-truncated bidirectional rule index."""

    forward: dict[Sentence, CandidateList]
    reverse: dict[Sentence, CandidateList]
    min_score: float = 0.5
    top_k: int = 5
    max_phrase_len: int = field(init=False)

    def __post_init__(self):
        longest = 1
        for index in (self.forward, self.reverse):
            for key in index:
                longest = max(longest, len(key))
        object.__setattr__(self, "max_phrase_len", longest)

    def __len__(self) -> int:
        return sum(len(c) for c in self.forward.values())


def _truncate(index: dict[Sentence, CandidateList], top_k: int) -> None:
    for key, candidates in index.items():
        candidates.sort(key=lambda cs: (-cs[1], cs[0]))
        del candidates[top_k:]


def build_rule_table(rules, min_score: float = 0.5, top_k: int = 5) -> RuleTable:
    """Filter rules by score, index both directions, truncate per key."""
    if top_k < 1:
        raise RangeError(f"top_k must be >= 1, got {top_k}")
    if not 0.0 <= min_score <= 1.0:
        raise RangeError(f"min_score {min_score} outside [0, 1]")
    forward: dict[Sentence, CandidateList] = {}
    reverse: dict[Sentence, CandidateList] = {}
    for rule in rules:
        if rule.score < min_score:
            continue
        forward.setdefault(rule.complex_phrase, []).append((rule.simple_phrase, rule.score))
        reverse.setdefault(rule.simple_phrase, []).append((rule.complex_phrase, rule.score))
    _truncate(forward, top_k)
    _truncate(reverse, top_k)
    return RuleTable(forward, reverse, min_score, top_k)


def lookup(table: RuleTable, phrase: Sentence, direction: str) -> CandidateList:
    """Return the stored candidate list for a phrase, or an empty list.

    direction "forward" maps complex phrases to simpler candidates;
    "reverse" maps simple phrases to more complex candidates.
    """
    if direction == "forward":
        index = table.forward
    elif direction == "reverse":
        index = table.reverse
    else:
        raise ValueError(f"direction must be 'forward' or 'reverse', got {direction!r}")
    return list(index.get(tuple(phrase), ()))
