"""Deterministic toy-language generator for desk-scale end-to-end runs.

The language pairs short "simple" sentences (monosyllabic pseudo-words,
subject-verb-object templates) with "complex" counterparts derived from the
same latent frame by (i) rewriting a fixed subset of the lexicon to longer
multisyllabic synonyms and (ii) inserting a filler clause built from a
dedicated filler vocabulary. The gold simplification is therefore exactly
representable as lexical substitution plus deletion, so a trained model can
actually recover it.

The unpaired training corpora, the held-out evaluation pairs, and the
parallel pairs available for semi-supervised training are all generated
from disjoint latent frames (no hidden pairing).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError
from .ppdb import RuleTable, SimplificationRule, build_rule_table
from .textcore import Corpus, RandomSource, Sentence, make_rng

_ONSETS = (
    "b", "d", "f", "g", "h", "j", "k", "l", "m", "n", "p", "r", "s", "t",
    "v", "w", "z", "bl", "br", "cl", "cr", "dr", "fl", "fr", "gl", "gr",
    "pl", "pr", "sk", "sl", "sm", "sn", "sp", "st", "tr",
)
_VOWELS = ("a", "e", "i", "o", "u")
_CODAS = ("b", "ck", "d", "g", "k", "l", "m", "n", "nd", "ng", "p", "rk", "rn", "st", "t")

_SYNONYM_SUFFIXES = ("ulation", "ification", "escence", "ivity", "ological", "imentum")
_FILLER_NOUN_SUFFIX = "orium"
_FILLER_VERB_SUFFIX = "ionated"
_FILLER_ADV_SUFFIX = "ingly"
_FILLER_CONJ_SUFFIX = "ereupon"
_FILLER_DETS = ("thusam", "quorvian")

RULE_SCORE = 0.9


def _base_words(count: int) -> list[str]:
    words = []
    for vowel in _VOWELS:
        for coda in _CODAS:
            for onset in _ONSETS:
                words.append(onset + vowel + coda)
                if len(words) == count:
                    return words
    raise ConfigError(f"cannot build {count} distinct base words")


@dataclass(frozen=True)
class ToyGrammarConfig:
    n_nouns: int = 50
    n_verbs: int = 24
    n_modifiers: int = 16
    n_synonym_pairs: int = 60
    n_filler_nouns: int = 6
    n_filler_verbs: int = 6
    n_filler_adverbs: int = 4
    n_filler_conjunctions: int = 4
    simple_len_range: tuple[int, int] = (3, 8)
    complex_len_range: tuple[int, int] = (7, 14)
    # Probability that a mapped word is actually complexified in the unpaired
    # complex training corpus. Below 1 the two synonym forms share contexts,
    # which the co-occurrence embeddings need; aligned pairs always map fully.
    complexify_prob: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if min(self.n_nouns, self.n_verbs, self.n_modifiers) < 2:
            raise ConfigError("need at least 2 nouns, verbs, and modifiers")
        content = self.n_nouns + self.n_verbs + self.n_modifiers
        if not 1 <= self.n_synonym_pairs <= content:
            raise ConfigError(
                f"n_synonym_pairs must lie in [1, {content}], got {self.n_synonym_pairs}"
            )
        if min(
            self.n_filler_nouns,
            self.n_filler_verbs,
            self.n_filler_adverbs,
            self.n_filler_conjunctions,
        ) < 1:
            raise ConfigError("filler vocabulary classes must be non-empty")


@dataclass(frozen=True)
class Lexicon:
    determiners: tuple[str, ...]
    nouns: tuple[str, ...]
    verbs: tuple[str, ...]
    modifiers: tuple[str, ...]
    adverbs: tuple[str, ...]
    synonym_map: dict[str, str]  # simple word -> complex word
    filler_nouns: tuple[str, ...]
    filler_verbs: tuple[str, ...]
    filler_adverbs: tuple[str, ...]
    filler_conjunctions: tuple[str, ...]
    filler_dets: tuple[str, ...]

    @property
    def filler_tokens(self) -> frozenset:
        return frozenset(
            self.filler_nouns
            + self.filler_verbs
            + self.filler_adverbs
            + self.filler_conjunctions
            + self.filler_dets
        )


def build_lexicon(config: ToyGrammarConfig) -> Lexicon:
    n_adverbs = 4
    n_filler_bases = (
        config.n_filler_nouns
        + config.n_filler_verbs
        + config.n_filler_adverbs
        + config.n_filler_conjunctions
    )
    total = config.n_nouns + config.n_verbs + config.n_modifiers + n_adverbs + n_filler_bases
    bases = _base_words(total)
    pos = 0

    def take(n):
        nonlocal pos
        out = tuple(bases[pos : pos + n])
        pos += n
        return out

    nouns = take(config.n_nouns)
    verbs = take(config.n_verbs)
    modifiers = take(config.n_modifiers)
    adverbs = take(n_adverbs)
    filler_nouns = tuple(w + _FILLER_NOUN_SUFFIX for w in take(config.n_filler_nouns))
    filler_verbs = tuple(w + _FILLER_VERB_SUFFIX for w in take(config.n_filler_verbs))
    filler_adverbs = tuple(w + _FILLER_ADV_SUFFIX for w in take(config.n_filler_adverbs))
    filler_conjs = tuple(w + _FILLER_CONJ_SUFFIX for w in take(config.n_filler_conjunctions))

    # The mapped subset interleaves word classes so nouns, verbs, and
    # modifiers all contribute synonym pairs.
    content = []
    for i in range(max(config.n_nouns, config.n_verbs, config.n_modifiers)):
        for cls in (nouns, verbs, modifiers):
            if i < len(cls):
                content.append(cls[i])
    mapped = content[: config.n_synonym_pairs]
    synonym_map = {
        w: w + _SYNONYM_SUFFIXES[i % len(_SYNONYM_SUFFIXES)] for i, w in enumerate(mapped)
    }
    return Lexicon(
        determiners=("the", "a"),
        nouns=nouns,
        verbs=verbs,
        modifiers=modifiers,
        adverbs=adverbs,
        synonym_map=synonym_map,
        filler_nouns=filler_nouns,
        filler_verbs=filler_verbs,
        filler_adverbs=filler_adverbs,
        filler_conjunctions=filler_conjs,
        filler_dets=_FILLER_DETS,
    )


@dataclass(frozen=True)
class Frame:
    """One latent sentence: slot choices shared by both realizations."""

    det1: str
    adj1: str | None
    subj: str
    verb: str
    det2: str | None
    adj2: str | None
    obj: str | None
    adv: str | None
    filler: tuple[str, ...]
    filler_after_subject: bool


def _sample_frame(lex: Lexicon, rng: RandomSource) -> Frame:
    transitive = rng.random() < 0.75
    det1 = lex.determiners[rng.choice_index(len(lex.determiners))]
    adj1 = lex.modifiers[rng.choice_index(len(lex.modifiers))] if rng.random() < 0.5 else None
    subj = lex.nouns[rng.choice_index(len(lex.nouns))]
    verb = lex.verbs[rng.choice_index(len(lex.verbs))]
    adv = lex.adverbs[rng.choice_index(len(lex.adverbs))] if rng.random() < 0.4 else None
    det2 = adj2 = obj = None
    if transitive:
        det2 = lex.determiners[rng.choice_index(len(lex.determiners))]
        adj2 = lex.modifiers[rng.choice_index(len(lex.modifiers))] if rng.random() < 0.5 else None
        obj = subj
        while obj == subj:
            obj = lex.nouns[rng.choice_index(len(lex.nouns))]
    conj = lex.filler_conjunctions[rng.choice_index(len(lex.filler_conjunctions))]
    fdet = lex.filler_dets[rng.choice_index(len(lex.filler_dets))]
    fnoun = lex.filler_nouns[rng.choice_index(len(lex.filler_nouns))]
    fverb = lex.filler_verbs[rng.choice_index(len(lex.filler_verbs))]
    template = rng.choice_index(3)
    if template == 0:
        filler = (conj, fdet, fnoun, fverb)
    elif template == 1:
        fadv = lex.filler_adverbs[rng.choice_index(len(lex.filler_adverbs))]
        filler = (conj, fdet, fnoun, fverb, fadv)
    else:
        fnoun2 = lex.filler_nouns[rng.choice_index(len(lex.filler_nouns))]
        filler = (conj, fdet, fnoun, fverb, lex.filler_dets[0], fnoun2)
    return Frame(
        det1=det1,
        adj1=adj1,
        subj=subj,
        verb=verb,
        det2=det2,
        adj2=adj2,
        obj=obj,
        adv=adv,
        filler=filler,
        filler_after_subject=rng.random() < 0.5,
    )


def simple_realization(frame: Frame) -> Sentence:
    tokens = [frame.det1]
    if frame.adj1:
        tokens.append(frame.adj1)
    tokens.append(frame.subj)
    tokens.append(frame.verb)
    if frame.obj:
        tokens.append(frame.det2)
        if frame.adj2:
            tokens.append(frame.adj2)
        tokens.append(frame.obj)
    if frame.adv:
        tokens.append(frame.adv)
    return tuple(tokens)


def complex_realization(
    frame: Frame, lex: Lexicon, rng: RandomSource | None = None, map_prob: float = 1.0
) -> Sentence:
    """Synonym-mapped realization with the filler clause inserted.

    With rng given and map_prob < 1, each mapped word is complexified only
    with that probability; the subject is always mapped so the insertion
    point stays well-defined.
    """

    def mapping(token, force=False):
        target = lex.synonym_map.get(token)
        if target is None:
            return token
        if force or rng is None or rng.random() < map_prob:
            return target
        return token

    simple = simple_realization(frame)
    mapped = [mapping(t, force=(t == frame.subj)) for t in simple]
    subj_pos = simple.index(frame.subj)
    insert_at = subj_pos + 1 if frame.filler_after_subject else len(mapped)
    return tuple(mapped[:insert_at]) + frame.filler + tuple(mapped[insert_at:])


@dataclass(frozen=True)
class ToyDataset:
    simple: Corpus
    complex: Corpus
    pairs: tuple[tuple[Sentence, Sentence], ...]  # held-out (complex, simple)
    train_pairs: tuple[tuple[Sentence, Sentence], ...]
    rules: tuple[SimplificationRule, ...]
    rule_table: RuleTable
    filler_tokens: frozenset
    embedding_corpus: Corpus
    lexicon: Lexicon = field(repr=False)


def generate(
    config: ToyGrammarConfig,
    n_simple: int = 5000,
    n_complex: int = 5000,
    n_pairs: int = 200,
    n_train_pairs: int = 2000,
) -> ToyDataset:
    """Generate unpaired corpora, aligned pairs, and the gold rule table.

    All latent frames are distinct across the four sections. The rule
    table holds exactly the synonym map (complex -> simple) at score 0.9,
    and every token in the aligned pairs is guaranteed to occur in the
    union of the two training corpora.
    """
    if min(n_simple, n_complex, n_pairs, n_train_pairs) < 1:
        raise ConfigError("all section sizes must be >= 1")
    lex = build_lexicon(config)
    rng = make_rng(config.seed, stream=0)
    seen: set[tuple] = set()

    def fresh_frame() -> Frame:
        # Deduplicate on the simple realization alone: the synonym map is
        # injective and filler tokens are disjoint from content tokens, so
        # distinct simple realizations guarantee globally distinct sentences
        # in every section (dev isolation holds by construction).
        for _ in range(10000):
            frame = _sample_frame(lex, rng)
            key = simple_realization(frame)
            if key not in seen:
                seen.add(key)
                return frame
        raise ConfigError("cannot generate enough distinct frames; enlarge the lexicon")

    simple_sentences = tuple(simple_realization(fresh_frame()) for _ in range(n_simple))
    complex_sentences = tuple(
        complex_realization(fresh_frame(), lex, rng, config.complexify_prob)
        for _ in range(n_complex)
    )
    covered = {t for s in simple_sentences for t in s}
    covered |= {t for s in complex_sentences for t in s}

    # Aligned pairs only use tokens covered by the training corpora, so the
    # model vocabulary stays closed over everything it will ever decode.
    aligned: list[tuple[Sentence, Sentence]] = []
    wanted = n_pairs + n_train_pairs
    attempts = 0
    while len(aligned) < wanted:
        attempts += 1
        if attempts > 200 * wanted + 1000:
            raise ConfigError(
                "could not build enough vocabulary-covered aligned pairs; "
                "enlarge the training corpora"
            )
        frame = fresh_frame()
        c = complex_realization(frame, lex)
        s = simple_realization(frame)
        if set(c) <= covered and set(s) <= covered:
            aligned.append((c, s))
    pairs = tuple(aligned[:n_pairs])
    train_pairs = tuple(aligned[n_pairs:])

    rules = tuple(
        SimplificationRule(RULE_SCORE, (complex_word,), (simple_word,))
        for simple_word, complex_word in sorted(lex.synonym_map.items())
    )
    table = build_rule_table(rules, min_score=0.5, top_k=5)
    embedding_corpus = Corpus(simple_sentences + complex_sentences, "unlabeled")
    return ToyDataset(
        simple=Corpus(simple_sentences, "simple"),
        complex=Corpus(complex_sentences, "complex"),
        pairs=pairs,
        train_pairs=train_pairs,
        rules=rules,
        rule_table=table,
        filler_tokens=lex.filler_tokens,
        embedding_corpus=embedding_corpus,
        lexicon=lex,
    )


def write_dataset(dataset: ToyDataset, out_dir) -> dict[str, str]:
    """Write the standard corpus files, pair files, and the rule TSV."""
    from pathlib import Path

    from .ppdb import serialize_rules
    from .textcore import detokenize, write_corpus

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "simple": out / "simple.txt",
        "complex": out / "complex.txt",
        "pairs": out / "pairs.tsv",
        "train_pairs": out / "train_pairs.tsv",
        "rules": out / "rules.tsv",
    }
    write_corpus(dataset.simple, paths["simple"])
    write_corpus(dataset.complex, paths["complex"])
    for key in ("pairs", "train_pairs"):
        with open(paths[key], "w", encoding="utf-8") as fh:
            for c, s in getattr(dataset, key):
                fh.write(f"{detokenize(c)}\t{detokenize(s)}\n")
    with open(paths["rules"], "w", encoding="utf-8") as fh:
        fh.write(serialize_rules(dataset.rules))
    return {k: str(v) for k, v in paths.items()}


def read_pairs(path) -> tuple[tuple[Sentence, Sentence], ...]:
    """Read a "complex<TAB>simple" pair file."""
    from .textcore import tokenize

    pairs = []
    for line in open(path, encoding="utf-8"):
        if not line.strip():
            continue
        complex_text, simple_text = line.rstrip("\n").split("\t")
        pairs.append((tokenize(complex_text), tokenize(simple_text)))
    return tuple(pairs)
