"""End-to-end training: DAE pretraining, iterative back-translation with
cross-entropy and policy-gradient updates, optional supervised mixing, and
BLEU-gated SARI model selection.

The run is fully deterministic given its seed: every stochastic component
draws from its own (component, epoch) random stream, which also makes
checkpoint-resume exact. Run reports contain no wall-clock data (timings go
to a separate sidecar) so identically-seeded runs emit byte-identical
reports.
"""

from __future__ import annotations

import json
import shutil
import warnings
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import seqmodel
from .errors import EmptyCorpus, NoRecords, NoQualifyingEpoch, NumericError
from .metrics import bleu, fkgl, sari
from .noising import NoiseConfig, noise_complex, noise_simple
from .ppdb import RuleTable, build_rule_table, load_rules
from .reward import (
    GammaSchedule,
    RewardBundle,
    ZERO_BUNDLE,
    advantage,
    blend_gradients,
    gamma_at,
    total_reward,
)
from .scorers import corpus_fkgl_stats, train_embeddings, train_lm
from .seqmodel import (
    AdamState,
    DualDecoderModel,
    batch_nll_and_grad,
    decode_greedy,
    decode_greedy_batch,
    decode_sample,
    init_adam,
    init_model,
    load_checkpoint,
    pg_grad,
    save_checkpoint,
    zero_grads,
)
from .synthdata import read_pairs
from .textcore import (
    Corpus,
    RandomSource,
    Sentence,
    Vocabulary,
    build_vocabulary,
    make_rng,
    read_corpus,
)

# Random stream allocation: component base * STREAM_SPAN + epoch. Pretraining
# and pool selection use epoch 0 of their own bases.
STREAM_SPAN = 100_000
STREAM_NOISE_SIMPLE = 1
STREAM_NOISE_COMPLEX = 2
STREAM_PRETRAIN_DATA = 3
STREAM_BT_DATA = 4
STREAM_SAMPLING = 5
STREAM_SUPERVISED = 6

TRAINER_STATE_FILE = "trainer_state.json"
RUN_REPORT_FILE = "run_report.json"
TIMINGS_FILE = "timings.json"
TRAINING_LOG_FILE = "training_log.jsonl"


def _stream(base: int, epoch: int = 0) -> int:
    return base * STREAM_SPAN + epoch


@dataclass(frozen=True)
class TrainerConfig:
    """All training knobs; flat so a key=value config file can set any field."""

    seed: int = 0
    hidden_dim: int = 64
    batch_size: int = 16
    pretrain_steps: int = 5000
    lr_pretrain: float = 1e-4
    lr_bt: float = 5e-5
    bt_epochs: int = 10
    epoch_size: int = 800
    supervision_fraction: float = 0.0
    rl_enabled: bool = False
    noise_preset: str = "full"
    p_rep: float = 0.9
    p_del: float = 0.6
    additive_frac_lo: float = 0.25
    additive_frac_hi: float = 0.35
    shuffle_k: int = 3
    frequent_threshold: int = 100
    lm_order: int = 3
    embed_dim: int = 32
    sif_a: float = 1e-3
    gamma_max: float = 0.9
    gamma_slope: float = 8.0
    gamma_ramp_start: int = -1  # -1: end of the first back-translation epoch
    gamma_ramp_length: int = -1  # -1: four epochs of back-translation steps
    xi: float = 0.0
    dae_interleave: bool = True
    reward_probe_size: int = 64
    advantage_scale: float = 1.0  # test hook: 0 silences the policy gradient

    def __post_init__(self):
        if self.lr_pretrain <= 0 or self.lr_bt <= 0:
            raise ValueError("learning rates must be positive")
        if not 0.0 <= self.supervision_fraction <= 1.0:
            raise ValueError("supervision_fraction must lie in [0, 1]")

    def noise_config(self) -> NoiseConfig:
        return NoiseConfig(
            p_rep=self.p_rep,
            p_del=self.p_del,
            additive_frac_lo=self.additive_frac_lo,
            additive_frac_hi=self.additive_frac_hi,
            shuffle_k=self.shuffle_k,
            preset=self.noise_preset,
        )

    def steps_per_epoch(self) -> int:
        return max(1, -(-self.epoch_size // self.batch_size))

    def gamma_schedule(self) -> GammaSchedule:
        spe = self.steps_per_epoch()
        start = self.gamma_ramp_start if self.gamma_ramp_start >= 0 else spe
        length = self.gamma_ramp_length if self.gamma_ramp_length >= 1 else 4 * spe
        return GammaSchedule(
            gamma_max=self.gamma_max,
            ramp_start=start,
            ramp_length=length,
            slope=self.gamma_slope,
        )


@dataclass(frozen=True)
class SelectionConfig:
    xi: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.xi <= 100.0:
            raise ValueError("xi must lie in [0, 100]")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    dev_sari: float
    dev_bleu: float
    checkpoint: str
    mean_reward_simple: float
    mean_reward_complex: float
    dev_output_fkgl: float
    supervised_batches: int = 0

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def select_model(records, sel: SelectionConfig) -> EpochRecord:
    """Best-SARI epoch among those with BLEU >= xi (ties -> earliest epoch).

    If no epoch qualifies, returns the best-BLEU epoch and emits a
    NoQualifyingEpoch warning.
    """
    records = list(records)
    if not records:
        raise NoRecords("no epoch records to select from")
    qualifying = [r for r in records if r.dev_bleu >= sel.xi]
    if qualifying:
        return max(qualifying, key=lambda r: (r.dev_sari, -r.epoch))
    warnings.warn(
        f"no epoch reached BLEU >= {sel.xi}; returning the best-BLEU epoch",
        NoQualifyingEpoch,
    )
    return max(records, key=lambda r: (r.dev_bleu, -r.epoch))


@dataclass(frozen=True)
class TrainingExample:
    source: Sentence
    target: Sentence
    direction: str
    origin: str


def backtranslate(model: DualDecoderModel, batch, source_side: str):
    """Greedy-decode synthetic sources; originals stay the targets.

    Simple inputs yield (synthetic complex, simple) examples that may only
    train the complex->simple direction, and vice versa.
    """
    if source_side not in ("simple", "complex"):
        raise ValueError(f"source_side must be 'simple' or 'complex', got {source_side!r}")
    generate_direction = "s->c" if source_side == "simple" else "c->s"
    train_direction = "c->s" if source_side == "simple" else "s->c"
    decoded = decode_greedy_batch(model, list(batch), generate_direction)
    return [
        TrainingExample(out.tokens, tuple(sentence), train_direction, source_side)
        for sentence, out in zip(batch, decoded)
    ]


class Noiser:
    """Applies the side-specific noise pipelines with donor sampling."""

    def __init__(self, table: RuleTable, config: NoiseConfig, vocab: Vocabulary, donors):
        self.table = table
        self.config = config
        self.vocab = vocab
        self.donors = list(donors)

    def simple(self, sentence: Sentence, rng: RandomSource) -> Sentence:
        donor = self._pick_donor(sentence, rng)
        return noise_simple(sentence, donor, self.table, self.config, self.vocab, rng)

    def complex(self, sentence: Sentence, rng: RandomSource) -> Sentence:
        return noise_complex(sentence, self.table, self.config, self.vocab, rng)

    def _pick_donor(self, sentence: Sentence, rng: RandomSource) -> Sentence:
        donor = self.donors[rng.choice_index(len(self.donors))]
        for _ in range(10):
            if donor != sentence:
                break
            donor = self.donors[rng.choice_index(len(self.donors))]
        return donor


@dataclass
class TrainContext:
    """Everything train_iteration needs besides the model itself."""

    simple: list[Sentence]
    complex: list[Sentence]
    noiser: Noiser
    scorers: "ScorerBundle"
    config: TrainerConfig
    adam: AdamState
    dev_pairs: tuple = ()
    sup_pairs: tuple = ()
    out_dir: Path | None = None
    log_fh: object = None
    dev_sentences: frozenset = frozenset()

    def __post_init__(self):
        if not self.dev_sentences:
            hashes = set()
            for c, s in self.dev_pairs:
                hashes.add(tuple(c))
                hashes.add(tuple(s))
            self.dev_sentences = frozenset(hashes)

    def assert_dev_isolated(self, sentences):
        for sentence in sentences:
            if tuple(sentence) in self.dev_sentences:
                raise AssertionError(
                    f"dev sentence leaked into a training batch: {' '.join(sentence)}"
                )

    def log(self, record: dict):
        if self.log_fh is not None:
            self.log_fh.write(json.dumps(record) + "\n")


@dataclass(frozen=True)
class ScorerBundle:
    lm_simple: object
    lm_complex: object
    emb: object
    vocab: Vocabulary
    fkgl_stats: object
    sif_a: float = 1e-3

    def bundle_for(self, sentence, model_input, side) -> RewardBundle:
        if not sentence:
            return ZERO_BUNDLE
        lm = self.lm_simple if side == "simple" else self.lm_complex
        return total_reward(
            sentence, model_input, side, lm, self.emb, self.vocab, self.fkgl_stats, self.sif_a
        )


def build_scorers(simple: Corpus, complex_corpus: Corpus, config: TrainerConfig) -> ScorerBundle:
    vocab = build_vocabulary([simple, complex_corpus], config.frequent_threshold)
    lm_s = train_lm(simple, config.lm_order)
    lm_c = train_lm(complex_corpus, config.lm_order)
    union = Corpus(tuple(simple.sentences) + tuple(complex_corpus.sentences), "unlabeled")
    emb = train_embeddings([union], config.embed_dim)
    stats = corpus_fkgl_stats(union)
    return ScorerBundle(lm_s, lm_c, emb, vocab, stats, config.sif_a)


def _accumulate(total: dict, grads: dict) -> None:
    for k, g in grads.items():
        total[k] += g


def _scale(grads: dict, factor: float) -> dict:
    for k in grads:
        grads[k] *= factor
    return grads


def _batch_indices(rng: RandomSource, n: int, count: int) -> list[int]:
    return [rng.choice_index(n) for _ in range(count)]


def pretrain_dae(model, simple_corpus, complex_corpus, noiser: Noiser, config: TrainerConfig,
                 adam: AdamState | None = None, out_dir=None, log_fh=None):
    """Alternate denoising-reconstruction batches on the two sides.

    Even steps train (encoder, simple decoder) to reconstruct clean simple
    sentences from their corrupted versions; odd steps do the complex side.
    Returns (model, losses). On numeric failure the last periodic snapshot
    is written to out_dir before the error propagates.
    """
    simple_sents = list(simple_corpus)
    complex_sents = list(complex_corpus)
    if not simple_sents or not complex_sents:
        raise EmptyCorpus("pretraining needs non-empty corpora on both sides")
    if adam is None:
        adam = init_adam(model)
    rng_data = make_rng(config.seed, _stream(STREAM_PRETRAIN_DATA))
    rng_noise_s = make_rng(config.seed, _stream(STREAM_NOISE_SIMPLE))
    rng_noise_c = make_rng(config.seed, _stream(STREAM_NOISE_COMPLEX))
    losses = []
    snapshot = None
    try:
        for step in range(config.pretrain_steps):
            if step % 200 == 0:
                snapshot = {k: p.copy() for k, p in model.params.items()}
            simple_side = step % 2 == 0
            pool = simple_sents if simple_side else complex_sents
            direction = "s->s" if simple_side else "c->c"
            batch = [pool[i] for i in _batch_indices(rng_data, len(pool), config.batch_size)]
            pairs = []
            for clean in batch:
                noised = noiser.simple(clean, rng_noise_s) if simple_side else noiser.complex(clean, rng_noise_c)
                pairs.append((noised, clean))
            batch_loss, grads = batch_nll_and_grad(model, pairs, direction)
            if not np.isfinite(batch_loss):
                raise NumericError(f"non-finite pretraining loss at step {step}")
            adam_step_checked(model, grads, adam, config.lr_pretrain, f"pretrain step {step}")
            losses.append(batch_loss)
            if log_fh is not None and step % 50 == 0:
                log_fh.write(json.dumps({"stage": "pretrain", "step": step, "loss": losses[-1]}) + "\n")
    except NumericError:
        if out_dir is not None and snapshot is not None:
            rescue = DualDecoderModel(model.tokens, model.hidden_dim, snapshot)
            save_checkpoint(rescue, adam, Path(out_dir) / "pretrain_lastgood.npz")
        raise
    return model, losses


def adam_step_checked(model, grads, adam, lr, where: str):
    try:
        seqmodel.adam_step(model, grads, adam, lr)
    except NumericError as exc:
        raise NumericError(f"{exc} ({where})") from exc


def bt_batch_gradient(model, ctx: TrainContext, batch_simple, batch_complex, gamma, rng_sample):
    """One back-translation batch: CE on both directions plus optional PG.

    Returns (blended gradient dict, stats dict). The blend follows
    (1 - gamma) * ce + gamma * pg; when gamma is 0 or RL is off the CE
    gradient is returned untouched.
    """
    config = ctx.config
    examples = backtranslate(model, batch_simple, "simple")
    examples += backtranslate(model, batch_complex, "complex")
    n = len(examples)
    ce_grads = zero_grads(model)
    ce_loss = 0.0
    for direction in ("c->s", "s->c"):
        expected_origin = "simple" if direction == "c->s" else "complex"
        group = [ex for ex in examples if ex.direction == direction]
        if any(ex.origin != expected_origin for ex in group):
            raise AssertionError(f"wrong-origin pair tagged for direction {direction}")
        if not group:
            continue
        loss, g = batch_nll_and_grad(model, [(ex.source, ex.target) for ex in group], direction)
        ce_loss += loss * len(group)
        _accumulate(ce_grads, {k: v * len(group) for k, v in g.items()})
    if not np.isfinite(ce_loss):
        raise NumericError("non-finite back-translation loss")
    _scale(ce_grads, 1.0 / n)
    stats = {"loss_ce": ce_loss / n, "loss_pg": 0.0, "gamma": gamma}

    pg_grads = None
    use_rl = config.rl_enabled and gamma > 0.0
    if use_rl:
        pg_grads = zero_grads(model)
        pg_loss = 0.0
        traces = {"simple": [], "complex": []}
        for ex in examples:
            side = "simple" if ex.origin == "simple" else "complex"
            sample = decode_sample(model, ex.source, ex.direction, rng_sample)
            greedy = decode_greedy(model, ex.source, ex.direction)
            sample_b = ctx.scorers.bundle_for(sample.tokens, ex.source, side)
            greedy_b = ctx.scorers.bundle_for(greedy.tokens, ex.source, side)
            adv = advantage(sample_b, greedy_b) * config.advantage_scale
            _accumulate(pg_grads, pg_grad(model, ex.source, sample, adv, ex.direction))
            pg_loss += -adv * sample.total_logprob()
            traces[side].append((sample_b, adv))
        _scale(pg_grads, 1.0 / n)
        stats["loss_pg"] = pg_loss / n
        for side, rows in traces.items():
            if rows:
                stats[f"reward_{side}"] = {
                    "r_f": float(np.mean([b.r_f for b, _ in rows])),
                    "r_s": float(np.mean([b.r_s for b, _ in rows])),
                    "r_c": float(np.mean([b.r_c for b, _ in rows])),
                    "total": float(np.mean([b.total for b, _ in rows])),
                    "advantage": float(np.mean([a for _, a in rows])),
                }
    return blend_gradients(ce_grads, pg_grads, gamma if use_rl else 0.0), stats


def _dae_batch_gradient(model, ctx, batch, side, rng_noise):
    direction = "s->s" if side == "simple" else "c->c"
    pairs = []
    for clean in batch:
        noised = ctx.noiser.simple(clean, rng_noise) if side == "simple" else ctx.noiser.complex(clean, rng_noise)
        pairs.append((noised, clean))
    loss, grads = batch_nll_and_grad(model, pairs, direction)
    return grads, loss


def _supervised_batch_gradient(model, batch_pairs):
    loss_cs, grads = batch_nll_and_grad(
        model, [(c, s) for c, s in batch_pairs], "c->s"
    )
    loss_sc, g = batch_nll_and_grad(
        model, [(s, c) for c, s in batch_pairs], "s->c"
    )
    _accumulate(grads, g)
    _scale(grads, 0.5)
    return grads, (loss_cs + loss_sc) / 2


def evaluate_model(model, dev_pairs):
    """Greedy-decode the dev complex sides and score against references."""
    inputs = [c for c, _ in dev_pairs]
    refs = [[s] for _, s in dev_pairs]
    outputs = [out.tokens for out in decode_greedy_batch(model, inputs, "c->s")]
    report = sari(inputs, outputs, refs)
    return {
        "sari": report.sari,
        "f_keep": report.f_keep,
        "f_del": report.f_del,
        "f_add": report.f_add,
        "bleu": bleu(outputs, refs),
        "output_fkgl": fkgl(outputs).fkgl,
    }


def probe_rewards(model, ctx: TrainContext) -> tuple[float, float]:
    """Mean greedy-output total reward per side on fixed probe inputs."""
    k = ctx.config.reward_probe_size
    probe_complex = ctx.complex[:k]
    probe_simple = ctx.simple[:k]
    simple_totals = [
        ctx.scorers.bundle_for(out.tokens, y, "simple").total
        for y, out in zip(probe_complex, decode_greedy_batch(model, probe_complex, "c->s"))
    ]
    complex_totals = [
        ctx.scorers.bundle_for(out.tokens, x, "complex").total
        for x, out in zip(probe_simple, decode_greedy_batch(model, probe_simple, "s->c"))
    ]
    return float(np.mean(simple_totals)), float(np.mean(complex_totals))


def train_iteration(model, ctx: TrainContext, iteration: int):
    """One back-translation epoch: Algorithm-1 loop body plus evaluation.

    Round-robin slots per step: optional supervised batch, the
    back-translation batch (CE + optional PG blended by gamma), and an
    optional interleaved DAE batch alternating sides.
    """
    config = ctx.config
    schedule = config.gamma_schedule()
    steps = config.steps_per_epoch()
    rng_data = make_rng(config.seed, _stream(STREAM_BT_DATA, iteration))
    rng_noise_s = make_rng(config.seed, _stream(STREAM_NOISE_SIMPLE, iteration + 1))
    rng_noise_c = make_rng(config.seed, _stream(STREAM_NOISE_COMPLEX, iteration + 1))
    rng_sample = make_rng(config.seed, _stream(STREAM_SAMPLING, iteration))
    losses = {"ce": [], "pg": [], "dae": [], "supervised": []}
    supervised_batches = 0
    for step in range(steps):
        global_bt_step = iteration * steps + step
        gamma = gamma_at(schedule, global_bt_step) if config.rl_enabled else 0.0

        if config.supervision_fraction > 0.0 and ctx.sup_pairs:
            pair_batch = [
                ctx.sup_pairs[i]
                for i in _batch_indices(rng_data, len(ctx.sup_pairs), config.batch_size)
            ]
            ctx.assert_dev_isolated([c for c, _ in pair_batch] + [s for _, s in pair_batch])
            grads, loss = _supervised_batch_gradient(model, pair_batch)
            adam_step_checked(model, grads, ctx.adam, config.lr_bt, f"supervised step {step}")
            losses["supervised"].append(loss)
            supervised_batches += 1

        batch_simple = [
            ctx.simple[i] for i in _batch_indices(rng_data, len(ctx.simple), config.batch_size)
        ]
        batch_complex = [
            ctx.complex[i] for i in _batch_indices(rng_data, len(ctx.complex), config.batch_size)
        ]
        ctx.assert_dev_isolated(batch_simple + batch_complex)
        grads, stats = bt_batch_gradient(model, ctx, batch_simple, batch_complex, gamma, rng_sample)
        adam_step_checked(model, grads, ctx.adam, config.lr_bt, f"bt step {global_bt_step}")
        losses["ce"].append(stats["loss_ce"])
        losses["pg"].append(stats["loss_pg"])
        log_row = {
            "stage": "bt",
            "epoch": iteration,
            "step": global_bt_step,
            "loss_ce": stats["loss_ce"],
            "loss_pg": stats["loss_pg"],
            "gamma": stats["gamma"],
        }
        ctx.log(log_row)
        for side in ("simple", "complex"):
            trace = stats.get(f"reward_{side}")
            if trace:
                ctx.log({"step": global_bt_step, "side": side, **trace})

        if config.dae_interleave:
            side = "simple" if step % 2 == 0 else "complex"
            pool = ctx.simple if side == "simple" else ctx.complex
            rng_noise = rng_noise_s if side == "simple" else rng_noise_c
            batch = [pool[i] for i in _batch_indices(rng_data, len(pool), config.batch_size)]
            ctx.assert_dev_isolated(batch)
            grads, loss = _dae_batch_gradient(model, ctx, batch, side, rng_noise)
            adam_step_checked(model, grads, ctx.adam, config.lr_bt, f"dae step {step}")
            losses["dae"].append(loss)

    dev = evaluate_model(model, ctx.dev_pairs)
    reward_simple, reward_complex = probe_rewards(model, ctx)
    checkpoint_name = f"epoch_{iteration}.npz"
    if ctx.out_dir is not None:
        save_checkpoint(model, ctx.adam, ctx.out_dir / checkpoint_name)
    record = EpochRecord(
        epoch=iteration,
        dev_sari=dev["sari"],
        dev_bleu=dev["bleu"],
        checkpoint=checkpoint_name,
        mean_reward_simple=reward_simple,
        mean_reward_complex=reward_complex,
        dev_output_fkgl=dev["output_fkgl"],
        supervised_batches=supervised_batches,
    )
    ctx.log({"stage": "epoch", "epoch": iteration, **{k: v for k, v in record.to_dict().items() if k != "checkpoint"}})
    return model, losses, record


@dataclass(frozen=True)
class RunPaths:
    simple: str
    complex: str
    rules: str
    dev_pairs: str
    out_dir: str
    train_pairs: str | None = None


@dataclass
class RunResult:
    model: DualDecoderModel
    records: list
    selected: EpochRecord
    report: dict
    report_path: str


def _model_vocab_tokens(vocab: Vocabulary, table: RuleTable, pair_sets) -> list[str]:
    extra = set()
    for index in (table.forward, table.reverse):
        for key, candidates in index.items():
            extra.update(key)
            for phrase, _ in candidates:
                extra.update(phrase)
    for pairs in pair_sets:
        for c, s in pairs:
            extra.update(c)
            extra.update(s)
    return sorted(extra - set(vocab.counts))


def run(config: TrainerConfig, paths: RunPaths, resume: bool = False) -> RunResult:
    """Execute the full pipeline and emit the selected checkpoint + report."""
    import time

    out_dir = Path(paths.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    timings = {}
    clock = time.perf_counter

    t0 = clock()
    simple_corpus = read_corpus(paths.simple, "simple")
    complex_corpus = read_corpus(paths.complex, "complex")
    rules = load_rules(paths.rules)
    table = build_rule_table(rules)
    dev_pairs = read_pairs(paths.dev_pairs)
    train_pairs = read_pairs(paths.train_pairs) if paths.train_pairs else ()
    scorer_bundle = build_scorers(simple_corpus, complex_corpus, config)
    vocab = scorer_bundle.vocab
    timings["load_and_scorers"] = clock() - t0

    sup_pairs = ()
    if config.supervision_fraction > 0.0 and train_pairs:
        rng_sup = make_rng(config.seed, _stream(STREAM_SUPERVISED))
        order = rng_sup.permutation(len(train_pairs))
        count = max(1, round(config.supervision_fraction * len(train_pairs)))
        sup_pairs = tuple(train_pairs[i] for i in order[:count])

    noiser = Noiser(table, config.noise_config(), vocab, list(simple_corpus))
    log_fh = open(out_dir / TRAINING_LOG_FILE, "a", encoding="utf-8", buffering=1)

    state_path = out_dir / TRAINER_STATE_FILE
    records: list[EpochRecord] = []
    start_epoch = 0
    copy_eval = None
    pretrain_eval = None

    try:
        if resume and state_path.exists():
            state = json.loads(state_path.read_text())
            records = [EpochRecord.from_dict(d) for d in state["records"]]
            start_epoch = state["completed_epochs"]
            copy_eval = state["copy_eval"]
            pretrain_eval = state["pretrain_eval"]
            checkpoint = state["last_checkpoint"]
            model, adam = load_checkpoint(out_dir / checkpoint)
        else:
            extra_tokens = _model_vocab_tokens(vocab, table, [dev_pairs, train_pairs])
            model = init_model_with_extras(vocab, config.hidden_dim, config.seed, extra_tokens)
            adam = init_adam(model)
            inputs = [c for c, _ in dev_pairs]
            refs = [[s] for _, s in dev_pairs]
            copy_eval = {
                "sari": sari(inputs, inputs, refs).sari,
                "bleu": bleu(inputs, refs),
                "input_fkgl": fkgl(inputs).fkgl,
            }
            t0 = clock()
            model, _pre_losses = pretrain_dae(
                model, simple_corpus, complex_corpus, noiser, config,
                adam=adam, out_dir=out_dir, log_fh=log_fh,
            )
            timings["pretrain"] = clock() - t0
            save_checkpoint(model, adam, out_dir / "pretrained.npz")
            pretrain_eval = evaluate_model(model, dev_pairs)
            log_fh.write(json.dumps({"stage": "pretrain_eval", **pretrain_eval}) + "\n")

        ctx = TrainContext(
            simple=list(simple_corpus),
            complex=list(complex_corpus),
            noiser=noiser,
            scorers=scorer_bundle,
            config=config,
            adam=adam,
            dev_pairs=dev_pairs,
            sup_pairs=sup_pairs,
            out_dir=out_dir,
            log_fh=log_fh,
        )

        t0 = clock()
        for iteration in range(start_epoch, config.bt_epochs):
            model, _losses, record = train_iteration(model, ctx, iteration)
            records.append(record)
            state_path.write_text(
                json.dumps(
                    {
                        "completed_epochs": iteration + 1,
                        "records": [r.to_dict() for r in records],
                        "copy_eval": copy_eval,
                        "pretrain_eval": pretrain_eval,
                        "last_checkpoint": record.checkpoint,
                    }
                )
            )
        timings["back_translation"] = clock() - t0
    finally:
        log_fh.close()

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        selected = select_model(records, SelectionConfig(config.xi))
    qualified = not any(issubclass(w.category, NoQualifyingEpoch) for w in caught)
    shutil.copyfile(out_dir / selected.checkpoint, out_dir / "selected.npz")

    report = {
        "config": asdict(config),
        "copy_baseline": copy_eval,
        "pretrain_eval": pretrain_eval,
        "supervised_pool": len(sup_pairs),
        "parallel_pool": len(train_pairs),
        "epochs": [r.to_dict() for r in records],
        "selected_epoch": selected.epoch,
        "selection_qualified": qualified,
        "selected": selected.to_dict(),
    }
    report_path = out_dir / RUN_REPORT_FILE
    report_path.write_text(json.dumps(report, indent=2) + "\n")
    (out_dir / TIMINGS_FILE).write_text(json.dumps(timings, indent=2) + "\n")
    return RunResult(model, records, selected, report, str(report_path))


def init_model_with_extras(vocab: Vocabulary, hidden_dim: int, seed: int, extra_tokens):
    """init_model over the counts vocabulary extended with zero-count tokens.

    Rule candidates and aligned-pair tokens must be encodable even when
    they never occur in the unpaired corpora; they join the embedding
    table without entering the frequency statistics.
    """
    if not extra_tokens:
        return init_model(vocab, hidden_dim, seed)
    merged = dict(vocab.counts)
    for token in extra_tokens:
        merged.setdefault(token, 0)
    widened = Vocabulary(merged, vocab.frequent_threshold)
    return init_model(widened, hidden_dim, seed)
