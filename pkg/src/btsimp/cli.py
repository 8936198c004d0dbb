"""Command-line surface tying the modules into runnable workflows.

Subcommands: gen-data, build-rules, noise, train-lm, pretrain, train,
simplify, evaluate, score. Exit codes: 0 success, 1 usage error, 2 runtime
error. Every randomized subcommand requires an explicit --seed, and every
subcommand that writes files also writes a sidecar with the effective
configuration.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import ppdb, synthdata, trainer
from .errors import BtsimpError
from .metrics import bleu, fkgl, sari
from .noising import NoiseConfig
from .scorers import train_lm
from .seqmodel import decode_greedy, load_checkpoint
from .textcore import build_vocabulary, detokenize, make_rng, read_corpus, tokenize


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _write_sidecar(out_dir, name: str, values: dict) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines = [f"{k}={values[k]}" for k in sorted(values)]
    (out / f"{name}.config.txt").write_text("\n".join(lines) + "\n")


def _parse_config_file(path) -> dict:
    values = {}
    for lineno, line in enumerate(open(path, encoding="utf-8"), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _coerce(value: str, to_type):
    if to_type is bool:
        lowered = value.lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise UsageError(f"cannot read {value!r} as a boolean")
    return to_type(value)


def _trainer_config(args) -> trainer.TrainerConfig:
    fields = {f.name: f.type for f in dataclasses.fields(trainer.TrainerConfig)}
    types = {
        name: (int if t in ("int", int) else float if t in ("float", float) else bool if t in ("bool", bool) else str)
        for name, t in fields.items()
    }
    values: dict = {}
    if getattr(args, "config", None):
        for key, raw in _parse_config_file(args.config).items():
            if key not in types:
                raise UsageError(f"unknown config key {key!r}")
            values[key] = _coerce(raw, types[key])
    for key in ("supervision_fraction", "xi"):
        override = getattr(args, key, None)
        if override is not None:
            values[key] = override
    if getattr(args, "rl", None) is not None:
        values["rl_enabled"] = args.rl == "on"
    values["seed"] = args.seed
    return trainer.TrainerConfig(**values)


def _run_paths(args, out_dir) -> trainer.RunPaths:
    return trainer.RunPaths(
        simple=args.simple,
        complex=args.complex,
        rules=args.rules,
        dev_pairs=args.dev_pairs,
        train_pairs=getattr(args, "train_pairs", None),
        out_dir=str(out_dir),
    )


def _add_data_args(p, with_pairs=True):
    p.add_argument("--simple", required=True, help="simple-side corpus file")
    p.add_argument("--complex", required=True, help="complex-side corpus file")
    p.add_argument("--rules", required=True, help="rule TSV file")
    if with_pairs:
        p.add_argument("--dev-pairs", required=True, dest="dev_pairs",
                       help="held-out pairs TSV (complex<TAB>simple)")
        p.add_argument("--train-pairs", dest="train_pairs", default=None,
                       help="parallel pairs TSV for semi-supervised training")


def build_parser() -> _Parser:
    parser = _Parser(prog="btsimp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="generate the synthetic toy dataset")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--n-simple", type=int, default=5000)
    p.add_argument("--n-complex", type=int, default=5000)
    p.add_argument("--n-pairs", type=int, default=200)
    p.add_argument("--n-train-pairs", type=int, default=2000)

    p = sub.add_parser("build-rules", help="filter and re-emit a rule table")
    p.add_argument("--rules", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--min-score", type=float, default=0.5)
    p.add_argument("--top-k", type=int, default=5)

    p = sub.add_parser("noise", help="stream original<TAB>noised pairs")
    p.add_argument("--side", choices=("simple", "complex"), required=True)
    p.add_argument("--preset", choices=("original", "additive", "full"), default="full")
    p.add_argument("--rules", required=True)
    p.add_argument("--input", required=True, help="corpus file to noise")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--frequent-threshold", type=int, default=100)
    p.add_argument("--limit", type=int, default=None)

    p = sub.add_parser("train-lm", help="train and dump an n-gram language model")
    p.add_argument("--input", required=True)
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--out", required=True)

    p = sub.add_parser("pretrain", help="denoising-autoencoder pretraining only")
    _add_data_args(p, with_pairs=False)
    p.add_argument("--config", default=None, help="key=value config file")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("train", help="full training pipeline")
    _add_data_args(p)
    p.add_argument("--config", default=None, help="key=value config file")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--supervision-fraction", type=float, default=None, dest="supervision_fraction")
    p.add_argument("--rl", choices=("on", "off"), default=None)
    p.add_argument("--xi", type=float, default=None)
    p.add_argument("--resume", action="store_true")

    p = sub.add_parser("simplify", help="simplify stdin lines with a checkpoint")
    p.add_argument("--checkpoint", required=True)

    p = sub.add_parser("evaluate", help="score outputs against inputs and references")
    p.add_argument("--inputs", required=True)
    p.add_argument("--outputs", required=True)
    p.add_argument("--refs", required=True, help="comma-separated reference files")

    p = sub.add_parser("score", help="reward bundles for input<TAB>output pairs")
    p.add_argument("--simple", required=True)
    p.add_argument("--complex", required=True)
    p.add_argument("--pairs", required=True, help="TSV input<TAB>output, one per line")
    p.add_argument("--side", choices=("simple", "complex"), required=True)
    p.add_argument("--frequent-threshold", type=int, default=100)
    return parser


def _cmd_gen_data(args) -> int:
    config = synthdata.ToyGrammarConfig(seed=args.seed)
    dataset = synthdata.generate(
        config, args.n_simple, args.n_complex, args.n_pairs, args.n_train_pairs
    )
    paths = synthdata.write_dataset(dataset, args.out_dir)
    _write_sidecar(args.out_dir, "gen-data", {
        "seed": args.seed,
        "n_simple": args.n_simple,
        "n_complex": args.n_complex,
        "n_pairs": args.n_pairs,
        "n_train_pairs": args.n_train_pairs,
    })
    print(json.dumps(paths))
    return 0


def _cmd_build_rules(args) -> int:
    rules = ppdb.load_rules(args.rules)
    table = ppdb.build_rule_table(rules, args.min_score, args.top_k)
    kept = [
        ppdb.SimplificationRule(score, key, phrase)
        for key, candidates in sorted(table.forward.items())
        for phrase, score in candidates
    ]
    Path(args.out).write_text(ppdb.serialize_rules(kept))
    _write_sidecar(Path(args.out).parent, "build-rules", {
        "min_score": args.min_score, "top_k": args.top_k, "rules": args.rules,
    })
    print(f"kept {len(kept)} rules ({len(rules)} parsed)")
    return 0


def _cmd_noise(args) -> int:
    corpus = read_corpus(args.input, args.side)
    table = ppdb.build_rule_table(ppdb.load_rules(args.rules))
    vocab = build_vocabulary([corpus], args.frequent_threshold)
    config = NoiseConfig(preset=args.preset)
    noiser = trainer.Noiser(table, config, vocab, list(corpus))
    rng = make_rng(args.seed, stream=0)
    sentences = list(corpus)
    if args.limit is not None:
        sentences = sentences[: args.limit]
    for sentence in sentences:
        noised = noiser.simple(sentence, rng) if args.side == "simple" else noiser.complex(sentence, rng)
        sys.stdout.write(f"{detokenize(sentence)}\t{detokenize(noised)}\n")
    return 0


def _cmd_train_lm(args) -> int:
    corpus = read_corpus(args.input)
    lm = train_lm(corpus, args.order)
    lm.save(args.out)
    _write_sidecar(Path(args.out).parent, "train-lm", {
        "input": args.input, "order": args.order,
    })
    print(f"trained order-{args.order} LM over {lm.vocab_size} token types")
    return 0


def _cmd_pretrain(args) -> int:
    config = _trainer_config(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    simple_corpus = read_corpus(args.simple, "simple")
    complex_corpus = read_corpus(args.complex, "complex")
    rules = ppdb.load_rules(args.rules)
    table = ppdb.build_rule_table(rules)
    scorer_bundle = trainer.build_scorers(simple_corpus, complex_corpus, config)
    extra = trainer._model_vocab_tokens(scorer_bundle.vocab, table, [])
    model = trainer.init_model_with_extras(scorer_bundle.vocab, config.hidden_dim, config.seed, extra)
    noiser = trainer.Noiser(table, config.noise_config(), scorer_bundle.vocab, list(simple_corpus))
    from .seqmodel import init_adam, save_checkpoint

    adam = init_adam(model)
    model, losses = trainer.pretrain_dae(
        model, simple_corpus, complex_corpus, noiser, config, adam=adam, out_dir=out_dir
    )
    save_checkpoint(model, adam, out_dir / "pretrained.npz")
    _write_sidecar(out_dir, "pretrain", dataclasses.asdict(config))
    print(json.dumps({"final_loss": losses[-1], "checkpoint": str(out_dir / "pretrained.npz")}))
    return 0


def _cmd_train(args) -> int:
    config = _trainer_config(args)
    out_dir = Path(args.out_dir)
    result = trainer.run(config, _run_paths(args, out_dir), resume=args.resume)
    _write_sidecar(out_dir, "train", dataclasses.asdict(config))
    print(json.dumps({
        "report": result.report_path,
        "selected_epoch": result.selected.epoch,
        "dev_sari": result.selected.dev_sari,
        "dev_bleu": result.selected.dev_bleu,
    }))
    return 0


def _cmd_simplify(args) -> int:
    model, _state = load_checkpoint(args.checkpoint)
    for line in sys.stdin:
        if not line.strip():
            sys.stdout.write("\n")
            continue
        sentence = tokenize(line)
        output = decode_greedy(model, sentence, "c->s").tokens
        sys.stdout.write(detokenize(output) + "\n")
    return 0


def _cmd_evaluate(args) -> int:
    from .errors import ShapeError

    inputs = list(read_corpus(args.inputs))
    outputs = list(read_corpus(args.outputs))
    ref_corpora = [list(read_corpus(path)) for path in args.refs.split(",")]
    for path, corpus in zip(args.refs.split(","), ref_corpora):
        if len(corpus) != len(outputs):
            raise ShapeError(
                f"{path} has {len(corpus)} sentences, outputs have {len(outputs)}"
            )
    references = [[refs[i] for refs in ref_corpora] for i in range(len(outputs))]
    report = sari(inputs, outputs, references)
    payload = {
        "sari": report.sari,
        "f_keep": report.f_keep,
        "f_del": report.f_del,
        "f_add": report.f_add,
        "bleu": bleu(outputs, references),
        "fkgl": fkgl(outputs).fkgl,
    }
    print(json.dumps(payload))
    return 0


def _cmd_score(args) -> int:
    simple_corpus = read_corpus(args.simple, "simple")
    complex_corpus = read_corpus(args.complex, "complex")
    config = trainer.TrainerConfig(frequent_threshold=args.frequent_threshold)
    scorer_bundle = trainer.build_scorers(simple_corpus, complex_corpus, config)
    for line in open(args.pairs, encoding="utf-8"):
        if not line.strip():
            continue
        input_text, output_text = line.rstrip("\n").split("\t")
        bundle = scorer_bundle.bundle_for(tokenize(output_text), tokenize(input_text), args.side)
        print(json.dumps({
            "r_f": bundle.r_f, "r_s": bundle.r_s, "r_c": bundle.r_c, "total": bundle.total,
        }))
    return 0


_COMMANDS = {
    "gen-data": _cmd_gen_data,
    "build-rules": _cmd_build_rules,
    "noise": _cmd_noise,
    "train-lm": _cmd_train_lm,
    "pretrain": _cmd_pretrain,
    "train": _cmd_train,
    "simplify": _cmd_simplify,
    "evaluate": _cmd_evaluate,
    "score": _cmd_score,
}


def run_cli(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (BtsimpError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
