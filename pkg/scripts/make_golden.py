#!/usr/bin/env python3
"""Regenerate the frozen golden metric values in tests/golden/.

The expected values come from the brute-force oracle implementations in
tests/oracles.py, never from the package itself, so the golden files stay
an independent check on the metric code.
"""

import json
import random
import sys
from pathlib import Path

TESTS = Path(__file__).resolve().parent.parent / "tests"
sys.path.insert(0, str(TESTS))

from oracles import oracle_bleu, oracle_fkgl, oracle_sari, oracle_syllables  # noqa: E402

WORDS = ["the", "a", "cat", "dog", "sat", "ran", "big", "old", "tired", "mat",
         "bird", "saw", "green", "house", "fast", "slow", "tree", "hill"]


def random_sentence(rng, lo=4, hi=10):
    return [rng.choice(WORDS) for _ in range(rng.randint(lo, hi))]


def mutate(rng, sentence):
    out = list(sentence)
    for _ in range(rng.randint(0, 3)):
        op = rng.choice(["drop", "swap", "insert"])
        if op == "drop" and len(out) > 2:
            out.pop(rng.randrange(len(out)))
        elif op == "swap":
            out[rng.randrange(len(out))] = rng.choice(WORDS)
        else:
            out.insert(rng.randrange(len(out) + 1), rng.choice(WORDS))
    return out


def sari_cases(rng):
    cases = []
    # Hand-picked edge cases.
    fixed = [
        {"inputs": [["a", "b", "c", "d"]], "outputs": [["a", "b", "d"]],
         "references": [[["a", "b", "d"]]]},
        {"inputs": [["a", "b", "c", "d", "e"]], "outputs": [["a", "b", "c", "d", "e"]],
         "references": [[["a", "b", "c", "d", "e"]]]},
        {"inputs": [["the", "cat", "sat", "on", "the", "mat"]],
         "outputs": [["the", "cat", "sat"]],
         "references": [[["the", "cat", "sat"], ["a", "cat", "sat"]]]},
    ]
    cases.extend(fixed)
    for n_rows in (1, 2, 3, 5):
        for _ in range(5):
            inputs, outputs, references = [], [], []
            for _ in range(n_rows):
                src = random_sentence(rng)
                inputs.append(src)
                outputs.append(mutate(rng, src))
                references.append([mutate(rng, src) for _ in range(rng.randint(1, 3))])
            cases.append({"inputs": inputs, "outputs": outputs, "references": references})
    for case in cases:
        case["expected"] = oracle_sari(case["inputs"], case["outputs"], case["references"])
    return cases


def bleu_cases(rng):
    cases = [
        # Perfect match and a shortened candidate (brevity penalty < 1).
        {"outputs": [["the", "cat", "sat", "on", "the", "mat"]],
         "references": [[["the", "cat", "sat", "on", "the", "mat"]]]},
        {"outputs": [["the", "cat", "sat", "on"]],
         "references": [[["the", "cat", "sat", "on", "the", "mat"]]]},
        {"outputs": [["big", "green", "tree", "hill"]],
         "references": [[["the", "cat", "sat", "on", "the", "mat"]]]},
    ]
    for n_rows in (1, 2, 4):
        for _ in range(6):
            outputs, references = [], []
            for _ in range(n_rows):
                ref = random_sentence(rng, 5, 11)
                outputs.append(mutate(rng, ref))
                references.append([ref] + [mutate(rng, ref) for _ in range(rng.randint(0, 2))])
            cases.append({"outputs": outputs, "references": references})
    for case in cases:
        case["expected"] = oracle_bleu(case["outputs"], case["references"])
    return cases


def fkgl_cases(rng):
    words = ["cat", "tired", "table", "the", "banana", "strength", "smile",
             "apple", "fly", "rhythm", "queue", "idea", "little", "above",
             "lense", "noodle", "yellow", "gray", "pixel", "oboe", "42", "a"]
    cases = [{"kind": "syllables", "word": w, "expected": oracle_syllables(w)} for w in words]
    for _ in range(22):
        n_sents = rng.randint(1, 4)
        sentences = [random_sentence(rng, 3, 12) for _ in range(n_sents)]
        cases.append({"kind": "fkgl", "sentences": sentences, "expected": oracle_fkgl(sentences)})
    return cases


def main():
    rng = random.Random(20240917)
    out_dir = TESTS / "golden"
    out_dir.mkdir(exist_ok=True)
    payloads = {
        "sari_golden.json": sari_cases(rng),
        "bleu_golden.json": bleu_cases(rng),
        "fkgl_golden.json": fkgl_cases(rng),
    }
    for name, cases in payloads.items():
        (out_dir / name).write_text(json.dumps(cases, indent=1) + "\n")
        print(f"wrote {name}: {len(cases)} cases")


if __name__ == "__main__":
    main()
