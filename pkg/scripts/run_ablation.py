#!/usr/bin/env python3
"""Train the three noise presets on identical seeds and compare dev SARI.

Usage:
    python scripts/run_ablation.py --out runs/ablation [--quick]

Expected ordering on the toy data: original <= additive <= full.
"""

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from btsimp import synthdata, trainer
from run_toy_experiment import toy_trainer_config


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True)
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--data-seed", type=int, default=7)
    parser.add_argument("--quick", action="store_true")
    args = parser.parse_args()

    out = Path(args.out)
    data_dir = out / "data"
    if not (data_dir / "simple.txt").exists():
        dataset = synthdata.generate(synthdata.ToyGrammarConfig(seed=args.data_seed))
        synthdata.write_dataset(dataset, data_dir)

    results = {}
    for preset in ("original", "additive", "full"):
        config = toy_trainer_config(seed=args.seed, preset=preset, quick=args.quick)
        paths = trainer.RunPaths(
            simple=str(data_dir / "simple.txt"),
            complex=str(data_dir / "complex.txt"),
            rules=str(data_dir / "rules.tsv"),
            dev_pairs=str(data_dir / "pairs.tsv"),
            train_pairs=str(data_dir / "train_pairs.tsv"),
            out_dir=str(out / preset),
        )
        print(f"=== preset {preset} ===")
        result = trainer.run(config, paths)
        results[preset] = result.selected.dev_sari
        print(f"{preset}: selected sari {result.selected.dev_sari:.2f}")

    print(json.dumps(results, indent=2))
    ordering = results["original"] <= results["additive"] <= results["full"]
    print("ordering original <= additive <= full:", ordering)


if __name__ == "__main__":
    main()
