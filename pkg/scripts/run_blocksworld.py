#!/usr/bin/env python3
"""Reproduce the full blocksworld protocol: 5 repetitions of a seeded
4-train/10-test split, with score, oracle-recall, and timing reports.

    python scripts/run_blocksworld.py
    python scripts/run_blocksworld.py --reps 10 --seed 42 --top-n 2 --json out.json
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from plgg.experiment import (ExperimentConfig, render_oracle_report,
                             render_score_report, render_timing_report,
                             result_to_json, run_experiment)

BENCH = Path(__file__).resolve().parent.parent / "benchmarks" / "blocksworld"


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--train", type=int, default=4)
    parser.add_argument("--test", type=int, default=10)
    parser.add_argument("--reps", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--top-n", type=int, default=1)
    parser.add_argument("--threshold", type=float, default=0.0)
    parser.add_argument("--json", default=None, help="also write the JSON report here")
    args = parser.parse_args()

    config = ExperimentConfig(
        domain_path=str(BENCH / "domain.pddl"),
        problem_paths=sorted(str(p) for p in BENCH.glob("p*.pddl")),
        train_count=args.train, test_count=args.test,
        repetitions=args.reps, seed=args.seed,
        top_n=args.top_n, threshold=args.threshold)
    result = run_experiment(config)

    print("== mean scores per repetition ==")
    print(render_score_report(result))
    print("== grounded-landmark recall vs brute-force oracle ==")
    print(render_oracle_report(result))
    print("== timings ==")
    print(render_timing_report(result))
    if args.json:
        Path(args.json).write_text(result_to_json(result))
        print(f"wrote {args.json}")


if __name__ == "__main__":
    main()
