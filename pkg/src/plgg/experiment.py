"""Train/test experiment protocol over one planning domain.

Each repetition shuffles the problem list with its own seeded RNG, learns a
lifted ordering graph from the training split, instantiates a probabilistic
landmark graph for every test task, and scores it against a reference
landmark graph (the built-in extractor by default, or pre-extracted files
from a reference directory).  Reported numbers are arithmetic means, first
within a repetition and then across repetitions.

A second report compares grounded-landmark recall against the brute-force
oracle, side by side for the instantiated graph and the native extractor.
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field
from pathlib import Path

from .lgg import LGG, extract_lgg, read_lgg
from .instantiate import extract_result, instantiate_task
from .metrics import MetricReport, compare, mean_reports, render_table, report_to_dict
from .pddl import GroundTask, ground_task, parse_domain, parse_problem
from .plog import learn_plog


@dataclass
class ExperimentConfig:
    domain_path: str
    problem_paths: list[str]
    train_count: int = 4
    test_count: int = 10
    repetitions: int = 5
    seed: int = 0
    top_n: int = 1
    threshold: float = 0.0
    reference_dir: str | None = None
    oracle_baseline: bool = True

    def validate(self) -> None:
        if self.train_count < 1 or self.test_count < 1:
            raise ValueError("train and test splits must each hold at least one task")
        if self.train_count + self.test_count > len(self.problem_paths):
            raise ValueError(
                f"split needs {self.train_count}+{self.test_count} problems "
                f"but only {len(self.problem_paths)} were given")
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")


@dataclass
class TaskEval:
    task: str
    instantiate_seconds: float
    report: MetricReport
    plgg_oracle_recall: float | None = None
    native_oracle_recall: float | None = None


@dataclass
class RepetitionResult:
    index: int
    seed: int
    train: list[str]
    test: list[str]
    extract_seconds: float
    learn_seconds: float
    tasks: list[TaskEval] = field(default_factory=list)

    def means(self) -> dict:
        return mean_reports([t.report for t in self.tasks])


@dataclass
class ExperimentResult:
    repetitions: list[RepetitionResult]

    def overall(self) -> dict:
        return mean_reports([t.report for rep in self.repetitions for t in rep.tasks])

    def oracle_rows(self) -> list[dict]:
        rows = []
        for rep in self.repetitions:
            for t in rep.tasks:
                if t.plgg_oracle_recall is None:
                    continue
                rows.append({"repetition": rep.index, "task": t.task,
                             "plgg_recall": t.plgg_oracle_recall,
                             "native_recall": t.native_oracle_recall})
        return rows


class _Corpus:
    """Parsed domain plus lazily grounded and scored problems, shared
    across repetitions so overlapping splits never redo work."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.domain = parse_domain(Path(config.domain_path).read_text())
        self.paths = sorted(config.problem_paths)
        self._tasks: dict[str, GroundTask] = {}
        self._lggs: dict[str, tuple[LGG, float]] = {}
        self._oracles: dict[str, set] = {}

    def task(self, path: str) -> GroundTask:
        if path not in self._tasks:
            problem = parse_problem(Path(path).read_text(), self.domain)
            self._tasks[path] = ground_task(self.domain, problem)
        return self._tasks[path]

    def reference_lgg(self, path: str) -> tuple[LGG, float]:
        if path not in self._lggs:
            if self.config.reference_dir is not None:
                ref = Path(self.config.reference_dir) / f"{Path(path).stem}.lgg.json"
                if not ref.exists():
                    raise FileNotFoundError(f"no reference graph for {path}: {ref}")
                self._lggs[path] = (read_lgg(ref), 0.0)
            else:
                start = time.perf_counter()
                lgg = extract_lgg(self.task(path))
                self._lggs[path] = (lgg, time.perf_counter() - start)
        return self._lggs[path]

    def oracle(self, path: str) -> set:
        if path not in self._oracles:
            from .lgg import oracle_landmarks
            self._oracles[path] = oracle_landmarks(self.task(path))
        return self._oracles[path]


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    config.validate()
    corpus = _Corpus(config)
    repetitions = []
    for rep in range(config.repetitions):
        rep_seed = config.seed + rep
        rng = random.Random(rep_seed)
        order = rng.sample(corpus.paths, len(corpus.paths))
        train = order[:config.train_count]
        test = order[config.train_count:config.train_count + config.test_count]

        extract_seconds = 0.0
        train_lggs = []
        for path in train:
            lgg, seconds = corpus.reference_lgg(path)
            extract_seconds += seconds
            train_lggs.append(lgg)
        start = time.perf_counter()
        plog = learn_plog(train_lggs, domain=corpus.domain.name)
        learn_seconds = time.perf_counter() - start

        result = RepetitionResult(index=rep, seed=rep_seed,
                                  train=train, test=test,
                                  extract_seconds=extract_seconds,
                                  learn_seconds=learn_seconds)
        for path in test:
            task = corpus.task(path)
            start = time.perf_counter()
            plgg = instantiate_task(plog, task, top_n=config.top_n)
            seconds = time.perf_counter() - start
            content = extract_result(plgg, threshold=config.threshold)
            reference, _ = corpus.reference_lgg(path)
            evaluation = TaskEval(task=Path(path).stem,
                                  instantiate_seconds=seconds,
                                  report=compare(reference, content))
            if config.oracle_baseline:
                oracle = corpus.oracle(path)
                native = set(extract_lgg(task).vertices)
                evaluation.plgg_oracle_recall = (
                    len(content.landmarks_grounded & oracle) / len(oracle))
                evaluation.native_oracle_recall = len(native & oracle) / len(oracle)
            result.tasks.append(evaluation)
        repetitions.append(result)
    return ExperimentResult(repetitions=repetitions)


# --- reports ------------------------------------------------------------------


def result_to_dict(result: ExperimentResult) -> dict:
    return {
        "overall": result.overall(),
        "oracle_recall": result.oracle_rows(),
        "repetitions": [{
            "index": rep.index,
            "seed": rep.seed,
            "train": [Path(p).stem for p in rep.train],
            "test": [Path(p).stem for p in rep.test],
            "extract_seconds": rep.extract_seconds,
            "learn_seconds": rep.learn_seconds,
            "means": rep.means(),
            "tasks": [{
                "task": t.task,
                "instantiate_seconds": t.instantiate_seconds,
                "report": report_to_dict(t.report),
                "plgg_oracle_recall": t.plgg_oracle_recall,
                "native_oracle_recall": t.native_oracle_recall,
            } for t in rep.tasks],
        } for rep in result.repetitions],
    }


def result_to_json(result: ExperimentResult) -> str:
    return json.dumps(result_to_dict(result), indent=2, sort_keys=True) + "\n"


def render_score_report(result: ExperimentResult) -> str:
    """Mean scores per repetition plus the overall mean, as a text table."""
    rows = {f"rep{rep.index}": rep.means() for rep in result.repetitions}
    rows["mean"] = result.overall()
    return render_table(rows)


def render_oracle_report(result: ExperimentResult) -> str:
    """Grounded-landmark recall vs the brute-force oracle, per test task."""
    rows = result.oracle_rows()
    if not rows:
        return "oracle baseline disabled\n"
    lines = ["rep  task  plgg_recall  native_recall".split()]
    for row in rows:
        lines.append([str(row["repetition"]), row["task"],
                      f"{row['plgg_recall']:.3f}", f"{row['native_recall']:.3f}"])
    plgg_mean = sum(r["plgg_recall"] for r in rows) / len(rows)
    native_mean = sum(r["native_recall"] for r in rows) / len(rows)
    lines.append(["mean", "-", f"{plgg_mean:.3f}", f"{native_mean:.3f}"])
    widths = [max(len(line[i]) for line in lines) for i in range(4)]
    out = ["  ".join(c.ljust(w) for c, w in zip(line, widths)).rstrip() for line in lines]
    return "\n".join(out) + "\n"


def render_timing_report(result: ExperimentResult) -> str:
    lines = []
    for rep in result.repetitions:
        inst = [t.instantiate_seconds for t in rep.tasks]
        lines.append(
            f"rep{rep.index}: learn {rep.learn_seconds * 1000:.0f} ms, "
            f"instantiate {min(inst) * 1000:.0f}-{max(inst) * 1000:.0f} ms/task")
    return "\n".join(lines) + "\n"
