"""Whole-dataset runs: per-DMU enumeration feeding moment accumulators.

DMUs are independent, so ``threads > 1`` farms them out to a process pool;
results are always assembled in DMU index order.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dea import Dataset, ModelSpec, is_degenerate
from .engine import EnumerationStats, enumerate_exact, enumerate_exhaustive
from .lp import SolverOptions
from .scores import MomentAccumulator, ScoreEvents, SelectionModel, materialize

ENGINES: dict[str, Callable] = {"exact": enumerate_exact, "exhaustive": enumerate_exhaustive}


@dataclass(frozen=True)
class RunSettings:
    spec: ModelSpec = ModelSpec()
    engine: str = "exact"
    options: SolverOptions | None = None

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise ValueError(f"unknown engine {self.engine!r}; expected one of {sorted(ENGINES)}")

    def enumerate(self, dataset, dmu, sink):
        return ENGINES[self.engine](dataset, dmu, self.spec, self.options, sink)


@dataclass
class RobustScoreReport:
    dmu_names: list[str]
    models: list[SelectionModel]
    expected: np.ndarray  # (n, n_models)
    std_dev: np.ndarray
    stats: list[EnumerationStats]
    degenerate_mask_convention: bool
    settings: RunSettings = field(default_factory=RunSettings)

    @property
    def total_stats(self) -> EnumerationStats:
        total = EnumerationStats()
        for s in self.stats:
            total = total.merge(s)
        return total

    def rows(self):
        """``(dmu, model_name, expected, std_dev)`` in DMU then model order."""
        for j, name in enumerate(self.dmu_names):
            for k, model in enumerate(self.models):
                yield name, model.name, float(self.expected[j, k]), float(self.std_dev[j, k])

    def lookup(self, dmu: str, model_index: int = 0) -> tuple[float, float]:
        j = self.dmu_names.index(dmu)
        return float(self.expected[j, model_index]), float(self.std_dev[j, model_index])

    def to_dict(self) -> dict:
        return {
            "engine": self.settings.engine,
            "returns_to_scale": self.settings.spec.returns_to_scale.value,
            "degenerate_mask_convention": self.degenerate_mask_convention,
            "models": [m.describe() for m in self.models],
            "results": [{"dmu": d, "model": m, "expected": e, "std_dev": s}
                        for d, m, e, s in self.rows()],
            "stats": {"total": self.total_stats.counts(),
                      "wall_time": self.total_stats.wall_time,
                      "per_dmu": [s.counts() for s in self.stats]},
        }


def has_degenerate_masks(dataset: Dataset) -> bool:
    # a degenerate mask has a degenerate singleton below it, so singletons suffice
    return any(is_degenerate(dataset, 1 << c) for c in range(dataset.q))


def _score_one(args):
    dataset, dmu, models, settings = args
    acc = MomentAccumulator(dataset.q, models)
    stats = settings.enumerate(dataset, dmu, acc)
    return acc.results(), stats


def _scores_one(args):
    dataset, dmu, settings = args
    events = ScoreEvents(dataset.q)
    stats = settings.enumerate(dataset, dmu, events)
    return materialize(events), stats


def default_threads() -> int:
    return os.cpu_count() or 1


def _map(fn, jobs, threads):
    if threads is None:
        threads = default_threads()
    if threads <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=min(threads, len(jobs))) as pool:
        return list(pool.map(fn, jobs))


def score_dataset(dataset: Dataset, models: Sequence[SelectionModel],
                  settings: RunSettings = RunSettings(), threads: int | None = 1,
                  dmus: Sequence[int] | None = None) -> RobustScoreReport:
    models = list(models)
    for m in models:
        m.check(dataset.q)
    idx = list(range(dataset.n)) if dmus is None else list(dmus)
    out = _map(_score_one, [(dataset, j, models, settings) for j in idx], threads)
    expected = np.array([[e for e, _ in res] for res, _ in out]).reshape(len(idx), len(models))
    std = np.array([[math.sqrt(v) for _, v in res] for res, _ in out]).reshape(len(idx), len(models))
    return RobustScoreReport([dataset.dmu_names[j] for j in idx], models, expected, std,
                             [s for _, s in out], has_degenerate_masks(dataset), settings)


def subset_scores(dataset: Dataset, settings: RunSettings = RunSettings(), threads: int | None = 1,
                  dmus: Sequence[int] | None = None) -> tuple[np.ndarray, list[EnumerationStats]]:
    """All ``2**q`` scores per DMU, shape ``(len(dmus), 2**q)``, dataset-order masks."""
    idx = list(range(dataset.n)) if dmus is None else list(dmus)
    out = _map(_scores_one, [(dataset, j, settings) for j in idx], threads)
    return np.array([s for s, _ in out]).reshape(len(idx), 1 << dataset.q), [st for _, st in out]


def compare_engines(dataset: Dataset, spec: ModelSpec = ModelSpec(), options: SolverOptions | None = None,
                    threads: int | None = 1):
    """Run both engines; returns ``(exact_stats, exhaustive_stats, max_abs_diff)``."""
    exact, exact_stats = subset_scores(dataset, RunSettings(spec, "exact", options), threads)
    full, full_stats = subset_scores(dataset, RunSettings(spec, "exhaustive", options), threads)
    return exact_stats, full_stats, float(np.max(np.abs(exact - full)))


__all__ = ["RunSettings", "RobustScoreReport", "score_dataset", "subset_scores",
           "compare_engines", "has_degenerate_masks", "default_threads"]
