"""Enumeration of all ``2**q`` specifications of one DMU.

``enumerate_exhaustive`` cold-solves every mask and is the reference.
``enumerate_exact`` walks the subset tree depth first in an order driven by
the full model's dual weights, warm-starts every child LP from its parent's
basis, and closes a whole subtree as soon as a node reaches the full-model
score (scores can only grow as variables are added, and never exceed it).
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass

from .dea import Dataset, ModelSpec, Role, dual_weights, row_labels, solve_mask
from .lp import SolverOptions
from .scores import ScoreSink

PRUNE_TOL = 1e-7


@dataclass
class EnumerationStats:
    lps_solved: int = 0
    nodes_pruned_by_bound: int = 0
    nodes_assigned_by_seed: int = 0
    subtrees_closed_form: int = 0
    wall_time: float = 0.0
    warmstart_fallbacks: int = 0
    degenerate_masks: int = 0
    events: int = 0

    def merge(self, other: "EnumerationStats") -> "EnumerationStats":
        return EnumerationStats(**{k: v + getattr(other, k) for k, v in asdict(self).items()})

    def counts(self) -> dict:
        """Everything except wall time (which is not reproducible)."""
        d = asdict(self)
        d.pop("wall_time")
        return d


@dataclass(frozen=True)
class CandidateOrdering:
    """``permutation[k]`` is the candidate (dataset order) at tree position ``k``."""

    permutation: tuple[int, ...]
    source: str = "dual-weights"

    def __post_init__(self):
        if sorted(self.permutation) != list(range(len(self.permutation))):
            raise ValueError(f"not a permutation: {self.permutation}")

    def to_dataset(self, permuted_mask: int) -> int:
        out = 0
        for k, c in enumerate(self.permutation):
            if permuted_mask >> k & 1:
                out |= 1 << c
        return out


TIE_DECIMALS = 12


def order_by_weights(weights) -> CandidateOrdering:
    """Highest weight first; ties (equal to 12 decimals) by dataset index."""
    w = [round(float(x), TIE_DECIMALS) for x in weights]
    perm = sorted(range(len(w)), key=lambda c: (-w[c], c))
    return CandidateOrdering(tuple(perm), "dual-weights")


def candidate_ordering(dataset: Dataset, dmu_index: int, spec: ModelSpec = ModelSpec(),
                       options: SolverOptions | None = None) -> CandidateOrdering:
    full = solve_mask(dataset, dmu_index, dataset.full_mask, spec, options)
    if not full.solved:
        return CandidateOrdering(tuple(range(dataset.q)), "dataset-order")
    return order_by_weights(dual_weights(full.solution, dataset, dataset.full_mask))


def _require_candidates(dataset):
    if dataset.q < 1:
        raise ValueError("enumeration needs at least one candidate variable")


def enumerate_exhaustive(dataset: Dataset, dmu_index: int, spec: ModelSpec = ModelSpec(),
                         options: SolverOptions | None = None, sink: ScoreSink | None = None
                         ) -> EnumerationStats:
    """Cold-solve every non-empty mask, emitting point events in mask order."""
    _require_candidates(dataset)
    stats = EnumerationStats()
    start = time.perf_counter()
    _emit_point(sink, stats, 0, 1.0)
    for mask in range(1, 1 << dataset.q):
        res = solve_mask(dataset, dmu_index, mask, spec, options)
        if res.solved:
            stats.lps_solved += 1
        else:
            stats.degenerate_masks += 1
        _emit_point(sink, stats, mask, res.theta)
    stats.wall_time = time.perf_counter() - start
    return stats


def _emit_point(sink, stats, mask, theta):
    stats.events += 1
    if sink is not None:
        sink.point(mask, theta)


def _emit_subtree(sink, stats, prefix, free, theta):
    stats.events += 1
    if sink is not None:
        sink.subtree(prefix, free, theta)


def enumerate_exact(dataset: Dataset, dmu_index: int, spec: ModelSpec = ModelSpec(),
                    options: SolverOptions | None = None, sink: ScoreSink | None = None,
                    prune_tol: float = PRUNE_TOL, trace: list | None = None) -> EnumerationStats:
    """Pruned, warm-started tree enumeration.

    Events carry dataset-order masks.  ``trace``, when given, receives the
    permuted mask of every visited tree node in visiting order.
    """
    _require_candidates(dataset)
    q = dataset.q
    full_mask = dataset.full_mask
    stats = EnumerationStats()
    start = time.perf_counter()

    full = solve_mask(dataset, dmu_index, full_mask, spec, options)
    if full.solved:
        stats.lps_solved += 1
        ordering = order_by_weights(dual_weights(full.solution, dataset, full_mask))
    else:
        ordering = CandidateOrdering(tuple(range(q)), "dataset-order")
    upper = full.theta
    perm = ordering.permutation
    bit = [1 << c for c in perm]
    is_input = [dataset.variables[dataset.candidates[c]].role is Role.INPUT for c in perm]
    # positions k with an input/output candidate at some position > k
    input_after = [any(is_input[k + 1:]) for k in range(q)]
    output_after = [any(not x for x in is_input[k + 1:]) for k in range(q)]
    seeds: list[int] = []

    _emit_point(sink, stats, 0, 1.0)

    def free_after(k):
        free = 0
        for i in range(k + 1, q):
            free |= bit[i]
        return free

    def visit(node, dmask, k, warm):
        if trace is not None:
            trace.append(node)
        leaf = k == q - 1
        if any(node & s == s for s in seeds):
            stats.nodes_assigned_by_seed += 1
            _emit_subtree(sink, stats, dmask, free_after(k), upper)
            return
        if dmask == full_mask:
            res = full
        else:
            res = solve_mask(dataset, dmu_index, dmask, spec, options, warm)
            if res.solved:
                stats.lps_solved += 1
                if res.solution.warmstart_fallback:
                    stats.warmstart_fallbacks += 1
        if res.degenerate:
            stats.degenerate_masks += 1
            kinds = {kind for kind, _ in row_labels(dataset, dmask)}
            closed = (("in" not in kinds and not input_after[k])
                      or ("out" not in kinds and not output_after[k]))
            if closed and not leaf:
                stats.subtrees_closed_form += 1
                _emit_subtree(sink, stats, dmask, free_after(k), 1.0)
                return
        elif not leaf and abs(res.theta - upper) <= prune_tol:
            seeds.append(node)
            stats.nodes_pruned_by_bound += 1
            stats.subtrees_closed_form += 1
            _emit_subtree(sink, stats, dmask, free_after(k), upper)
            return
        _emit_point(sink, stats, dmask, res.theta)
        if leaf:
            return
        child_warm = (res.solution.basis, res.labels) if res.solved else warm
        for i in range(k + 1, q):
            visit(node | 1 << i, dmask | bit[i], i, child_warm)

    # singletons have no solved ancestor and start cold
    for k in range(q):
        visit(1 << k, bit[k], k, None)

    stats.wall_time = time.perf_counter() - start
    return stats
