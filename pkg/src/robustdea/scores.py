"""Selection models over variable subsets and the robust scores they induce.

A *score source* is either a materialized array of ``2**q`` scores indexed by
mask, or a :class:`ScoreEvents` log of point events and closed-subtree events.
A closed-subtree event ``(prefix, free, theta)`` stands for every mask
``prefix | s`` with ``s`` a subset of ``free``; its probability mass has a
closed form for every model, so subtrees never need materializing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence, Union

import numpy as np

VARIANCE_FLOOR = -1e-12


class CoverageError(ValueError):
    pass


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def mask_bits(mask: int, q: int) -> str:
    """Mask as a 0/1 string, candidate 1 leftmost (``1001`` = first and last)."""
    return "".join("1" if mask >> c & 1 else "0" for c in range(q))


def parse_mask_bits(bits: str) -> int:
    return sum(1 << c for c, ch in enumerate(bits) if ch == "1")


# -- selection models ----------------------------------------------------------


class SelectionModel:
    """Probability distribution over masks of ``q`` candidates."""

    name = "model"

    def factors(self, q: int):
        """Per-candidate (P(selected), P(not selected)) for product-form models."""
        raise NotImplementedError

    def check(self, q: int):
        pass

    def probability(self, mask: int, q: int) -> float:
        self.check(q)
        sel, nsel = self.factors(q)
        w = 1.0
        for c in range(q):
            w *= sel[c] if mask >> c & 1 else nsel[c]
        return w

    def weights(self, q: int) -> np.ndarray:
        self.check(q)
        sel, nsel = self.factors(q)
        masks = np.arange(1 << q)
        w = np.ones(1 << q)
        for c in range(q):
            w *= np.where(masks >> c & 1, sel[c], nsel[c])
        return w

    def subtree_weight(self, prefix: int, free: int, q: int) -> float:
        self.check(q)
        sel, nsel = self.factors(q)
        w = 1.0
        for c in range(q):
            if free >> c & 1:
                continue
            w *= sel[c] if prefix >> c & 1 else nsel[c]
        return w

    def describe(self) -> dict:
        return {"model": self.name}


@dataclass(frozen=True)
class ExpertBernoulli(SelectionModel):
    """Independent Bernoulli selection with expert probabilities ``p``."""

    p: tuple[float, ...]
    name = "expert"

    def __post_init__(self):
        p = tuple(float(x) for x in self.p)
        if any(not 0.0 <= x <= 1.0 for x in p):
            raise ValueError(f"probabilities must lie in [0, 1]: {p}")
        object.__setattr__(self, "p", p)

    def check(self, q):
        if len(self.p) != q:
            raise ValueError(f"expert model has {len(self.p)} probabilities, dataset has {q} candidates")

    def factors(self, q):
        return self.p, tuple(1.0 - x for x in self.p)

    def describe(self):
        return {"model": self.name, "p": list(self.p)}


@dataclass(frozen=True)
class MaxEntropy(SelectionModel):
    name = "entropy"

    def factors(self, q):
        return (0.5,) * q, (0.5,) * q


@dataclass(frozen=True)
class BetaIndependent(SelectionModel):
    """Independent Beta(alpha_c, gamma_c) selection probabilities, integrated out."""

    alpha: tuple[float, ...]
    gamma: tuple[float, ...]
    name = "beta"

    def __post_init__(self):
        a = tuple(float(x) for x in self.alpha)
        g = tuple(float(x) for x in self.gamma)
        if len(a) != len(g):
            raise ValueError("alpha and gamma must have equal length")
        if any(x <= 0 for x in a + g):
            raise ValueError("Beta parameters must be positive")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "gamma", g)

    def check(self, q):
        if len(self.alpha) != q:
            raise ValueError(f"beta model has {len(self.alpha)} parameters, dataset has {q} candidates")

    def factors(self, q):
        return (tuple(a / (a + g) for a, g in zip(self.alpha, self.gamma)),
                tuple(g / (a + g) for a, g in zip(self.alpha, self.gamma)))

    def describe(self):
        return {"model": self.name, "alpha": list(self.alpha), "gamma": list(self.gamma)}


@dataclass(frozen=True)
class CommonBernoulli(SelectionModel):
    """Every candidate selected independently with the same probability."""

    pbar: float
    name = "common-bernoulli"

    def __post_init__(self):
        if not 0.0 <= self.pbar <= 1.0:
            raise ValueError(f"pbar must lie in [0, 1]: {self.pbar}")

    def factors(self, q):
        return (self.pbar,) * q, (1.0 - self.pbar,) * q

    def describe(self):
        return {"model": self.name, "pbar": self.pbar}


@dataclass(frozen=True)
class CommonUniform(SelectionModel):
    """A single selection probability shared by all candidates, uniform on [0, 1].

    A mask of size k gets weight ``1 / ((q + 1) * C(q, k))``.
    """

    name = "common-uniform"

    def probability(self, mask, q):
        return 1.0 / ((q + 1) * math.comb(q, popcount(mask)))

    def weights(self, q):
        by_size = np.array([1.0 / ((q + 1) * math.comb(q, k)) for k in range(q + 1)])
        return by_size[_popcounts(q)]

    def subtree_weight(self, prefix, free, q):
        k, f = popcount(prefix & ~free), popcount(free)
        total = sum(Fraction(math.comb(f, j), (q + 1) * math.comb(q, k + j)) for j in range(f + 1))
        return float(total)


def _popcounts(q):
    counts = np.zeros(1 << q, dtype=np.int64)
    masks = np.arange(1 << q)
    for c in range(q):
        counts += masks >> c & 1
    return counts


def subset_probability(model: SelectionModel, mask: int, q: int) -> float:
    return model.probability(mask, q)


def subtree_weight(model: SelectionModel, prefix_mask: int, free_indices: int, q: int) -> float:
    """Total probability of ``prefix_mask`` extended by any subset of ``free_indices``."""
    if prefix_mask & free_indices:
        raise ValueError("free indices overlap the prefix")
    return model.subtree_weight(prefix_mask, free_indices, q)


def entropy(p: Sequence[float]) -> float:
    """Entropy (nats) of independent Bernoulli selection; 0 log 0 = 0."""
    p = np.asarray(p, dtype=float)
    if np.any((p < 0) | (p > 1)):
        raise ValueError("probabilities must lie in [0, 1]")
    with np.errstate(divide="ignore", invalid="ignore"):
        h = np.where(p > 0, -p * np.log(p), 0.0) + np.where(p < 1, -(1 - p) * np.log1p(-p), 0.0)
    return float(h.sum())


# -- score sources -------------------------------------------------------------


class PointEvent(NamedTuple):
    mask: int
    theta: float


class SubtreeEvent(NamedTuple):
    prefix: int
    free: int
    theta: float


class ScoreSink:
    """Receiver of enumeration events."""

    def point(self, mask: int, theta: float):
        raise NotImplementedError

    def subtree(self, prefix: int, free: int, theta: float):
        raise NotImplementedError


class ScoreEvents(ScoreSink):
    """Event log; a valid score source once every mask is covered."""

    def __init__(self, q: int):
        self.q = q
        self.events: list = []

    def point(self, mask, theta):
        self.events.append(PointEvent(mask, theta))

    def subtree(self, prefix, free, theta):
        self.events.append(SubtreeEvent(prefix, free, theta))

    def __iter__(self):
        return iter(self.events)

    def __len__(self):
        return len(self.events)

    def materialize(self) -> np.ndarray:
        return materialize(self)


class Tee(ScoreSink):
    def __init__(self, *sinks):
        self.sinks = sinks

    def point(self, mask, theta):
        for s in self.sinks:
            s.point(mask, theta)

    def subtree(self, prefix, free, theta):
        for s in self.sinks:
            s.subtree(prefix, free, theta)


class MomentAccumulator(ScoreSink):
    """Streams first and second moments of the score for several models."""

    def __init__(self, q: int, models: Sequence[SelectionModel]):
        self.q = q
        self.models = list(models)
        for m in self.models:
            m.check(q)
        self.first = [0.0] * len(self.models)
        self.second = [0.0] * len(self.models)
        self.covered = 0

    def _add(self, weights, theta, count):
        for i, w in enumerate(weights):
            self.first[i] += w * theta
            self.second[i] += w * theta * theta
        self.covered += count

    def point(self, mask, theta):
        self._add([m.probability(mask, self.q) for m in self.models], theta, 1)

    def subtree(self, prefix, free, theta):
        self._add([m.subtree_weight(prefix, free, self.q) for m in self.models],
                  theta, 1 << popcount(free))

    def results(self) -> list[tuple[float, float]]:
        """``(expected, variance)`` per model."""
        if self.covered != 1 << self.q:
            raise CoverageError(f"events cover {self.covered} of {1 << self.q} masks")
        return [(e, _variance(s, e)) for e, s in zip(self.first, self.second)]


def _variance(second, mean):
    v = second - mean * mean
    if v < VARIANCE_FLOOR:
        raise ValueError(f"negative variance {v!r}")
    return max(v, 0.0)


ScoreSource = Union[np.ndarray, ScoreEvents]


def _q_of(scores) -> int:
    if isinstance(scores, ScoreEvents):
        return scores.q
    size = len(scores)
    q = size.bit_length() - 1
    if size != 1 << q:
        raise CoverageError(f"{size} scores is not a power of two")
    return q


def materialize(events: ScoreEvents) -> np.ndarray:
    """Expand events to a ``2**q`` score array, checking exact coverage."""
    q = events.q
    out = np.full(1 << q, np.nan)
    seen = np.zeros(1 << q, dtype=bool)
    for ev in events:
        if isinstance(ev, PointEvent):
            masks = np.array([ev.mask])
        else:
            masks = ev.prefix | _submasks(ev.free)
        if seen[masks].any():
            raise CoverageError(f"mask {int(masks[seen[masks]][0]):#b} covered twice")
        seen[masks] = True
        out[masks] = ev.theta
    if not seen.all():
        raise CoverageError(f"{int((~seen).sum())} masks not covered")
    return out


def _submasks(free: int) -> np.ndarray:
    bits = [1 << c for c in range(free.bit_length()) if free >> c & 1]
    subs = np.zeros(1, dtype=np.int64)
    for b in bits:
        subs = np.concatenate([subs, subs | b])
    return subs


def moments(scores: ScoreSource, model: SelectionModel) -> tuple[float, float]:
    """``(E, V)`` of the score under ``model``."""
    q = _q_of(scores)
    if isinstance(scores, ScoreEvents):
        acc = MomentAccumulator(q, [model])
        for ev in scores:
            if isinstance(ev, PointEvent):
                acc.point(*ev)
            else:
                acc.subtree(*ev)
        return acc.results()[0]
    theta = np.asarray(scores, dtype=float)
    if np.isnan(theta).any():
        raise CoverageError("score array has missing entries")
    w = model.weights(q)
    e = float(w @ theta)
    return e, _variance(float(w @ (theta * theta)), e)


def expected_score(scores: ScoreSource, model: SelectionModel) -> float:
    return moments(scores, model)[0]


def score_variance(scores: ScoreSource, model: SelectionModel) -> float:
    return moments(scores, model)[1]


def pbar_curve(scores: ScoreSource, grid: Sequence[float]) -> list[tuple[float, float, float]]:
    """``(pbar, E, std)`` under a common Bernoulli probability for each grid value."""
    out = []
    for pbar in grid:
        e, v = moments(scores, CommonBernoulli(float(pbar)))
        out.append((float(pbar), e, math.sqrt(v)))
    return out


def uniform_integral_check(scores: ScoreSource, node_count: int | None = None) -> tuple[float, float]:
    """Common-uniform score next to a Gauss-Legendre integral of the pbar curve."""
    q = _q_of(scores)
    need = math.ceil((q + 1) / 2)
    if node_count is None:
        node_count = need
    if node_count < need:
        raise ValueError(f"{node_count} nodes cannot integrate a degree-{q} polynomial exactly")
    nodes, wts = np.polynomial.legendre.leggauss(node_count)
    rhs = 0.0
    for x, w in zip(nodes, wts):
        rhs += 0.5 * w * expected_score(scores, CommonBernoulli(0.5 * (x + 1.0)))
    return expected_score(scores, CommonUniform()), rhs


def parse_model(text: str, q: int | None = None) -> SelectionModel:
    """Parse ``entropy``, ``common-uniform``, ``common-bernoulli:0.3``,
    ``expert:0.4,0.8,...`` or ``beta:a1,a2,...;g1,g2,...``."""
    kind, _, arg = text.partition(":")
    kind = kind.strip().lower()
    if kind in ("entropy", "max-entropy"):
        return MaxEntropy()
    if kind == "common-uniform":
        return CommonUniform()
    if kind == "common-bernoulli":
        return CommonBernoulli(float(arg))
    if kind == "expert":
        return ExpertBernoulli(tuple(float(x) for x in arg.split(",")))
    if kind == "beta":
        a, _, g = arg.partition(";")
        return BetaIndependent(tuple(float(x) for x in a.split(",")),
                               tuple(float(x) for x in g.split(",")))
    raise ValueError(f"unknown selection model {text!r}")
