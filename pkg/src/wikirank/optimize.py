"""Concept-coverage objective, greedy and exhaustive solvers, and graph pruning.

A concept of weight ``w`` covered by ``d`` selected phrases scores
``w * (1 + 1/2 + ... + 1/2**(d-1))``, so each additional covering phrase is
worth half the previous one.  The objective sums this over covered concepts;
it is monotone and submodular, which is what makes the greedy solver a
``1 - 1/e`` approximation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Collection, Iterable

from .graph import SemanticGraph, UnknownNodeError

TIE_BREAKS = ("first_occurrence", "lexicographic")
BRUTE_FORCE_LIMIT = 20


class GraphTooLargeError(ValueError):
    pass


@dataclass(frozen=True)
class ExtractionConfig:
    k: int = 10
    m: int = 3
    pruning_enabled: bool = True
    tie_break: str = "first_occurrence"
    pad_to_k: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.tie_break not in TIE_BREAKS:
            raise ValueError(f"tie_break must be one of {TIE_BREAKS}")


@dataclass(frozen=True)
class KeyphraseSet:
    phrases: tuple[str, ...]
    objective_value: float
    gains: tuple[float, ...] = ()


def concept_score(w: float, d: int) -> float:
    if w < 0 or d < 0:
        raise ValueError("weight and degree must be non-negative")
    if d == 0:
        return 0.0
    return w * (2.0 - 2.0 ** (1 - d))


def objective(g: SemanticGraph, omega: Iterable[str]) -> float:
    selected = set(omega)
    for pid in selected:
        g.phrase(pid)  # raises UnknownNodeError
    total = 0.0
    for c in g.concepts:
        d = len(c.phrases & selected)
        if d:
            total += concept_score(c.weight, d)
    return total


def _rank_key(g: SemanticGraph, tie_break: str):
    if tie_break == "lexicographic":
        return lambda p: (p.id,)
    return lambda p: (p.first_occurrence, p.id)


def greedy_extract(g: SemanticGraph, cfg: ExtractionConfig | None = None) -> KeyphraseSet:
    cfg = cfg or ExtractionConfig()
    weights = g.weights()  # private working copy; halved as concepts get covered
    order = sorted(g.phrases, key=_rank_key(g, cfg.tie_break))
    remaining = list(order)
    selected: list[str] = []
    gains: list[float] = []

    while len(selected) < cfg.k and remaining:
        best_i, best_gain = -1, 0.0
        for i, p in enumerate(remaining):
            gain = sum(weights[c] for c in p.concepts)
            # strict > keeps the earliest phrase in tie-break order
            if gain > best_gain:
                best_i, best_gain = i, gain
        if best_i < 0:
            break
        chosen = remaining.pop(best_i)
        selected.append(chosen.id)
        gains.append(best_gain)
        for c in chosen.concepts:
            weights[c] /= 2.0

    if cfg.pad_to_k:
        for p in remaining[: cfg.k - len(selected)]:
            selected.append(p.id)
            gains.append(0.0)

    value = objective(g, selected)
    accumulated = math.fsum(gains)
    if not math.isclose(value, accumulated, rel_tol=1e-9, abs_tol=1e-12):
        raise AssertionError(f"greedy gains {accumulated} disagree with objective {value}")
    return KeyphraseSet(tuple(selected), value, tuple(gains))


def brute_force_extract(g: SemanticGraph, k: int, limit: int = BRUTE_FORCE_LIMIT) -> KeyphraseSet:
    """Exact optimum by enumerating every phrase subset of size at most ``k``.

    Among optimal subsets the one whose members, in first-occurrence order,
    form the lexicographically smallest index tuple wins.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = len(g.phrases)
    if n > limit:
        raise GraphTooLargeError(f"{n} phrases exceeds the exhaustive-search limit of {limit}")
    index = {c.id: j for j, c in enumerate(g.concepts)}
    covers = [[index[c] for c in p.concepts] for p in g.phrases]
    weights = [c.weight for c in g.concepts]

    best_value, best_members = 0.0, ()
    for size in range(1, min(k, n) + 1):
        for members in itertools.combinations(range(n), size):
            degree = [0] * len(weights)
            for i in members:
                for j in covers[i]:
                    degree[j] += 1
            value = sum(concept_score(weights[j], d) for j, d in enumerate(degree) if d)
            if value > best_value or (value == best_value and members < best_members):
                best_value, best_members = value, members
    phrases = tuple(g.phrases[i].id for i in best_members)
    return KeyphraseSet(phrases, objective(g, phrases))


def prune(g: SemanticGraph, cfg: ExtractionConfig | None = None, steps: Collection[int] = (1, 2, 3)) -> SemanticGraph:
    """Drop phrases unlikely to be selected.

    1. phrases linked to no concept;
    2. phrases linked only to a single concept of weight 1;
    3. for a concept with more than ``m`` linked phrases, the single-concept
       phrases ranked below the ``m``-th by initial greedy score.

    Weights are not modified; concepts left without edges are dropped.
    """
    cfg = cfg or ExtractionConfig()
    keep = [p for p in g.phrases]
    if 1 in steps:
        keep = [p for p in keep if p.concepts]
    if 2 in steps:
        keep = [
            p for p in keep
            if not (len(p.concepts) == 1 and g.concept(next(iter(p.concepts))).weight == 1)
        ]
    if 3 in steps:
        kept_ids = {p.id for p in keep}
        weights = g.weights()
        score = {p.id: sum(weights[c] for c in p.concepts) for p in keep}
        rank_key = _rank_key(g, cfg.tie_break)
        dropped: set[str] = set()
        for c in g.concepts:
            linked = [g.phrase(pid) for pid in c.phrases if pid in kept_ids]
            if len(linked) <= cfg.m:
                continue
            linked.sort(key=lambda p: (-score[p.id], *rank_key(p)))
            for p in linked[cfg.m:]:
                if p.concepts == {c.id}:
                    dropped.add(p.id)
        keep = [p for p in keep if p.id not in dropped]
    return g.restrict(p.id for p in keep)


def extract(g: SemanticGraph, cfg: ExtractionConfig | None = None) -> tuple[KeyphraseSet, SemanticGraph]:
    """Prune (if enabled) and run the greedy solver; returns the result and the graph it ran on."""
    cfg = cfg or ExtractionConfig()
    work = prune(g, cfg) if cfg.pruning_enabled else g
    return greedy_extract(work, cfg), work


__all__ = [
    "BRUTE_FORCE_LIMIT",
    "ExtractionConfig",
    "GraphTooLargeError",
    "KeyphraseSet",
    "UnknownNodeError",
    "brute_force_extract",
    "concept_score",
    "extract",
    "greedy_extract",
    "objective",
    "prune",
]
