"""Bipartite phrase/concept graph for a single document."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .candidates import CandidatePhrase, unique_candidates
from .corpus import Document


class UnknownNodeError(KeyError):
    pass


@dataclass(frozen=True)
class PhraseNode:
    id: str  # normalized form
    surface: str
    first_occurrence: int
    concepts: frozenset[str] = frozenset()


@dataclass(frozen=True)
class ConceptNode:
    id: str  # concept title
    weight: float
    phrases: frozenset[str] = frozenset()


@dataclass(frozen=True)
class SemanticGraph:
    phrases: tuple[PhraseNode, ...]
    concepts: tuple[ConceptNode, ...]
    edges: frozenset[tuple[str, str]]
    _phrase_index: dict[str, PhraseNode] = field(init=False, repr=False, compare=False)
    _concept_index: dict[str, ConceptNode] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_phrase_index", {p.id: p for p in self.phrases})
        object.__setattr__(self, "_concept_index", {c.id: c for c in self.concepts})

    @classmethod
    def from_parts(
        cls,
        phrases: Iterable[tuple[str, str, int]],
        weights: Mapping[str, float],
        edges: Iterable[tuple[str, str]],
    ) -> "SemanticGraph":
        """Assemble a graph from ``(id, surface, first_occurrence)`` triples,
        ordered concept weights and ``(phrase, concept)`` edges.

        Phrases are sorted by first occurrence (then id); concepts keep the
        mapping's order.
        """
        phrase_rows = sorted(phrases, key=lambda r: (r[2], r[0]))
        phrase_ids = [r[0] for r in phrase_rows]
        if len(set(phrase_ids)) != len(phrase_ids):
            raise ValueError("duplicate phrase id")
        known = set(phrase_ids)
        edge_set = frozenset(edges)
        p_adj: dict[str, set[str]] = {p: set() for p in phrase_ids}
        c_adj: dict[str, set[str]] = {c: set() for c in weights}
        for p, c in edge_set:
            if p not in known:
                raise UnknownNodeError(p)
            if c not in c_adj:
                raise UnknownNodeError(c)
            p_adj[p].add(c)
            c_adj[c].add(p)
        for c, w in weights.items():
            if w < 0:
                raise ValueError(f"negative weight for concept {c!r}")
        return cls(
            phrases=tuple(PhraseNode(pid, surface, off, frozenset(p_adj[pid])) for pid, surface, off in phrase_rows),
            concepts=tuple(ConceptNode(c, w, frozenset(c_adj[c])) for c, w in weights.items()),
            edges=edge_set,
        )

    def phrase(self, pid: str) -> PhraseNode:
        try:
            return self._phrase_index[pid]
        except KeyError:
            raise UnknownNodeError(f"unknown phrase {pid!r}") from None

    def concept(self, cid: str) -> ConceptNode:
        try:
            return self._concept_index[cid]
        except KeyError:
            raise UnknownNodeError(f"unknown concept {cid!r}") from None

    def has_phrase(self, pid: str) -> bool:
        return pid in self._phrase_index

    def weights(self) -> dict[str, float]:
        return {c.id: c.weight for c in self.concepts}

    def restrict(self, keep: Iterable[str]) -> "SemanticGraph":
        """Subgraph on the phrases in ``keep``; concepts left without edges are dropped."""
        keep = set(keep)
        edges = [(p, c) for p, c in self.edges if p in keep]
        linked = {c for _, c in edges}
        return SemanticGraph.from_parts(
            ((p.id, p.surface, p.first_occurrence) for p in self.phrases if p.id in keep),
            {c.id: c.weight for c in self.concepts if c.id in linked},
            edges,
        )


def build_graph(
    doc: Document,
    candidates: Sequence[CandidatePhrase],
    links: Iterable[tuple[CandidatePhrase, str]],
) -> SemanticGraph:
    groups = unique_candidates(candidates)
    # weight counts every annotation in the document, not only those inside candidates
    counts = Counter(a.concept for a in doc.annotations)
    first_seen: dict[str, int] = {}
    for a in sorted(doc.annotations, key=lambda a: (a.start, a.end)):
        first_seen.setdefault(a.concept, a.start)
    weights = {c: counts[c] for c in sorted(counts, key=lambda c: (first_seen[c], c))}
    edges = {(cand.normalized, concept) for cand, concept in links if cand.normalized in groups}
    return SemanticGraph.from_parts(
        ((pid, occ[0].surface, occ[0].start) for pid, occ in groups.items()),
        weights,
        edges,
    )


def degree(g: SemanticGraph, node_id: str, within: Iterable[str] | None = None) -> int:
    """Edge count of a concept or phrase node.

    For a concept, ``within`` restricts the count to a phrase subset, which
    gives the degree inside the subgraph induced by that subset.
    """
    is_concept = node_id in g._concept_index
    is_phrase = node_id in g._phrase_index
    if is_concept and is_phrase:
        raise ValueError(f"node id {node_id!r} names both a phrase and a concept")
    if is_concept:
        adj = g.concept(node_id).phrases
        if within is None:
            return len(adj)
        return len(adj & set(within))
    if is_phrase:
        return len(g.phrase(node_id).concepts)
    raise UnknownNodeError(f"unknown node {node_id!r}")


def graph_to_dict(g: SemanticGraph) -> dict:
    return {
        "phrases": [
            {"id": p.id, "surface": p.surface, "first_occurrence": p.first_occurrence}
            for p in g.phrases
        ],
        "concepts": [{"id": c.id, "weight": c.weight} for c in g.concepts],
        "edges": [[p, c] for p, c in sorted(g.edges)],
    }


def graph_to_json(g: SemanticGraph, **extra) -> str:
    return json.dumps({**extra, **graph_to_dict(g)}, ensure_ascii=False, indent=2)


def _dot_quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def graph_to_dot(g: SemanticGraph, name: str = "semantic_graph") -> str:
    lines = [f"graph {_dot_quote(name)} {{"]
    for c in g.concepts:
        label = f"{c.id} ({c.weight:g})"
        lines.append(f"  {_dot_quote('c:' + c.id)} [shape=ellipse, label={_dot_quote(label)}];")
    for p in g.phrases:
        lines.append(f"  {_dot_quote('p:' + p.id)} [shape=box, label={_dot_quote(p.surface)}];")
    for p, c in sorted(g.edges):
        lines.append(f"  {_dot_quote('p:' + p)} -- {_dot_quote('c:' + c)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
