"""Per-document pipeline stages shared by the CLI and library callers."""

from __future__ import annotations

import logging
from typing import Callable, Sequence

from .annotate import AnnotatorConfig, Gazetteer, TagMeClient, gazetteer_annotate, link_candidates
from .candidates import FallbackTagger, Tagger, extract_candidates
from .corpus import ConceptAnnotation, Document, Token
from .graph import SemanticGraph, build_graph
from .optimize import ExtractionConfig, KeyphraseSet, extract

log = logging.getLogger(__name__)

Annotator = Callable[[Document], list[ConceptAnnotation]]

_fallback = FallbackTagger()


def document_tokens(doc: Document, tagger: Tagger | None = None) -> Sequence[Token]:
    if doc.tokens or not doc.text:
        return doc.tokens
    log.warning("document %s has no tokens; using the best-effort fallback tagger", doc.id)
    return (tagger or _fallback).tag(doc.text)


def make_annotator(cfg: AnnotatorConfig, gazetteer: Gazetteer | None = None) -> Annotator:
    if cfg.mode == "gazetteer":
        if gazetteer is None:
            if not cfg.gazetteer_path:
                raise ValueError("gazetteer mode needs a gazetteer file")
            gazetteer = Gazetteer.load(cfg.gazetteer_path)
        gaz = gazetteer

        def annotate(doc: Document) -> list[ConceptAnnotation]:
            return gazetteer_annotate(doc.text, document_tokens(doc), gaz, cfg.confidence_threshold)

        return annotate

    client = TagMeClient(cfg)

    def annotate(doc: Document) -> list[ConceptAnnotation]:
        return client.annotate(doc.text)

    return annotate


def annotate_document(doc: Document, annotator: Annotator) -> Document:
    return doc.replace(annotations=annotator(doc))


def document_graph(doc: Document, strict: bool = False, tagger: Tagger | None = None) -> SemanticGraph:
    tokens = document_tokens(doc, tagger)
    occurrences = extract_candidates(tokens, doc.text)
    links = link_candidates(occurrences, doc.annotations, strict=strict)
    return build_graph(doc, occurrences, links)


def extract_document(
    doc: Document,
    cfg: ExtractionConfig,
    strict: bool = False,
) -> tuple[KeyphraseSet, SemanticGraph, int]:
    """Return the selected set, the graph it was taken from, and how many phrases pruning removed."""
    g = document_graph(doc, strict=strict)
    result, work = extract(g, cfg)
    return result, g, len(g.phrases) - len(work.phrases)


def prediction_record(doc: Document, result: KeyphraseSet, g: SemanticGraph, pruned: int) -> dict:
    return {
        "id": doc.id,
        "keyphrases": [g.phrase(pid).surface for pid in result.phrases],
        "objective": result.objective_value,
        "pruned_phrase_count": pruned,
    }
