"""Keyphrase extraction by weighted coverage of knowledge-base concepts."""

from .annotate import AnnotatorConfig, Gazetteer, gazetteer_annotate, link_candidates, tagme_annotate
from .candidates import CandidatePhrase, FallbackTagger, extract_candidates, unique_candidates
from .corpus import ConceptAnnotation, Document, Token, load_corpus, normalize_phrase, parse_document_record
from .evaluation import EvalReport, evaluate, match_phrase
from .graph import SemanticGraph, build_graph, degree
from .optimize import (
    ExtractionConfig,
    KeyphraseSet,
    brute_force_extract,
    concept_score,
    greedy_extract,
    objective,
    prune,
)

__version__ = "0.1.0"
