"""Command-line interface: annotate -> extract -> eval, plus graph and oracle.

Settings resolve as command-line flags, then environment (TAGME_TOKEN,
TAGME_ENDPOINT), then the JSON file given with --config, then defaults.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, TypeVar

from .annotate import DEFAULT_TAGME_ENDPOINT, DEFAULT_THRESHOLD, AnnotatorConfig, AnnotatorError
from .corpus import CorpusError, atomic_write_text, load_corpus, read_jsonl, write_corpus, write_jsonl
from .evaluation import MODES, EvaluationError, evaluate
from .graph import UnknownNodeError, graph_to_dot, graph_to_json
from .optimize import TIE_BREAKS, ExtractionConfig, GraphTooLargeError, brute_force_extract, greedy_extract, prune
from .pipeline import annotate_document, document_graph, extract_document, make_annotator, prediction_record

log = logging.getLogger("wikirank")

T = TypeVar("T")
R = TypeVar("R")

DEFAULTS = {
    "jobs": 1,
    "mode": "gazetteer",
    "gazetteer": None,
    "threshold": DEFAULT_THRESHOLD,
    "tagme_endpoint": DEFAULT_TAGME_ENDPOINT,
    "tagme_token": None,
    "cache_dir": None,
    "retry_limit": 3,
    "max_concurrent_requests": 4,
    "k": 10,
    "m": 3,
    "prune": True,
    "pad_to_k": False,
    "tie_break": "first_occurrence",
    "strict_containment": False,
    "eval_mode": "stemmed",
}
ENVIRONMENT = {"tagme_token": "TAGME_TOKEN", "tagme_endpoint": "TAGME_ENDPOINT"}


class Settings:
    """Flag > environment > config file > default lookup."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.file: dict = {}
        if getattr(args, "config", None):
            with open(args.config, encoding="utf-8") as fh:
                self.file = json.load(fh)
            if not isinstance(self.file, dict):
                raise ValueError(f"config file {args.config} must hold a JSON object")
            unknown = set(self.file) - set(DEFAULTS)
            if unknown:
                raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")

    def __getitem__(self, name: str):
        value = getattr(self.args, name, None)
        if value is not None:
            return value
        env = ENVIRONMENT.get(name)
        if env and os.environ.get(env):
            return os.environ[env]
        if name in self.file:
            return self.file[name]
        return DEFAULTS[name]


def parallel_map(fn: Callable[[T], R], items: Iterable[T], jobs: int) -> list[R]:
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        # map preserves input order regardless of completion order
        return list(pool.map(fn, items))


def _check_output(path: str) -> None:
    parent = Path(path).resolve().parent
    if not parent.is_dir():
        raise FileNotFoundError(f"output directory does not exist: {parent}")


def extraction_config(s: Settings) -> ExtractionConfig:
    return ExtractionConfig(
        k=int(s["k"]),
        m=int(s["m"]),
        pruning_enabled=bool(s["prune"]),
        tie_break=s["tie_break"],
        pad_to_k=bool(s["pad_to_k"]),
    )


def cmd_annotate(args: argparse.Namespace, s: Settings) -> int:
    docs = load_corpus(args.input)
    _check_output(args.output)
    cfg = AnnotatorConfig(
        mode=s["mode"],
        confidence_threshold=float(s["threshold"]),
        tagme_endpoint=s["tagme_endpoint"],
        tagme_token=s["tagme_token"],
        max_concurrent_requests=int(s["max_concurrent_requests"]),
        retry_limit=int(s["retry_limit"]),
        cache_dir=s["cache_dir"],
        gazetteer_path=s["gazetteer"],
    )
    annotator = make_annotator(cfg)

    def run(doc):
        try:
            return annotate_document(doc, annotator), None
        except AnnotatorError as exc:
            return doc, exc

    results = parallel_map(run, docs, int(s["jobs"]))
    failures = [(doc.id, err) for doc, err in results if err is not None]
    for doc_id, err in failures:
        log.error("document %s: %s", doc_id, err)
    if failures:
        log.error("%d of %d documents failed; no output written", len(failures), len(docs))
        return 1
    write_corpus(args.output, [doc for doc, _ in results])
    log.info("annotated %d documents", len(docs))
    return 0


def cmd_extract(args: argparse.Namespace, s: Settings) -> int:
    docs = load_corpus(args.input)
    _check_output(args.output)
    cfg = extraction_config(s)
    strict = bool(s["strict_containment"])
    usable = []
    for doc in docs:
        if not doc.text and not doc.tokens:
            log.warning("document %s has neither text nor tokens; skipped", doc.id)
            continue
        if not doc.annotations:
            log.warning("document %s has no concept annotations", doc.id)
        usable.append(doc)
    if not usable:
        log.error("no extractable documents in %s", args.input)
        return 1

    def run(doc):
        result, g, pruned = extract_document(doc, cfg, strict=strict)
        return prediction_record(doc, result, g, pruned)

    write_jsonl(args.output, parallel_map(run, usable, int(s["jobs"])))
    log.info("wrote predictions for %d documents", len(usable))
    return 0


def load_predictions(path: str) -> dict[str, list[str]]:
    preds: dict[str, list[str]] = {}
    for lineno, rec in read_jsonl(path):
        if not isinstance(rec, dict) or not isinstance(rec.get("id"), str) or not isinstance(rec.get("keyphrases"), list):
            raise EvaluationError(f"{path}:{lineno}: prediction records need 'id' and 'keyphrases'")
        if rec["id"] in preds:
            raise EvaluationError(f"{path}:{lineno}: duplicate prediction id {rec['id']!r}")
        preds[rec["id"]] = [str(p) for p in rec["keyphrases"]]
    return preds


def cmd_eval(args: argparse.Namespace, s: Settings) -> int:
    preds = load_predictions(args.predictions)
    corpus = load_corpus(args.corpus)
    if args.report:
        _check_output(args.report)
    if not preds and corpus:
        raise EvaluationError(f"{args.predictions} holds no predictions")
    report = evaluate(preds, corpus, mode=s["eval_mode"])
    print(report.format_table())
    if args.report:
        atomic_write_text(args.report, json.dumps(report.to_dict(), indent=2) + "\n")
    return 0


def _find_document(path: str, doc_id: str | None):
    docs = load_corpus(path)
    if doc_id is None:
        if len(docs) != 1:
            raise ValueError(f"{path} has {len(docs)} documents; pick one with --id")
        return docs[0]
    for doc in docs:
        if doc.id == doc_id:
            return doc
    raise UnknownNodeError(f"no document with id {doc_id!r} in {path}")


def cmd_graph(args: argparse.Namespace, s: Settings) -> int:
    doc = _find_document(args.input, args.id)
    g = document_graph(doc, strict=bool(s["strict_containment"]))
    if args.prune:
        g = prune(g, extraction_config(s))
    out = graph_to_dot(g, doc.id) if args.format == "dot" else graph_to_json(g, id=doc.id) + "\n"
    if args.output:
        atomic_write_text(args.output, out)
    else:
        sys.stdout.write(out)
    return 0


def cmd_oracle(args: argparse.Namespace, s: Settings) -> int:
    doc = _find_document(args.input, args.id)
    cfg = extraction_config(s)
    g = document_graph(doc, strict=bool(s["strict_containment"]))
    if cfg.pruning_enabled:
        g = prune(g, cfg)
    greedy = greedy_extract(g, cfg)
    best = brute_force_extract(g, cfg.k)
    ratio = greedy.objective_value / best.objective_value if best.objective_value else 1.0
    print(json.dumps({
        "id": doc.id,
        "phrases_in_graph": len(g.phrases),
        "greedy": {"keyphrases": [g.phrase(p).surface for p in greedy.phrases], "objective": greedy.objective_value},
        "optimum": {"keyphrases": [g.phrase(p).surface for p in best.phrases], "objective": best.objective_value},
        "ratio": ratio,
    }, ensure_ascii=False, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wikirank",
        description="Concept-coverage keyphrase extraction.",
        epilog="Settings precedence: flags > environment (TAGME_TOKEN, TAGME_ENDPOINT) > --config file > defaults.",
    )
    parser.add_argument("--jobs", type=int, default=None, help="per-document parallelism (default 1)")
    parser.add_argument("--config", help="JSON file of default settings")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def extraction_flags(p):
        p.add_argument("--k", type=int, default=None, help="keyphrases per document (default 10)")
        p.add_argument("--m", type=int, default=None, help="fan-out cap for pruning step 3 (default 3)")
        p.add_argument("--no-prune", dest="prune", action="store_false", default=None, help="disable pruning")
        p.add_argument("--tie-break", choices=TIE_BREAKS, default=None)
        p.add_argument("--strict-containment", action="store_true", default=None,
                       help="link a concept only when its annotation lies inside the phrase")

    p = sub.add_parser("annotate", help="add concept annotations to a corpus")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--mode", choices=("gazetteer", "tagme"), default=None)
    p.add_argument("--gazetteer", help="anchor<TAB>title<TAB>prior file")
    p.add_argument("--threshold", type=float, default=None, help="minimum confidence (default 0.1)")
    p.add_argument("--tagme-endpoint", default=None)
    p.add_argument("--tagme-token", default=None, help="prefer the TAGME_TOKEN environment variable")
    p.add_argument("--cache-dir", default=None, help="directory for cached TagMe responses")
    p.add_argument("--retry-limit", type=int, default=None)
    p.add_argument("--max-concurrent-requests", type=int, default=None)
    p.set_defaults(func=cmd_annotate)

    p = sub.add_parser("extract", help="select keyphrases for each annotated document")
    p.add_argument("input")
    p.add_argument("output")
    extraction_flags(p)
    p.add_argument("--pad-to-k", action="store_true", default=None,
                   help="fill up to k with zero-gain phrases")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("eval", help="score predictions against gold keyphrases")
    p.add_argument("predictions")
    p.add_argument("corpus")
    p.add_argument("--mode", dest="eval_mode", choices=MODES, default=None, help="matching rule (default stemmed)")
    p.add_argument("--report", help="write the JSON report here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("graph", help="dump one document's semantic graph")
    p.add_argument("input")
    p.add_argument("--id")
    p.add_argument("--format", choices=("json", "dot"), default="json")
    p.add_argument("--prune", action="store_true", help="show the pruned graph")
    p.add_argument("--output", "-o")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--tie-break", choices=TIE_BREAKS, default=None)
    p.add_argument("--strict-containment", action="store_true", default=None)
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("oracle", help="compare greedy against the exhaustive optimum on one document")
    p.add_argument("input")
    p.add_argument("--id")
    extraction_flags(p)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        s = Settings(args)
        return args.func(args, s)
    except (CorpusError, AnnotatorError, EvaluationError, GraphTooLargeError, UnknownNodeError,
            OSError, ValueError) as exc:
        message = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        log.error("%s", message)
        return 1


if __name__ == "__main__":
    sys.exit(main())
