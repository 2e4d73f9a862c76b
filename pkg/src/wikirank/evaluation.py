"""Precision / recall / F1 against gold keyphrases, macro-averaged over documents."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from statistics import fmean
from typing import Mapping, Sequence

from .corpus import Document, collapse_whitespace, normalize_phrase

MODES = ("exact", "stemmed")


class EvaluationError(ValueError):
    pass


def _key(phrase: str, mode: str) -> str:
    if mode == "exact":
        return collapse_whitespace(phrase)
    if mode == "stemmed":
        return normalize_phrase(phrase)
    raise ValueError(f"unknown match mode {mode!r}; expected one of {MODES}")


def match_phrase(pred: str, gold: str, mode: str = "stemmed") -> bool:
    return _key(pred, mode) == _key(gold, mode)


def f_measure(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


@dataclass(frozen=True)
class DocumentScore:
    id: str
    precision: float
    recall: float
    f1: float
    matched: tuple[str, ...]


@dataclass(frozen=True)
class EvalReport:
    per_document: tuple[DocumentScore, ...]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    num_documents: int
    num_skipped: int
    mode: str

    def to_dict(self) -> dict:
        d = asdict(self)
        d["per_document"] = [
            {**asdict(s), "matched": list(s.matched)} for s in self.per_document
        ]
        return d

    def format_table(self) -> str:
        width = max([len("document")] + [len(s.id) for s in self.per_document])
        rows = [f"{'document':<{width}}  {'P':>6}  {'R':>6}  {'F':>6}"]
        for s in self.per_document:
            rows.append(f"{s.id:<{width}}  {s.precision * 100:6.2f}  {s.recall * 100:6.2f}  {s.f1 * 100:6.2f}")
        rows.append("-" * len(rows[0]))
        rows.append(
            f"{'macro':<{width}}  {self.macro_precision * 100:6.2f}  "
            f"{self.macro_recall * 100:6.2f}  {self.macro_f1 * 100:6.2f}"
        )
        rows.append(f"{self.num_documents} documents scored, {self.num_skipped} without gold skipped ({self.mode} matching)")
        return "\n".join(rows)


def score_document(doc_id: str, predicted: Sequence[str], gold: Sequence[str], mode: str = "stemmed") -> DocumentScore:
    """Match predictions to gold one-to-one, in prediction order."""
    gold_keys = [_key(g, mode) for g in gold]
    claimed = [False] * len(gold)
    matched = []
    for pred in predicted:
        pk = _key(pred, mode)
        for j, gk in enumerate(gold_keys):
            if not claimed[j] and gk == pk:
                claimed[j] = True
                matched.append(pred)
                break
    hits = len(matched)
    p = hits / len(predicted) if predicted else 0.0
    r = hits / len(gold) if gold else 0.0
    return DocumentScore(doc_id, p, r, f_measure(p, r), tuple(matched))


def evaluate(predictions: Mapping[str, Sequence[str]], corpus: Sequence[Document], mode: str = "stemmed") -> EvalReport:
    if mode not in MODES:
        raise ValueError(f"unknown match mode {mode!r}; expected one of {MODES}")
    ids = {d.id for d in corpus}
    unknown = sorted(set(predictions) - ids)
    if unknown:
        raise EvaluationError(f"predictions for ids not in corpus: {', '.join(unknown)}")
    missing = sorted(d.id for d in corpus if d.gold and d.id not in predictions)
    if missing:
        raise EvaluationError(f"no predictions for ids: {', '.join(missing)}")

    scores = []
    skipped = 0
    for doc in corpus:
        if not doc.gold:
            skipped += 1
            continue
        scores.append(score_document(doc.id, list(predictions[doc.id]), doc.gold, mode))

    def mean(xs):
        return fmean(xs) if xs else 0.0

    return EvalReport(
        per_document=tuple(scores),
        macro_precision=mean([s.precision for s in scores]),
        macro_recall=mean([s.recall for s in scores]),
        macro_f1=mean([s.f1 for s in scores]),
        num_documents=len(scores),
        num_skipped=skipped,
        mode=mode,
    )
