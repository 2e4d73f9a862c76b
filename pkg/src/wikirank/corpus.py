"""Document model, JSON-lines ingestion and phrase normalization."""

from __future__ import annotations

import json
import os
import re
import tempfile
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

from nltk.stem.porter import PorterStemmer


class CorpusError(ValueError):
    pass


class RecordParseError(CorpusError):
    """The record is not valid JSON, or is not a JSON object."""

    def __init__(self, message: str, line_number: int | None = None, offset: int | None = None):
        self.line_number = line_number
        self.offset = offset
        where = []
        if line_number is not None:
            where.append(f"line {line_number}")
        if offset is not None:
            where.append(f"offset {offset}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class RecordValidationError(CorpusError):
    """A well-formed record violates a field constraint."""

    def __init__(self, field_name: str, message: str, line_number: int | None = None):
        self.field = field_name
        self.detail = message
        self.line_number = line_number
        prefix = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"{prefix}{field_name}: {message}")


@dataclass(frozen=True)
class Token:
    surface: str
    pos: str
    start: int
    end: int


@dataclass(frozen=True)
class ConceptAnnotation:
    start: int
    end: int
    concept: str
    confidence: float = 1.0


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    tokens: tuple[Token, ...] = ()
    annotations: tuple[ConceptAnnotation, ...] = ()
    gold: tuple[str, ...] = ()

    def __post_init__(self):
        # accept lists from callers but store tuples so documents stay hashable
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "annotations", tuple(self.annotations))
        object.__setattr__(self, "gold", tuple(dict.fromkeys(self.gold)))
        validate_document(self)

    def replace(self, **changes) -> "Document":
        values = {
            "id": self.id,
            "text": self.text,
            "tokens": self.tokens,
            "annotations": self.annotations,
            "gold": self.gold,
        }
        values.update(changes)
        return Document(**values)


def validate_document(doc: Document) -> None:
    if not isinstance(doc.id, str) or not doc.id:
        raise RecordValidationError("id", "must be a non-empty string")
    if not isinstance(doc.text, str):
        raise RecordValidationError("text", "must be a string")
    n = len(doc.text)
    prev_end = 0
    for i, tok in enumerate(doc.tokens):
        name = f"tokens[{i}]"
        if not (0 <= tok.start < tok.end <= n):
            raise RecordValidationError(name, f"span [{tok.start}, {tok.end}) outside text of length {n} or empty")
        if tok.start < prev_end:
            raise RecordValidationError(name, "overlaps or precedes the previous token")
        if doc.text[tok.start:tok.end] != tok.surface:
            raise RecordValidationError(name, f"surface {tok.surface!r} does not match text slice")
        if not tok.pos:
            raise RecordValidationError(name, "empty POS tag")
        prev_end = tok.end
    for i, ann in enumerate(doc.annotations):
        name = f"annotations[{i}]"
        if not (0 <= ann.start < ann.end <= n):
            raise RecordValidationError(name, f"span [{ann.start}, {ann.end}) outside text of length {n} or empty")
        if not ann.concept:
            raise RecordValidationError(name, "empty concept")
        if not (0.0 <= ann.confidence <= 1.0):
            raise RecordValidationError(name, f"confidence {ann.confidence} not in [0, 1]")


def _require(obj: dict, key: str, kind, name: str):
    if key not in obj:
        raise RecordValidationError(name, f"missing field {key!r}")
    value = obj[key]
    # bool is an int subclass; reject it for offsets
    if kind is int and isinstance(value, bool) or not isinstance(value, kind):
        raise RecordValidationError(name, f"field {key!r} has wrong type {type(value).__name__}")
    return value


def document_from_record(record: dict) -> Document:
    if not isinstance(record, dict):
        raise RecordParseError("record must be a JSON object")
    doc_id = _require(record, "id", str, "id")
    text = _require(record, "text", str, "text")

    tokens = []
    raw_tokens = record.get("tokens") or []
    if not isinstance(raw_tokens, list):
        raise RecordValidationError("tokens", "must be an array")
    for i, t in enumerate(raw_tokens):
        name = f"tokens[{i}]"
        if not isinstance(t, dict):
            raise RecordValidationError(name, "must be an object")
        tokens.append(Token(
            surface=_require(t, "surface", str, name),
            pos=_require(t, "pos", str, name),
            start=_require(t, "start", int, name),
            end=_require(t, "end", int, name),
        ))

    annotations = []
    raw_annotations = record.get("annotations") or []
    if not isinstance(raw_annotations, list):
        raise RecordValidationError("annotations", "must be an array")
    for i, a in enumerate(raw_annotations):
        name = f"annotations[{i}]"
        if not isinstance(a, dict):
            raise RecordValidationError(name, "must be an object")
        confidence = a.get("confidence", 1.0)
        if isinstance(confidence, bool) or not isinstance(confidence, (int, float)):
            raise RecordValidationError(name, "field 'confidence' must be a number")
        annotations.append(ConceptAnnotation(
            start=_require(a, "start", int, name),
            end=_require(a, "end", int, name),
            concept=_require(a, "concept", str, name),
            confidence=float(confidence),
        ))

    gold = record.get("gold") or []
    if not isinstance(gold, list) or not all(isinstance(g, str) for g in gold):
        raise RecordValidationError("gold", "must be an array of strings")

    return Document(id=doc_id, text=text, tokens=tokens, annotations=annotations, gold=gold)


def parse_document_record(line: str) -> Document:
    """Parse one JSON-lines record into a validated :class:`Document`."""
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise RecordParseError(exc.msg, offset=exc.pos) from exc
    return document_from_record(record)


def document_to_record(doc: Document) -> dict:
    record = {
        "id": doc.id,
        "text": doc.text,
        "tokens": [
            {"surface": t.surface, "pos": t.pos, "start": t.start, "end": t.end}
            for t in doc.tokens
        ],
        "annotations": [
            {"start": a.start, "end": a.end, "concept": a.concept, "confidence": a.confidence}
            for a in doc.annotations
        ],
    }
    if doc.gold:
        record["gold"] = list(doc.gold)
    return record


def serialize_document(doc: Document) -> str:
    return json.dumps(document_to_record(doc), ensure_ascii=False)


def read_jsonl(path: str | os.PathLike) -> list[tuple[int, dict]]:
    """Read a JSON-lines file, returning ``(line_number, object)`` pairs."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                out.append((lineno, json.loads(line)))
            except json.JSONDecodeError as exc:
                raise RecordParseError(exc.msg, line_number=lineno, offset=exc.pos) from exc
    return out


def load_corpus(path: str | os.PathLike) -> list[Document]:
    docs: list[Document] = []
    seen: set[str] = set()
    for lineno, record in read_jsonl(path):
        try:
            doc = document_from_record(record)
        except RecordValidationError as exc:
            raise RecordValidationError(exc.field, exc.detail, line_number=lineno) from exc
        except RecordParseError as exc:
            raise RecordParseError(str(exc), line_number=lineno) from exc
        if doc.id in seen:
            raise CorpusError(f"line {lineno}: duplicate document id {doc.id!r}")
        seen.add(doc.id)
        docs.append(doc)
    return docs


def atomic_write_text(path: str | os.PathLike, content: str) -> None:
    """Write ``content`` to ``path`` via a temp file in the same directory and a rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(content)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def write_jsonl(path: str | os.PathLike, records: Iterable[dict]) -> None:
    lines = [json.dumps(r, ensure_ascii=False) + "\n" for r in records]
    atomic_write_text(path, "".join(lines))


def write_corpus(path: str | os.PathLike, docs: Sequence[Document]) -> None:
    write_jsonl(path, (document_to_record(d) for d in docs))


_stemmer = PorterStemmer(mode=PorterStemmer.ORIGINAL_ALGORITHM)
_WS = re.compile(r"\s+")


@lru_cache(maxsize=65536)
def stem(word: str) -> str:
    return _stemmer.stem(word.lower())


def collapse_whitespace(phrase: str) -> str:
    return _WS.sub(" ", phrase).strip().lower()


@lru_cache(maxsize=65536)
def normalize_phrase(phrase: str) -> str:
    """Lowercase, collapse whitespace and Porter-stem every token.

    >>> normalize_phrase("Mad Cow  Disease")
    'mad cow diseas'
    """
    return " ".join(stem(w) for w in collapse_whitespace(phrase).split(" ") if w)
