"""Concept annotation: offline gazetteer matching, the TagMe web service, and
linking annotations to candidate phrase occurrences."""

from __future__ import annotations

import bisect
import hashlib
import json
import logging
import os
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import requests

from .candidates import CandidatePhrase
from .corpus import ConceptAnnotation, Token, atomic_write_text

log = logging.getLogger(__name__)

DEFAULT_TAGME_ENDPOINT = "https://tagme.d4science.org/tagme"
DEFAULT_THRESHOLD = 0.1
DEFAULT_MAX_NGRAM = 5
TAGME_MAX_CHARS = 4000


class AnnotatorError(RuntimeError):
    pass


class ConfigurationError(AnnotatorError):
    pass


class TransportError(AnnotatorError):
    pass


class ServiceError(AnnotatorError):
    def __init__(self, status: int, body: str):
        self.status = status
        self.body = body
        super().__init__(f"TagMe returned HTTP {status}: {body[:200]}")


@dataclass(frozen=True)
class Gazetteer:
    entries: dict[str, tuple[str, float]]
    max_ngram: int = DEFAULT_MAX_NGRAM

    def __post_init__(self):
        normalized = {}
        for anchor, (title, prior) in self.entries.items():
            key = " ".join(anchor.lower().split())
            if not key:
                raise ValueError("gazetteer anchor must be non-empty")
            if not title:
                raise ValueError(f"gazetteer anchor {anchor!r} has an empty title")
            if not 0.0 <= prior <= 1.0:
                raise ValueError(f"gazetteer prior for {anchor!r} not in [0, 1]: {prior}")
            normalized[key] = (title, float(prior))
        object.__setattr__(self, "entries", normalized)
        if self.max_ngram < 1:
            raise ValueError("max_ngram must be >= 1")

    @classmethod
    def load(cls, path: str | os.PathLike, max_ngram: int = DEFAULT_MAX_NGRAM) -> "Gazetteer":
        """Read ``anchor<TAB>title<TAB>prior`` lines; ``#`` lines are comments."""
        entries = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line.strip() or line.lstrip().startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise ValueError(f"{path}:{lineno}: expected 3 tab-separated fields, got {len(parts)}")
                anchor, title, prior = parts
                try:
                    entries[anchor] = (title.strip(), float(prior))
                except ValueError:
                    raise ValueError(f"{path}:{lineno}: prior {prior!r} is not a number") from None
        return cls(entries, max_ngram=max_ngram)


def gazetteer_annotate(
    text: str,
    tokens: Sequence[Token],
    gaz: Gazetteer,
    threshold: float = DEFAULT_THRESHOLD,
) -> list[ConceptAnnotation]:
    out = []
    words = [t.surface.lower() for t in tokens]
    i = 0
    while i < len(tokens):
        for n in range(min(gaz.max_ngram, len(tokens) - i), 0, -1):
            hit = gaz.entries.get(" ".join(words[i:i + n]))
            if hit is not None and hit[1] >= threshold:
                title, prior = hit
                out.append(ConceptAnnotation(tokens[i].start, tokens[i + n - 1].end, title, prior))
                i += n
                break
        else:
            i += 1
    return out


@dataclass
class AnnotatorConfig:
    mode: str = "gazetteer"
    confidence_threshold: float = DEFAULT_THRESHOLD
    tagme_endpoint: str = DEFAULT_TAGME_ENDPOINT
    tagme_token: str | None = field(default=None, repr=False)
    max_concurrent_requests: int = 4
    retry_limit: int = 3
    backoff_base: float = 0.5
    timeout: float = 30.0
    lang: str = "en"
    max_chars: int = TAGME_MAX_CHARS
    cache_dir: str | None = None
    gazetteer_path: str | None = None
    strict_containment: bool = False

    def __post_init__(self):
        if self.mode not in ("tagme", "gazetteer"):
            raise ConfigurationError(f"unknown annotator mode {self.mode!r}")
        if not 0.0 <= self.confidence_threshold <= 1.0:
            raise ConfigurationError("confidence_threshold must be in [0, 1]")
        if self.max_concurrent_requests < 1:
            raise ConfigurationError("max_concurrent_requests must be >= 1")
        if self.retry_limit < 0:
            raise ConfigurationError("retry_limit must be >= 0")


_SENTENCE_END = re.compile(r"(?<=[.!?])[\"')\]]*\s+")


def split_text(text: str, max_chars: int) -> list[tuple[int, str]]:
    """Split ``text`` into ``(offset, chunk)`` pieces no longer than ``max_chars``.

    Cuts fall on sentence boundaries where possible, otherwise on whitespace,
    otherwise hard at the limit.
    """
    if len(text) <= max_chars:
        return [(0, text)]
    chunks = []
    pos = 0
    while len(text) - pos > max_chars:
        limit = pos + max_chars
        cut = None
        for m in _SENTENCE_END.finditer(text, pos, limit):
            cut = m.end()
        if cut is None or cut <= pos:
            ws = text.rfind(" ", pos + 1, limit)
            cut = ws + 1 if ws > pos else limit
        chunks.append((pos, text[pos:cut]))
        pos = cut
    chunks.append((pos, text[pos:]))
    return chunks


class ResponseCache:
    """On-disk JSON cache keyed by endpoint and request text.

    One file per key, written by rename, so concurrent readers only ever see
    complete entries.
    """

    def __init__(self, directory: str | os.PathLike):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def key(endpoint: str, lang: str, text: str) -> str:
        h = hashlib.sha256()
        for part in (endpoint, lang, text):
            h.update(part.encode("utf-8"))
            h.update(b"\0")
        return h.hexdigest()

    def get(self, key: str) -> dict | None:
        path = self.directory / f"{key}.json"
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            return None

    def put(self, key: str, payload: dict) -> None:
        atomic_write_text(self.directory / f"{key}.json", json.dumps(payload, ensure_ascii=False))


class TagMeClient:
    """Thin TagMe ``/tag`` client with retries, caching and a concurrency cap."""

    def __init__(self, cfg: AnnotatorConfig, session: requests.Session | None = None):
        token = cfg.tagme_token or os.environ.get("TAGME_TOKEN")
        if not token:
            raise ConfigurationError("TagMe mode needs an access token (TAGME_TOKEN or config)")
        self.cfg = cfg
        self.token = token
        self.cache = ResponseCache(cfg.cache_dir) if cfg.cache_dir else None
        self._slots = threading.BoundedSemaphore(cfg.max_concurrent_requests)
        self._session = session

    @property
    def url(self) -> str:
        return self.cfg.tagme_endpoint.rstrip("/") + "/tag"

    def _post(self, text: str) -> dict:
        params = {"text": text, "lang": self.cfg.lang, "gcube-token": self.token}
        send = self._session.post if self._session is not None else requests.post
        attempt = 0
        while True:
            try:
                with self._slots:
                    resp = send(self.url, data=params, timeout=self.cfg.timeout)
            except (requests.ConnectionError, requests.Timeout) as exc:
                failure = exc
            else:
                # 5xx and 429 are transient; any other non-success status is final
                if resp.status_code >= 500 or resp.status_code == 429:
                    failure = ServiceError(resp.status_code, resp.text)
                elif resp.status_code != 200:
                    raise ServiceError(resp.status_code, resp.text)
                else:
                    try:
                        return resp.json()
                    except ValueError:
                        raise ServiceError(resp.status_code, resp.text) from None
            if attempt >= self.cfg.retry_limit:
                if isinstance(failure, ServiceError):
                    raise failure
                raise TransportError(f"TagMe request failed after {attempt + 1} attempts: {failure}") from failure
            delay = self.cfg.backoff_base * (2 ** attempt)
            log.warning("TagMe request failed (%s); retry %d in %.2fs", failure, attempt + 1, delay)
            time.sleep(delay)
            attempt += 1

    def tag_chunk(self, text: str) -> dict:
        key = ResponseCache.key(self.cfg.tagme_endpoint, self.cfg.lang, text)
        if self.cache is not None:
            cached = self.cache.get(key)
            if cached is not None:
                return cached
        payload = self._post(text)
        if self.cache is not None:
            self.cache.put(key, payload)
        return payload

    def annotate(self, text: str) -> list[ConceptAnnotation]:
        if not text:
            return []
        out = []
        for offset, chunk in split_text(text, self.cfg.max_chars):
            payload = self.tag_chunk(chunk)
            out.extend(spots_to_annotations(payload, offset, len(text), self.cfg.confidence_threshold))
        return out


def spots_to_annotations(payload: dict, offset: int, text_length: int, threshold: float) -> list[ConceptAnnotation]:
    out = []
    for spot in payload.get("annotations", []):
        title = spot.get("title")
        if not title or "start" not in spot or "end" not in spot:
            continue
        rho = float(spot.get("rho", 0.0))
        if rho < threshold:
            continue
        start, end = offset + int(spot["start"]), offset + int(spot["end"])
        if not 0 <= start < end <= text_length:
            log.warning("dropping TagMe spot %r with span [%d, %d) outside text", spot.get("spot"), start, end)
            continue
        out.append(ConceptAnnotation(start, end, title, min(max(rho, 0.0), 1.0)))
    out.sort(key=lambda a: (a.start, a.end, a.concept))
    return out


def tagme_annotate(text: str, cfg: AnnotatorConfig, client: TagMeClient | None = None) -> list[ConceptAnnotation]:
    if cfg.mode != "tagme":
        raise ConfigurationError(f"tagme_annotate called with mode {cfg.mode!r}")
    client = client or TagMeClient(cfg)
    return client.annotate(text)


def link_candidates(
    candidates: Iterable[CandidatePhrase],
    annotations: Sequence[ConceptAnnotation],
    strict: bool = False,
) -> list[tuple[CandidatePhrase, str]]:
    """Pair every candidate occurrence with each concept whose annotation overlaps it.

    With ``strict`` the annotation must lie inside the candidate span.
    """
    anns = sorted(annotations, key=lambda a: a.start)
    starts = [a.start for a in anns]
    longest = max((a.end - a.start for a in anns), default=0)
    pairs: dict[tuple[CandidatePhrase, str], None] = {}
    for cand in candidates:
        lo = bisect.bisect_left(starts, cand.start - longest)
        hi = bisect.bisect_left(starts, cand.end)
        for ann in anns[lo:hi]:
            if strict:
                hit = cand.start <= ann.start and ann.end <= cand.end
            else:
                hit = ann.start < cand.end and cand.start < ann.end
            if hit:
                pairs.setdefault((cand, ann.concept), None)
    return list(pairs)

