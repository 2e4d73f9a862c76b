"""Candidate keyphrase selection over POS-tagged tokens.

Candidates are maximal noun groups ``(JJ)*(NN|NNS|NNP|NNPS)+``.  Untagged
text can be routed through :class:`FallbackTagger`, a best-effort lexicon and
suffix tagger; pre-tagged input is the reference path.
"""

from __future__ import annotations

import re
from typing import Iterable, NamedTuple, Protocol, Sequence

from .corpus import Token, normalize_phrase

ADJECTIVE_TAGS = frozenset({"JJ"})
NOUN_TAGS = frozenset({"NN", "NNS", "NNP", "NNPS"})

# one symbol per token: A adjective, N noun, O anything else
_SYMBOL = {**dict.fromkeys(ADJECTIVE_TAGS, "A"), **dict.fromkeys(NOUN_TAGS, "N")}
_GROUP = re.compile(r"A*N+")


class CandidatePhrase(NamedTuple):
    surface: str
    start: int
    end: int
    token_range: tuple[int, int]  # inclusive first and last token index
    normalized: str


def pos_symbols(tokens: Sequence[Token]) -> str:
    return "".join([_SYMBOL.get(t.pos, "O") for t in tokens])


def extract_candidates(tokens: Sequence[Token], text: str) -> list[CandidatePhrase]:
    out = []
    # leftmost-longest matches of A*N+ are exactly the maximal, non-overlapping noun groups
    for m in _GROUP.finditer(pos_symbols(tokens)):
        first, stop = m.span()
        start, end = tokens[first].start, tokens[stop - 1].end
        words = " ".join([t.surface for t in tokens[first:stop]])
        out.append(CandidatePhrase(text[start:end], start, end, (first, stop - 1), normalize_phrase(words)))
    return out


def unique_candidates(occurrences: Iterable[CandidatePhrase]) -> dict[str, list[CandidatePhrase]]:
    """Group occurrences by normalized form, keeping first-occurrence order."""
    groups: dict[str, list[CandidatePhrase]] = {}
    for occ in sorted(occurrences, key=lambda c: c.start):
        groups.setdefault(occ.normalized, []).append(occ)
    return groups


class Tagger(Protocol):
    def tag(self, text: str) -> list[Token]: ...


_WORD = re.compile(r"\d+(?:[.,]\d+)+|\w+(?:[-'’.]\w+)*|\.\.\.|[^\w\s]")
_CLITIC = re.compile(r"(?i)(n't|'s|'re|'ve|'ll|'d|'m|’s)$")


def tokenize(text: str) -> list[tuple[str, int, int]]:
    """Split text into ``(surface, start, end)`` word and punctuation spans.

    Hyphenated words stay single tokens; English clitics are split off.
    """
    spans = []
    for m in _WORD.finditer(text):
        word, start = m.group(), m.start()
        c = _CLITIC.search(word)
        if c and c.start() > 0:
            cut = start + c.start()
            spans.append((text[start:cut], start, cut))
            spans.append((text[cut:m.end()], cut, m.end()))
        else:
            spans.append((word, start, m.end()))
    return spans


_CLOSED_CLASS = {
    "DT": "a an the this that these those some any every each no all both another either neither",
    "IN": "of in on at by for with from about into over after before under between through during "
          "without within against among since until upon near like than as because if whether "
          "although though while whereas per via",
    "CC": "and or but nor yet",
    "PRP": "i you he she it we they me him us them",
    "PRP$": "my your his her its our their",
    "WDT": "which whatever",
    "WP": "who whom what",
    "WRB": "how when where why",
    "MD": "can could may might must shall should will would",
    "TO": "to",
    "EX": "there",
    "RB": "not never also very only still already just even too so often always here then now "
          "again later soon much",
    "JJ": "other such same many few several last next first new old good great little big small "
          "high low large long certain similar whole main major",
    "CD": "one two three four five six seven eight nine ten hundred thousand million billion",
    "VBZ": "is has does",
    "VBP": "are have do am",
    "VBD": "was were had did said made took came went found gave told became left felt knew thought "
           "began kept held brought fell rose ran saw got met paid sold spent stood lost led won",
    "VB": "be",
    "VBN": "been",
    "VBG": "being",
    "POS": "'s ’s",
}
_LEXICON = {w: tag for tag, words in _CLOSED_CLASS.items() for w in words.split()}
_LEXICON["n't"] = "RB"

_SUFFIXES = [
    ("ly", "RB"),
    ("ing", "VBG"),
    ("ed", "VBN"),
    ("ous", "JJ"), ("ful", "JJ"), ("ive", "JJ"), ("able", "JJ"), ("ible", "JJ"),
    ("ical", "JJ"), ("less", "JJ"), ("ish", "JJ"), ("ic", "JJ"), ("al", "JJ"), ("ary", "JJ"),
]


class FallbackTagger:
    """Lexicon plus suffix heuristics; unknown words default to NN.

    Best effort only.  It is stateless and safe for concurrent use.
    """

    def tag_word(self, word: str, sentence_initial: bool) -> str:
        low = word.lower()
        if low in _LEXICON:
            return _LEXICON[low]
        if not any(ch.isalnum() for ch in word):
            return "." if word in {".", "!", "?"} else ":" if word in {";", ":", "...", "-", "--"} else ","
        if re.fullmatch(r"[\d.,]+", word):
            return "CD"
        if word[0].isupper() and not sentence_initial:
            return "NNPS" if len(word) > 3 and low.endswith("s") and not low.endswith("ss") else "NNP"
        if word.isupper() and len(word) > 1:
            return "NNP"
        for suffix, tag in _SUFFIXES:
            if low.endswith(suffix) and len(low) > len(suffix) + 2:
                return tag
        if low.endswith("s") and not low.endswith(("ss", "us", "is")) and len(low) > 3:
            return "NNS"
        return "NN"

    def tag(self, text: str) -> list[Token]:
        tokens = []
        sentence_initial = True
        for surface, start, end in tokenize(text):
            pos = self.tag_word(surface, sentence_initial)
            tokens.append(Token(surface=surface, pos=pos, start=start, end=end))
            sentence_initial = pos == "."
        return tokens
