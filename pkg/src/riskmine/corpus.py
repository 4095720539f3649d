"""Document ingestion, sentence segmentation, and tokenization.

Every downstream mention is traceable to its source: tokens carry character
offsets into the original document text, sentences carry (doc_id, sent_index),
and documents carry their publication timestamp (needed for register
first_seen/last_seen dates).

Segmentation and tokenization are deterministic, pure functions. The
"normalized" rendering of a sentence is its token surfaces joined by single
spaces, e.g. "Microsoft are facing a fine , said Bill Gates ." -- punctuation
detached, original case preserved. Matching downstream is case-insensitive.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Iterator

from .validation import require

# Sentence terminators and the abbreviations that must not end a sentence.
_TERMINATORS = {".", "!", "?"}
_ABBREVIATIONS = {"Inc.", "Co.", "Ltd.", "U.S."}

# Characters detached from the front/back of whitespace-delimited chunks.
_PUNCT = set(".,;:!?\"'()[]{}`")


class CorpusError(ValueError):
    """Raised for malformed or duplicate document records."""


@dataclass(frozen=True)
class Token:
    surface: str
    start_char: int
    end_char: int

    def __post_init__(self) -> None:
        require(self.start_char < self.end_char,
                f"token offsets must satisfy start < end, got [{self.start_char}, {self.end_char})")

    @property
    def lower(self) -> str:
        return self.surface.lower()


@dataclass(frozen=True)
class Sentence:
    doc_id: str
    sent_index: int
    tokens: tuple[Token, ...]

    def __post_init__(self) -> None:
        require(len(self.tokens) > 0, "sentence must contain at least one token")

    @property
    def text(self) -> str:
        """Normalized sentence text: token surfaces joined by single spaces."""
        return " ".join(t.surface for t in self.tokens)

    @property
    def lower_tokens(self) -> tuple[str, ...]:
        return tuple(t.lower for t in self.tokens)

    @property
    def ref(self) -> tuple[str, int]:
        return (self.doc_id, self.sent_index)


@dataclass(frozen=True)
class Document:
    doc_id: str
    source: str
    published_at: datetime
    text: str

    def __post_init__(self) -> None:
        require(bool(self.doc_id), "doc_id must be non-empty")
        require(bool(self.text), "document text must be non-empty")
        require(self.published_at.tzinfo is not None,
                f"published_at for {self.doc_id!r} must be timezone-aware")


@dataclass
class Corpus:
    """An ordered collection of documents with cached sentence segmentation."""

    documents: dict[str, Document] = field(default_factory=dict)

    def add(self, doc: Document) -> None:
        if doc.doc_id in self.documents:
            raise CorpusError(f"duplicate doc_id: {doc.doc_id!r}")
        self.documents[doc.doc_id] = doc

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[Document]:
        # Deterministic merge order regardless of insertion order.
        for doc_id in sorted(self.documents):
            yield self.documents[doc_id]

    def sentences(self) -> Iterator[Sentence]:
        for doc in self:
            yield from segment(doc)

    def sentence(self, doc_id: str, sent_index: int) -> Sentence:
        doc = self.documents.get(doc_id)
        if doc is None:
            raise CorpusError(f"unknown doc_id: {doc_id!r}")
        sents = segment(doc)
        if not 0 <= sent_index < len(sents):
            raise CorpusError(f"document {doc_id!r} has no sentence {sent_index}")
        return sents[sent_index]


def parse_timestamp(value: str) -> datetime:
    """Parse an ISO-8601 timestamp; naive values are taken as UTC."""
    ts = datetime.fromisoformat(value.replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts


def ingest(lines: Iterable[str]) -> Corpus:
    """Build a corpus from line-delimited JSON document records.

    Each record needs doc_id, source, published_at (ISO-8601), and text.
    Malformed records and duplicate doc_ids are rejected with the offending
    line number / id in the error message.
    """
    corpus = Corpus()
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"line {lineno}: invalid JSON ({exc})") from exc
        if not isinstance(record, dict):
            raise CorpusError(f"line {lineno}: record must be an object")
        missing = [k for k in ("doc_id", "source", "published_at", "text") if not record.get(k)]
        if missing:
            raise CorpusError(f"line {lineno}: missing field(s) {', '.join(missing)}")
        try:
            published_at = parse_timestamp(str(record["published_at"]))
        except ValueError as exc:
            raise CorpusError(f"line {lineno}: bad published_at ({exc})") from exc
        doc = Document(
            doc_id=str(record["doc_id"]),
            source=str(record["source"]),
            published_at=published_at,
            text=str(record["text"]),
        )
        if doc.doc_id in corpus.documents:
            raise CorpusError(f"line {lineno}: duplicate doc_id: {doc.doc_id!r}")
        corpus.add(doc)
    return corpus


def load_corpus(path) -> Corpus:
    with open(path, encoding="utf-8") as fh:
        return ingest(fh)


def dump_sentences(corpus: Corpus) -> Iterator[str]:
    """Debug dump: one JSON record per tokenized sentence."""
    for sent in corpus.sentences():
        yield json.dumps({
            "doc_id": sent.doc_id,
            "sent_index": sent.sent_index,
            "tokens": [t.surface for t in sent.tokens],
            "offsets": [[t.start_char, t.end_char] for t in sent.tokens],
        }, ensure_ascii=False)


def _is_boundary(text: str, i: int) -> bool:
    """True when the terminator at text[i] ends a sentence.

    A terminator splits only when followed by whitespace and then an
    uppercase letter or an opening quote, and when it does not complete a
    known abbreviation ("Inc.", "Co.", "Ltd.", "U.S.").
    """
    j = i + 1
    if j >= len(text):
        return True
    if not text[j].isspace():
        return False
    k = j
    while k < len(text) and text[k].isspace():
        k += 1
    if k >= len(text):
        return True
    if not (text[k].isupper() or text[k] in "\"'"):
        return False
    if text[i] == ".":
        # Walk back to the start of the word containing this period.
        w = i
        while w > 0 and not text[w - 1].isspace():
            w -= 1
        if text[w:i + 1] in _ABBREVIATIONS:
            return False
    return True


def segment(doc: Document) -> list[Sentence]:
    """Split a document into sentences; whitespace-only text yields none."""
    text = doc.text
    sentences: list[Sentence] = []
    start = 0
    i = 0
    while i < len(text):
        if text[i] in _TERMINATORS and _is_boundary(text, i):
            tokens = tokenize(text, start, i + 1)
            if tokens:
                sentences.append(Sentence(doc.doc_id, len(sentences), tuple(tokens)))
            start = i + 1
        i += 1
    tokens = tokenize(text, start, len(text))
    if tokens:
        sentences.append(Sentence(doc.doc_id, len(sentences), tuple(tokens)))
    return sentences


def tokenize(text: str, start: int = 0, end: int | None = None) -> list[Token]:
    """Tokenize text[start:end], keeping offsets into the full text.

    Whitespace-delimited chunks have leading/trailing punctuation detached
    one character at a time, and a possessive "'s" is split into its own
    token (so "Microsoft 's" round-trips the way news wire text renders it).
    Internal punctuation such as hyphens stays put ("cash-flow").
    """
    if end is None:
        end = len(text)
    tokens: list[Token] = []
    i = start
    while i < end:
        if text[i].isspace():
            i += 1
            continue
        j = i
        while j < end and not text[j].isspace():
            j += 1
        tokens.extend(_split_chunk(text, i, j))
        i = j
    return tokens


def _split_chunk(text: str, i: int, j: int) -> list[Token]:
    leading: list[Token] = []
    trailing: list[Token] = []
    while i < j and text[i] in _PUNCT:
        # An apostrophe that opens a possessive stays with the core.
        if text[i] == "'" and i + 1 < j and text[i + 1:j].lower() in ("s", "s."):
            break
        leading.append(Token(text[i], i, i + 1))
        i += 1
    while j > i and text[j - 1] in _PUNCT:
        trailing.append(Token(text[j - 1], j - 1, j))
        j -= 1
    core: list[Token] = []
    if i < j:
        if j - i > 2 and text[j - 2:j].lower() == "'s":
            core.append(Token(text[i:j - 2], i, j - 2))
            core.append(Token(text[j - 2:j], j - 2, j))
        else:
            core.append(Token(text[i:j], i, j))
    return leading + core + list(reversed(trailing))
