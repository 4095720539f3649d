"""Dictionary tagging of company and risk-type mentions.

A gazetteer is a token-level multi-pattern matcher (trie over lowercased
token sequences) built from company alias lists and the taxonomy's risk
phrases. Tagging reports leftmost-longest, non-overlapping matches per
kind; company matches win overlaps against risk matches, so "Fire Insurance
Co." does not spawn a spurious risk mention. Candidate pairs are the full
cross-product of company and risk mentions within one sentence -- the
classification step downstream decides which pairs actually express a risk
exposure.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from datetime import datetime
from typing import Iterable, Iterator, Sequence

from sklearn.base import BaseEstimator, TransformerMixin

from .corpus import Corpus, Sentence
from .taxonomy import TaxonomyGraph
from .validation import check_fitted, require

KIND_COMPANY = "COMPANY"
KIND_RISK = "RISK"


@dataclass(frozen=True)
class CompanyEntity:
    entity_id: str
    canonical_name: str
    aliases: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        require(bool(self.entity_id), "entity_id must be non-empty")
        require(bool(self.canonical_name), f"entity {self.entity_id!r}: canonical_name must be non-empty")
        # The canonical name always counts as an alias.
        object.__setattr__(self, "aliases", frozenset(self.aliases) | {self.canonical_name})


@dataclass(frozen=True)
class MentionSpan:
    doc_id: str
    sent_index: int
    token_start: int
    token_end: int
    kind: str
    resolved_id: str
    surface: str
    ambiguous: bool = False

    def __post_init__(self) -> None:
        require(0 <= self.token_start < self.token_end,
                f"span [{self.token_start}, {self.token_end}) is empty or negative")
        require(self.kind in (KIND_COMPANY, KIND_RISK), f"unknown span kind {self.kind!r}")

    def overlaps(self, other: "MentionSpan") -> bool:
        return self.token_start < other.token_end and other.token_start < self.token_end


@dataclass(frozen=True)
class CandidatePair:
    pair_id: str
    company: MentionSpan
    risk: MentionSpan
    doc_id: str
    sent_index: int
    snippet: str
    published_at: datetime | None = None
    ambiguous: bool = False

    def __post_init__(self) -> None:
        require(self.company.kind == KIND_COMPANY and self.risk.kind == KIND_RISK,
                "pair needs one COMPANY span and one RISK span")
        require((self.company.doc_id, self.company.sent_index)
                == (self.risk.doc_id, self.risk.sent_index)
                == (self.doc_id, self.sent_index),
                "pair spans must come from the same sentence")
        require(not self.company.overlaps(self.risk), "pair spans must not overlap")

    @property
    def entity_id(self) -> str:
        return self.company.resolved_id

    @property
    def risk_type_id(self) -> str:
        return self.risk.resolved_id

    @property
    def snippet_tokens(self) -> tuple[str, ...]:
        return tuple(self.snippet.split(" "))


class _TrieNode:
    __slots__ = ("children", "payloads")

    def __init__(self) -> None:
        self.children: dict[str, _TrieNode] = {}
        self.payloads: list[tuple[str, str]] = []  # (kind, resolved_id)


class Gazetteer:
    """Immutable after build; safe to share across tagging workers."""

    def __init__(self) -> None:
        self._root = _TrieNode()
        self._max_len = 0
        self.pattern_count = 0

    def _add(self, phrase_tokens: Sequence[str], kind: str, resolved_id: str) -> None:
        node = self._root
        for tok in phrase_tokens:
            node = node.children.setdefault(tok.lower(), _TrieNode())
        payload = (kind, resolved_id)
        if payload not in node.payloads:
            node.payloads.append(payload)
            self.pattern_count += 1
        self._max_len = max(self._max_len, len(phrase_tokens))

    def longest_match(self, tokens_lower: Sequence[str], start: int,
                      kind: str, blocked: Sequence[bool] | None = None
                      ) -> tuple[int, list[str]] | None:
        """Longest match of `kind` starting at `start`, avoiding blocked
        tokens. Returns (end, resolved_ids) or None."""
        node = self._root
        best: tuple[int, list[str]] | None = None
        i = start
        while i < len(tokens_lower):
            if blocked is not None and blocked[i]:
                break
            node = node.children.get(tokens_lower[i])
            if node is None:
                break
            i += 1
            ids = sorted(rid for (k, rid) in node.payloads if k == kind)
            if ids:
                best = (i, ids)
        return best


def _tokenize_phrase(phrase: str) -> list[str]:
    from .corpus import tokenize
    return [t.surface for t in tokenize(phrase)]


def build_gazetteer(entities: Iterable[CompanyEntity] = (),
                    taxonomy: TaxonomyGraph | None = None) -> Gazetteer:
    """Compile company aliases and taxonomy risk phrases into one matcher.

    Phrases are tokenized with the corpus tokenizer so gazetteer entries and
    sentence tokens always line up. Risk phrases ending in "risk" also match
    their plural surface form. Empty aliases are rejected.
    """
    gaz = Gazetteer()
    entries = list(entities)
    require(bool(entries) or taxonomy is not None, "gazetteer needs entities, a taxonomy, or both")
    for entity in entries:
        for alias in sorted(entity.aliases):
            if not alias.strip():
                raise ValueError(f"entity {entity.entity_id!r} has an empty alias")
            gaz._add(_tokenize_phrase(alias), KIND_COMPANY, entity.entity_id)
    if taxonomy is not None:
        for risk_type_id in sorted(taxonomy.risk_phrases()):
            tokens = risk_type_id.split(" ")
            gaz._add(tokens, KIND_RISK, risk_type_id)
            if tokens[-1] == "risk":
                gaz._add(tokens[:-1] + ["risks"], KIND_RISK, risk_type_id)
    return gaz


def _scan(sentence: Sentence, gaz: Gazetteer, kind: str,
          blocked: list[bool] | None) -> list[MentionSpan]:
    lowers = sentence.lower_tokens
    spans: list[MentionSpan] = []
    i = 0
    while i < len(lowers):
        if blocked is not None and blocked[i]:
            i += 1
            continue
        match = gaz.longest_match(lowers, i, kind, blocked)
        if match is None:
            i += 1
            continue
        end, ids = match
        surface = " ".join(t.surface for t in sentence.tokens[i:end])
        for rid in ids:
            spans.append(MentionSpan(
                doc_id=sentence.doc_id, sent_index=sentence.sent_index,
                token_start=i, token_end=end, kind=kind, resolved_id=rid,
                surface=surface, ambiguous=len(ids) > 1))
        i = end
    return spans


def tag(sentence: Sentence, gazetteer: Gazetteer) -> list[MentionSpan]:
    """Tag one sentence: company spans first, then risk spans over the
    remaining tokens (company matches mask their tokens)."""
    company_spans = _scan(sentence, gazetteer, KIND_COMPANY, None)
    blocked = [False] * len(sentence.tokens)
    for span in company_spans:
        for k in range(span.token_start, span.token_end):
            blocked[k] = True
    risk_spans = _scan(sentence, gazetteer, KIND_RISK, blocked)
    return sorted(company_spans + risk_spans,
                  key=lambda s: (s.token_start, s.token_end, s.kind, s.resolved_id))


def make_pair_id(doc_id: str, sent_index: int, company: MentionSpan,
                 risk: MentionSpan) -> str:
    # Resolved ids participate so that an ambiguous alias (two entities,
    # same span) still yields unique pair ids.
    key = "|".join([
        doc_id, str(sent_index),
        str(company.token_start), str(company.token_end), company.resolved_id,
        str(risk.token_start), str(risk.token_end), risk.resolved_id,
    ])
    return hashlib.sha1(key.encode("utf-8")).hexdigest()[:16]


def pair_candidates(spans: Sequence[MentionSpan], sentence: Sentence,
                    published_at: datetime | None = None) -> list[CandidatePair]:
    """Cross-product of COMPANY x RISK spans within one sentence."""
    refs = {(s.doc_id, s.sent_index) for s in spans}
    require(len(refs) <= 1, "pair_candidates expects spans from a single sentence")
    if refs:
        require(refs == {sentence.ref}, "spans do not belong to the given sentence")
    companies = [s for s in spans if s.kind == KIND_COMPANY]
    risks = [s for s in spans if s.kind == KIND_RISK]
    snippet = sentence.text
    pairs = []
    for company in companies:
        for risk in risks:
            pairs.append(CandidatePair(
                pair_id=make_pair_id(sentence.doc_id, sentence.sent_index, company, risk),
                company=company, risk=risk,
                doc_id=sentence.doc_id, sent_index=sentence.sent_index,
                snippet=snippet, published_at=published_at,
                ambiguous=company.ambiguous or risk.ambiguous))
    return pairs


def extract_candidates(corpus: Corpus, gazetteer: Gazetteer) -> list[CandidatePair]:
    """Run tag + pair over every sentence of the corpus."""
    pairs: list[CandidatePair] = []
    for doc in corpus:
        from .corpus import segment
        for sentence in segment(doc):
            spans = tag(sentence, gazetteer)
            pairs.extend(pair_candidates(spans, sentence, published_at=doc.published_at))
    return pairs


# ---------------------------------------------------------------------------
# Interchange formats
# ---------------------------------------------------------------------------


def parse_entity_file(lines: Iterable[str]) -> list[CompanyEntity]:
    """`entity_id TAB canonical_name TAB alias1|alias2|...` per line."""
    entities: list[CompanyEntity] = []
    seen: set[str] = set()
    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 2:
            raise ValueError(f"entity file line {lineno}: expected `id TAB name [TAB aliases]`")
        entity_id, canonical = parts[0].strip(), parts[1].strip()
        if entity_id in seen:
            raise ValueError(f"entity file line {lineno}: duplicate entity_id {entity_id!r}")
        seen.add(entity_id)
        aliases = frozenset(a.strip() for a in parts[2].split("|") if a.strip()) \
            if len(parts) > 2 else frozenset()
        entities.append(CompanyEntity(entity_id, canonical, aliases))
    return entities


def span_to_dict(span: MentionSpan) -> dict:
    return {
        "token_start": span.token_start, "token_end": span.token_end,
        "kind": span.kind, "resolved_id": span.resolved_id,
        "surface": span.surface, "ambiguous": span.ambiguous,
    }


def pair_to_dict(pair: CandidatePair) -> dict:
    return {
        "pair_id": pair.pair_id,
        "entity_id": pair.entity_id,
        "risk_type_id": pair.risk_type_id,
        "doc_id": pair.doc_id,
        "sent_index": pair.sent_index,
        "company": span_to_dict(pair.company),
        "risk": span_to_dict(pair.risk),
        "snippet": pair.snippet,
        "published_at": pair.published_at.isoformat() if pair.published_at else None,
        "ambiguous": pair.ambiguous,
    }


def pair_from_dict(record: dict) -> CandidatePair:
    from .corpus import parse_timestamp
    ref = {"doc_id": record["doc_id"], "sent_index": record["sent_index"]}
    company = MentionSpan(kind=KIND_COMPANY, **ref, **{
        k: record["company"][k] for k in
        ("token_start", "token_end", "resolved_id", "surface", "ambiguous")})
    risk = MentionSpan(kind=KIND_RISK, **ref, **{
        k: record["risk"][k] for k in
        ("token_start", "token_end", "resolved_id", "surface", "ambiguous")})
    published = record.get("published_at")
    return CandidatePair(
        pair_id=record["pair_id"], company=company, risk=risk,
        doc_id=record["doc_id"], sent_index=record["sent_index"],
        snippet=record["snippet"],
        published_at=parse_timestamp(published) if published else None,
        ambiguous=record.get("ambiguous", False))


def dump_candidates(pairs: Iterable[CandidatePair]) -> Iterator[str]:
    for pair in pairs:
        yield json.dumps(pair_to_dict(pair), ensure_ascii=False)


class MentionTagger(BaseEstimator, TransformerMixin):
    """Estimator-style wrapper: fit compiles the gazetteer, transform tags."""

    def __init__(self, entities: Sequence[CompanyEntity] = (),
                 taxonomy: TaxonomyGraph | None = None):
        self.entities = entities
        self.taxonomy = taxonomy

    def fit(self, X=None, y=None) -> "MentionTagger":
        self.gazetteer_ = build_gazetteer(self.entities, self.taxonomy)
        return self

    def transform(self, X: Iterable[Sentence]) -> list[list[MentionSpan]]:
        check_fitted(self, "gazetteer_")
        return [tag(sentence, self.gazetteer_) for sentence in X]
