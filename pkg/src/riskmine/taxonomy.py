"""Risk-type taxonomy induction from lexical IS-A patterns.

Scans tokenized sentences for Hearst-style templates ("financial risks such
as bankruptcy, currency devaluation and fraud") and assembles the matches
into a directed IS-A graph rooted at "risk". Hypernym phrases must end in
"risk"/"risks"; hyponym lists are comma/conjunction-separated runs of plain
word tokens. The result is deliberately rich and messy; min_support exists
for callers who want a cleaner graph.

Matching semantics (shared by the brute-force test oracle):

* a "wordlike" token matches ``[a-z0-9][a-z0-9'&.-]*`` and is not a
  closed-class boundary word (determiners, prepositions, conjunctions, ...);
* the hypernym phrase is the run of at most 4 wordlike tokens adjacent to
  the pattern literal, ending in risk/risks;
* each hyponym phrase is a maximal run of 1..4 wordlike tokens; runs longer
  than 4 are rejected and terminate the list;
* hyponym lists hold at most 6 phrases, separated by "," / "and" / "or"
  (optionally ", and" / ", or").

Every hit records (doc_id, sent_index) provenance; a multi-word hypernym
additionally yields an edge to the root ("financial risk" IS-A "risk").
"""

from __future__ import annotations

import io
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from sklearn.base import BaseEstimator

from .corpus import Corpus, Sentence
from .validation import check_fitted, require

ROOT_ID = "risk"

_DETERMINERS = ("a", "an", "the")

# Closed-class tokens that terminate phrase extraction. Shared with the
# regex oracle used in tests; data, not machinery.
BOUNDARY_WORDS = frozenset({
    "a", "an", "the", "this", "that", "these", "those", "some", "any",
    "each", "every", "no", "and", "or", "but", "nor", "such", "as",
    "other", "including", "like", "than", "of", "to", "in", "on", "at",
    "by", "for", "with", "from", "into", "over", "under", "about",
    "against", "between", "during", "without", "within", "along",
    "across", "behind", "beyond", "is", "are", "was", "were", "be",
    "been", "being", "am", "has", "have", "had", "do", "does", "did",
    "will", "would", "can", "could", "may", "might", "must", "shall",
    "should", "it", "its", "he", "she", "they", "them", "his", "her",
    "their", "our", "your", "my", "we", "you", "i", "us", "not",
    "said", "says", "say",
})

_WORDLIKE_RE = re.compile(r"[a-z0-9][a-z0-9'&.\-]*")

MAX_PHRASE_TOKENS = 4
MAX_LIST_PHRASES = 6


def normalize_risk_phrase(phrase: str) -> str:
    """Canonical risk-type key: lowercase, collapsed whitespace, leading
    determiners stripped, trailing "risks" singularized to "risk".

    The register module uses this same function so registers stay joinable
    with the taxonomy.
    """
    tokens = phrase.lower().split()
    while tokens and tokens[0] in _DETERMINERS:
        tokens = tokens[1:]
    if tokens and tokens[-1] == "risks":
        tokens[-1] = "risk"
    return " ".join(tokens)


def is_wordlike(token_lower: str) -> bool:
    return (token_lower not in BOUNDARY_WORDS
            and _WORDLIKE_RE.fullmatch(token_lower) is not None)


@dataclass(frozen=True)
class HearstPattern:
    """A two-slot lexical template, e.g. "<H> such as <L>".

    The template must contain exactly one hypernym slot <H> and one
    hyponym-list slot <L>, separated by at least one literal token.
    """
    pattern_id: str
    template: str
    direction: str  # "hypernym-first" or "hyponym-first"

    def __post_init__(self) -> None:
        tokens = self.template.split()
        require(tokens.count("<H>") == 1 and tokens.count("<L>") == 1,
                f"pattern {self.pattern_id!r}: template needs exactly one <H> and one <L>")
        require(tokens[0] in ("<H>", "<L>") and tokens[-1] in ("<H>", "<L>"),
                f"pattern {self.pattern_id!r}: slots must be at the template edges")
        literals = self.literal_tokens
        require(len(literals) >= 1,
                f"pattern {self.pattern_id!r}: slots must be separated by literal tokens")
        expected = "hypernym-first" if tokens[0] == "<H>" else "hyponym-first"
        require(self.direction == expected,
                f"pattern {self.pattern_id!r}: direction {self.direction!r} "
                f"contradicts slot order (expected {expected!r})")

    @property
    def literal_tokens(self) -> tuple[str, ...]:
        return tuple(t.lower() for t in self.template.split() if t not in ("<H>", "<L>"))


def default_patterns() -> list[HearstPattern]:
    return [
        HearstPattern("such_as", "<H> such as <L>", "hypernym-first"),
        HearstPattern("including", "<H> including <L>", "hypernym-first"),
        HearstPattern("like", "<H> like <L>", "hypernym-first"),
        HearstPattern("and_other", "<L> and other <H>", "hyponym-first"),
        HearstPattern("or_other", "<L> or other <H>", "hyponym-first"),
    ]


def parse_pattern_file(lines: Iterable[str]) -> list[HearstPattern]:
    """One pattern per line: `<template> TAB <direction>`."""
    patterns: list[HearstPattern] = []
    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"pattern file line {lineno}: expected `template TAB direction`")
        template, direction = parts[0].strip(), parts[1].strip()
        pattern_id = "_".join(
            t for t in template.split() if t not in ("<H>", "<L>")) or f"p{lineno}"
        patterns.append(HearstPattern(pattern_id, template, direction))
    return patterns


Provenance = tuple[str, int, str]  # (doc_id, sent_index, pattern_id)


@dataclass
class RiskType:
    risk_type_id: str
    label: str
    support: int = 0
    provenance: list[Provenance] = field(default_factory=list)

    @property
    def is_root(self) -> bool:
        return self.risk_type_id == ROOT_ID


@dataclass
class Edge:
    child: str
    parent: str
    support: int = 0
    provenance: list[Provenance] = field(default_factory=list)
    origin: str = "pattern"  # or "default-attachment"


class TaxonomyGraph:
    """Directed IS-A graph (child -> parent edges) rooted at "risk".

    Multiple parents are allowed (DAG); self-loops are rejected. Nodes and
    edges accumulate support counts and (doc_id, sent_index) provenance.
    """

    def __init__(self) -> None:
        self.nodes: dict[str, RiskType] = {}
        self.edges: dict[tuple[str, str], Edge] = {}
        self.ensure_node(ROOT_ID, ROOT_ID)

    def ensure_node(self, risk_type_id: str, label: str | None = None) -> RiskType:
        require(bool(risk_type_id), "risk_type_id must be non-empty")
        node = self.nodes.get(risk_type_id)
        if node is None:
            node = RiskType(risk_type_id, label or risk_type_id)
            self.nodes[risk_type_id] = node
        return node

    def record_node_hit(self, risk_type_id: str, label: str, prov: Provenance) -> None:
        node = self.ensure_node(risk_type_id, label)
        node.support += 1
        node.provenance.append(prov)

    def add_edge(self, child: str, parent: str, prov: Provenance | None = None,
                 origin: str = "pattern", support: int | None = None) -> Edge:
        require(child != parent, f"self-loop rejected: {child!r}")
        self.ensure_node(child)
        self.ensure_node(parent)
        edge = self.edges.get((child, parent))
        if edge is None:
            edge = Edge(child, parent, origin=origin)
            self.edges[(child, parent)] = edge
        if prov is not None:
            edge.support += 1
            edge.provenance.append(prov)
        if support is not None:
            edge.support = support
        return edge

    def parents(self, risk_type_id: str) -> list[str]:
        return sorted(p for (c, p) in self.edges if c == risk_type_id)

    def children(self, risk_type_id: str) -> list[str]:
        return sorted(c for (c, p) in self.edges if p == risk_type_id)

    def orphans(self) -> list[str]:
        """Non-root nodes with no parent edge."""
        with_parent = {c for (c, _p) in self.edges}
        return sorted(n for n in self.nodes if n != ROOT_ID and n not in with_parent)

    def reaches_root(self) -> set[str]:
        """All nodes from which the root is reachable via parent edges."""
        children_of: dict[str, list[str]] = {}
        for (c, p) in self.edges:
            children_of.setdefault(p, []).append(c)
        reached = {ROOT_ID}
        stack = [ROOT_ID]
        while stack:
            node = stack.pop()
            for child in children_of.get(node, ()):
                if child not in reached:
                    reached.add(child)
                    stack.append(child)
        return reached

    def copy(self) -> "TaxonomyGraph":
        dup = TaxonomyGraph()
        for node in self.nodes.values():
            copied = dup.ensure_node(node.risk_type_id, node.label)
            copied.support = node.support
            copied.provenance = list(node.provenance)
        for edge in self.edges.values():
            copied_edge = dup.add_edge(edge.child, edge.parent, origin=edge.origin)
            copied_edge.support = edge.support
            copied_edge.provenance = list(edge.provenance)
        return dup

    def risk_phrases(self) -> dict[str, str]:
        """Non-root phrases for gazetteer construction: id -> label."""
        return {n.risk_type_id: n.label for n in self.nodes.values() if not n.is_root}


@dataclass(frozen=True)
class PatternHit:
    pattern_id: str
    doc_id: str
    sent_index: int
    hypernym: str
    hypernym_surface: str
    hyponyms: tuple[str, ...]
    hyponym_surfaces: tuple[str, ...]


def _find_literal(tokens_lower: Sequence[str], literal: Sequence[str]) -> list[int]:
    hits = []
    n, m = len(tokens_lower), len(literal)
    for i in range(n - m + 1):
        if all(tokens_lower[i + k] == literal[k] for k in range(m)):
            hits.append(i)
    return hits


def _phrase_run_forward(tokens: Sequence[str], start: int) -> int:
    """Length of the wordlike run starting at `start` (0 if none)."""
    i = start
    while i < len(tokens) and is_wordlike(tokens[i]):
        i += 1
    return i - start


def _phrase_run_backward(tokens: Sequence[str], end: int) -> int:
    """Length of the wordlike run ending just before `end`."""
    i = end
    while i > 0 and is_wordlike(tokens[i - 1]):
        i -= 1
    return end - i


def _parse_list_forward(tokens: Sequence[str], start: int) -> list[tuple[int, int]]:
    """Comma/conjunction-separated phrase spans starting at `start`."""
    spans: list[tuple[int, int]] = []
    i = start
    while len(spans) < MAX_LIST_PHRASES:
        run = _phrase_run_forward(tokens, i)
        if run == 0 or run > MAX_PHRASE_TOKENS:
            break
        spans.append((i, i + run))
        i += run
        # Peek at the separator; ", and" / ", or" collapse into one.
        if i < len(tokens) and tokens[i] == ",":
            i += 1
            if i < len(tokens) and tokens[i] in ("and", "or"):
                i += 1
        elif i < len(tokens) and tokens[i] in ("and", "or"):
            i += 1
        else:
            break
    return spans


def _parse_list_backward(tokens: Sequence[str], end: int) -> list[tuple[int, int]]:
    """Mirror of the forward parse, walking left from `end` (exclusive)."""
    spans: list[tuple[int, int]] = []
    i = end
    while len(spans) < MAX_LIST_PHRASES:
        run = _phrase_run_backward(tokens, i)
        if run == 0 or run > MAX_PHRASE_TOKENS:
            break
        spans.append((i - run, i))
        i -= run
        if i > 0 and tokens[i - 1] in ("and", "or"):
            i -= 1
            if i > 0 and tokens[i - 1] == ",":
                i -= 1
        elif i > 0 and tokens[i - 1] == ",":
            i -= 1
        else:
            break
    spans.reverse()
    return spans


def _hypernym_left(tokens: Sequence[str], end: int) -> tuple[int, int] | None:
    """Hypernym span ending just before `end`; last token must be risk(s)."""
    if end == 0 or tokens[end - 1] not in ("risk", "risks"):
        return None
    run = _phrase_run_backward(tokens, end)
    if run == 0:
        return None
    run = min(run, MAX_PHRASE_TOKENS)
    return (end - run, end)


def _hypernym_right(tokens: Sequence[str], start: int) -> tuple[int, int] | None:
    """Hypernym span starting at `start`, extending to the first risk(s)
    token within the phrase cap."""
    for k in range(min(MAX_PHRASE_TOKENS, len(tokens) - start)):
        tok = tokens[start + k]
        if not is_wordlike(tok):
            return None
        if tok in ("risk", "risks"):
            return (start, start + k + 1)
    return None


def scan_sentence(sentence: Sentence, patterns: Sequence[HearstPattern]) -> list[PatternHit]:
    lowers = sentence.lower_tokens
    surfaces = [t.surface for t in sentence.tokens]
    hits: list[PatternHit] = []
    for pattern in patterns:
        literal = pattern.literal_tokens
        for pos in _find_literal(lowers, literal):
            if pattern.direction == "hypernym-first":
                hyper = _hypernym_left(lowers, pos)
                spans = _parse_list_forward(lowers, pos + len(literal))
            else:
                hyper = _hypernym_right(lowers, pos + len(literal))
                spans = _parse_list_backward(lowers, pos)
            if hyper is None or not spans:
                continue
            h_lo, h_hi = hyper
            hits.append(PatternHit(
                pattern_id=pattern.pattern_id,
                doc_id=sentence.doc_id,
                sent_index=sentence.sent_index,
                hypernym=normalize_risk_phrase(" ".join(lowers[h_lo:h_hi])),
                hypernym_surface=" ".join(surfaces[h_lo:h_hi]),
                hyponyms=tuple(normalize_risk_phrase(" ".join(lowers[lo:hi]))
                               for lo, hi in spans),
                hyponym_surfaces=tuple(" ".join(surfaces[lo:hi]) for lo, hi in spans),
            ))
    return hits


def build_graph(hits: Iterable[PatternHit]) -> TaxonomyGraph:
    graph = TaxonomyGraph()
    for hit in hits:
        prov = (hit.doc_id, hit.sent_index, hit.pattern_id)
        graph.record_node_hit(hit.hypernym, hit.hypernym_surface, prov)
        if hit.hypernym != ROOT_ID:
            graph.add_edge(hit.hypernym, ROOT_ID, prov)
        for hypo, surface in zip(hit.hyponyms, hit.hyponym_surfaces):
            graph.record_node_hit(hypo, surface, prov)
            if hypo != hit.hypernym:
                graph.add_edge(hypo, hit.hypernym, prov)
    return graph


def mine_taxonomy(corpus: Corpus, patterns: Sequence[HearstPattern] | None = None,
                  min_support: int = 1) -> TaxonomyGraph:
    """Scan the corpus for pattern hits and assemble the IS-A graph.

    Non-root nodes with support below min_support are pruned along with
    their edges. An empty corpus yields a graph holding only the root.
    """
    if patterns is None:
        patterns = default_patterns()
    require(len(patterns) > 0, "patterns must be non-empty")
    require(min_support >= 1, "min_support must be >= 1")
    hits: list[PatternHit] = []
    for sentence in corpus.sentences():
        hits.extend(scan_sentence(sentence, patterns))
    graph = build_graph(hits)
    if min_support > 1:
        keep = {n for n, node in graph.nodes.items()
                if node.is_root or node.support >= min_support}
        pruned = TaxonomyGraph()
        for n in sorted(keep):
            node = graph.nodes[n]
            copied = pruned.ensure_node(n, node.label)
            copied.support = node.support
            copied.provenance = list(node.provenance)
        for (c, p), edge in graph.edges.items():
            if c in keep and p in keep:
                copied_edge = pruned.add_edge(c, p, origin=edge.origin)
                copied_edge.support = edge.support
                copied_edge.provenance = list(edge.provenance)
        return pruned
    return graph


def attach_orphans(graph: TaxonomyGraph) -> TaxonomyGraph:
    """Return a copy where every node reaches the root.

    Parentless nodes gain a direct edge to the root flagged
    "default-attachment". Cycles that cannot reach the root (every member
    has a parent inside the cycle) get their lexicographically smallest
    member attached, which keeps the result deterministic.
    """
    result = graph.copy()
    for orphan in result.orphans():
        result.add_edge(orphan, ROOT_ID, origin="default-attachment")
    while True:
        unreached = sorted(set(result.nodes) - result.reaches_root())
        if not unreached:
            return result
        result.add_edge(unreached[0], ROOT_ID, origin="default-attachment")


@dataclass(frozen=True)
class LookupResult:
    node: RiskType
    paths: tuple[tuple[str, ...], ...]  # ancestor chains, each ending at the root


def lookup(graph: TaxonomyGraph, phrase: str) -> LookupResult | None:
    """Find a node by normalized phrase and enumerate its root paths."""
    key = normalize_risk_phrase(phrase)
    node = graph.nodes.get(key)
    if node is None:
        return None
    if key == ROOT_ID:
        return LookupResult(node, ((),))
    paths: list[tuple[str, ...]] = []

    def walk(current: str, trail: tuple[str, ...]) -> None:
        for parent in graph.parents(current):
            if parent in trail or parent == current:
                continue
            if parent == ROOT_ID:
                paths.append(trail + (ROOT_ID,))
            else:
                walk(parent, trail + (parent,))

    walk(key, ())
    return LookupResult(node, tuple(sorted(set(paths))))


# ---------------------------------------------------------------------------
# Interchange formats
# ---------------------------------------------------------------------------


def export_edges(graph: TaxonomyGraph) -> str:
    out = io.StringIO()
    for (child, parent) in sorted(graph.edges):
        edge = graph.edges[(child, parent)]
        out.write(f"{child}\t{parent}\t{edge.support}\n")
    return out.getvalue()


def export_nodes(graph: TaxonomyGraph) -> str:
    out = io.StringIO()
    for node_id in sorted(graph.nodes):
        node = graph.nodes[node_id]
        out.write(json.dumps({
            "risk_type_id": node.risk_type_id,
            "label": node.label,
            "support": node.support,
            "root": node.is_root,
            "provenance": [list(p) for p in node.provenance],
        }, ensure_ascii=False) + "\n")
    return out.getvalue()


def export_dot(graph: TaxonomyGraph) -> str:
    lines = ["digraph risk_taxonomy {", '  rankdir="BT";']
    for node_id in sorted(graph.nodes):
        lines.append(f'  "{node_id}";')
    for (child, parent) in sorted(graph.edges):
        edge = graph.edges[(child, parent)]
        style = ' style="dashed"' if edge.origin == "default-attachment" else ""
        lines.append(f'  "{child}" -> "{parent}" [label="{edge.support}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_taxonomy(graph: TaxonomyGraph, directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "edges.tsv").write_text(export_edges(graph), encoding="utf-8")
    (directory / "nodes.jsonl").write_text(export_nodes(graph), encoding="utf-8")
    (directory / "taxonomy.dot").write_text(export_dot(graph), encoding="utf-8")


def load_taxonomy(directory: str | Path) -> TaxonomyGraph:
    directory = Path(directory)
    graph = TaxonomyGraph()
    nodes_path = directory / "nodes.jsonl"
    for line in nodes_path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        node = graph.ensure_node(record["risk_type_id"], record.get("label"))
        node.support = int(record.get("support", 0))
        node.provenance = [tuple(p) for p in record.get("provenance", [])]
    for line in (directory / "edges.tsv").read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        child, parent, support = line.split("\t")
        graph.add_edge(child, parent, support=int(support))
    return graph


class TaxonomyMiner(BaseEstimator):
    """Estimator-style wrapper: fit(corpus) mines and roots the taxonomy."""

    def __init__(self, patterns: Sequence[HearstPattern] | None = None,
                 min_support: int = 1):
        self.patterns = patterns
        self.min_support = min_support

    def fit(self, X: Corpus, y=None) -> "TaxonomyMiner":
        self.graph_ = attach_orphans(
            mine_taxonomy(X, patterns=self.patterns, min_support=self.min_support))
        return self

    def lookup(self, phrase: str) -> LookupResult | None:
        check_fitted(self, "graph_")
        return lookup(self.graph_, phrase)
