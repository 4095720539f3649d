"""Independent brute-force oracles.

Each oracle re-derives an expected result through a different mechanism
than the implementation under test: regex scanning instead of token-trie
walks, exhaustive permutation enumeration instead of DFS, plain set
arithmetic instead of the metrics code. They share only data constants
(pattern templates, boundary-word list) with the package.
"""

from __future__ import annotations

import itertools
import re
from collections import Counter

from riskmine.corpus import Corpus
from riskmine.taxonomy import (BOUNDARY_WORDS, MAX_LIST_PHRASES,
                               MAX_PHRASE_TOKENS, ROOT_ID,
                               normalize_risk_phrase)

# ---------------------------------------------------------------------------
# Taxonomy: regex scan over normalized (space-joined, lowercased) sentences
# ---------------------------------------------------------------------------

_BOUND = "|".join(sorted(re.escape(w) for w in BOUNDARY_WORDS))
_W = rf"(?:(?!(?:{_BOUND})(?= |$))[a-z0-9][a-z0-9'&.\-]*)"
# W restricted for hypernym-right extraction: stop at the first risk token.
_W_NORISK = rf"(?:(?!risks?(?= |$))(?!(?:{_BOUND})(?= |$))[a-z0-9][a-z0-9'&.\-]*)"
# A phrase: 1..4 wordlike tokens, not followed by yet another wordlike token.
_P = rf"{_W}(?: {_W}){{0,{MAX_PHRASE_TOKENS - 1}}}(?! {_W})"
_SEP = r"(?: , and | , or | , | and | or )"
_SEP_REV = r"(?: and , | or , | , | and | or )"
_P_LIST = rf"{_P}(?:{_SEP}{_P}){{0,{MAX_LIST_PHRASES - 1}}}"
_P_LIST_REV = rf"{_P}(?:{_SEP_REV}{_P}){{0,{MAX_LIST_PHRASES - 1}}}"

def _reverse_tokens(text: str) -> str:
    return " ".join(reversed(text.split(" ")))


def _split_list(list_text: str) -> list[str]:
    return [p.strip() for p in re.split(_SEP, list_text) if p.strip()]


def _hypernym_before(prefix: str) -> str | None:
    """Longest <=4-token wordlike suffix of `prefix` ending in risk/risks."""
    if not prefix:
        return None
    reversed_prefix = _reverse_tokens(prefix)
    m = re.match(rf"risks?((?: {_W}){{0,{MAX_PHRASE_TOKENS - 1}}})(?= |$)", reversed_prefix)
    if m is None:
        return None
    return _reverse_tokens(reversed_prefix[:m.end()])


def _hypernym_after(suffix: str) -> str | None:
    m = re.match(rf"(?:{_W_NORISK} ){{0,{MAX_PHRASE_TOKENS - 1}}}risks?(?= |$)", suffix)
    if m is None:
        return None
    return suffix[:m.end()]


def _list_after(suffix: str) -> list[str]:
    m = re.match(_P_LIST, suffix)
    if m is None:
        return []
    return _split_list(m.group(0))


def _list_before(prefix: str) -> list[str]:
    if not prefix:
        return []
    m = re.search(rf"^{_P_LIST_REV}", _reverse_tokens(prefix))
    if m is None:
        return []
    phrases = [p for p in re.split(_SEP_REV, f" {m.group(0)} ") if p.strip()]
    return [_reverse_tokens(p.strip()) for p in reversed(phrases)]


def regex_scan_taxonomy(corpus: Corpus, min_support: int = 1
                        ) -> tuple[dict[str, int], dict[tuple[str, str], int]]:
    """Node and edge support counts per the default pattern inventory."""
    literals_h_first = ["such as", "including", "like"]
    literals_l_first = ["and other", "or other"]
    nodes: Counter[str] = Counter()
    edges: Counter[tuple[str, str]] = Counter()

    def record(hyper: str, hypos: list[str]) -> None:
        h = normalize_risk_phrase(hyper)
        nodes[h] += 1
        if h != ROOT_ID:
            edges[(h, ROOT_ID)] += 1
        for hypo in hypos:
            x = normalize_risk_phrase(hypo)
            nodes[x] += 1
            if x != h:
                edges[(x, h)] += 1

    for sentence in corpus.sentences():
        text = " ".join(sentence.lower_tokens)
        for literal in literals_h_first:
            for m in re.finditer(rf"(?<![^ ]){re.escape(literal)}(?![^ ])", text):
                hyper = _hypernym_before(text[:m.start()].rstrip())
                hypos = _list_after(text[m.end():].lstrip())
                if hyper and hypos:
                    record(hyper, hypos)
        for literal in literals_l_first:
            for m in re.finditer(rf"(?<![^ ]){re.escape(literal)}(?![^ ])", text):
                hyper = _hypernym_after(text[m.end():].lstrip())
                hypos = _list_before(text[:m.start()].rstrip())
                if hyper and hypos:
                    record(hyper, hypos)

    if min_support > 1:
        nodes = Counter({n: c for n, c in nodes.items()
                         if c >= min_support or n == ROOT_ID})
        edges = Counter({(c, p): k for (c, p), k in edges.items()
                         if c in nodes and p in nodes})
    return dict(nodes), dict(edges)


def graph_counts(graph) -> tuple[dict[str, int], dict[tuple[str, str], int]]:
    """Support counts of a mined TaxonomyGraph, shaped like the oracle's."""
    nodes = {n: node.support for n, node in graph.nodes.items() if node.support > 0}
    edges = {key: edge.support for key, edge in graph.edges.items() if edge.support > 0}
    return nodes, edges


# ---------------------------------------------------------------------------
# Propagation: exhaustive simple-path enumeration via permutations
# ---------------------------------------------------------------------------


def enumerate_propagation(nodes, edges, registers, max_hops
                          ) -> set[tuple[str, str, str, int, tuple[str, ...]]]:
    """All (target, origin, risk_type, hops, path) tuples for lambda=1,
    rule-free graphs, by checking every node permutation of every length."""
    edge_set = set(edges)
    expected = set()
    node_list = sorted(nodes)
    for length in range(2, min(max_hops + 1, len(node_list)) + 1):
        for path in itertools.permutations(node_list, length):
            if all((a, b) in edge_set for a, b in zip(path, path[1:])):
                origin, target = path[0], path[-1]
                for risk_type in registers.get(origin, set()):
                    expected.add((target, origin, risk_type, length - 1, path))
    return expected


# ---------------------------------------------------------------------------
# Pooled evaluation: plain set arithmetic
# ---------------------------------------------------------------------------


def set_metrics(system: set[str], correct: set[str]) -> tuple[float, float, float]:
    hits = len(system & correct)
    precision = hits / len(system) if system else 1.0
    recall = hits / len(correct) if correct else 0.0
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return precision, recall, f1
