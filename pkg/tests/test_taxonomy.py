from __future__ import annotations

import random
from datetime import datetime, timezone

import pytest

from riskmine.corpus import Corpus, Document
from riskmine.taxonomy import (ROOT_ID, HearstPattern, TaxonomyGraph,
                               TaxonomyMiner, attach_orphans, default_patterns,
                               export_dot, load_taxonomy, lookup, mine_taxonomy,
                               normalize_risk_phrase, parse_pattern_file,
                               write_taxonomy)

from oracles import graph_counts, regex_scan_taxonomy

UTC = timezone.utc


def corpus_of(*texts: str) -> Corpus:
    corpus = Corpus()
    for i, text in enumerate(texts):
        corpus.add(Document(doc_id=f"d{i:03d}", source="t",
                            published_at=datetime(2015, 1, 1, tzinfo=UTC), text=text))
    return corpus


# ---------------------------------------------------------------------------
# Synthetic corpus generator (shared with the acceptance suite)
# ---------------------------------------------------------------------------

_ADJECTIVES = ["operational", "financial", "legal", "cyber", "political",
               "environmental", "strategic", "regulatory", "seismic", "reputational"]
_NOUNS = ["strike", "flood", "recall", "outage", "fraud", "downturn", "lawsuit",
          "boycott", "embargo", "blackout", "shortage", "data breach",
          "supply disruption", "currency devaluation", "price war",
          "cyber attack", "civil unrest", "margin squeeze"]
_DISTRACTORS = [
    "The quarterly report was published on schedule.",
    "Revenue grew despite persistent headwinds.",
    "Benefits such as growth and expansion were cited by managers.",
    "Nothing else happened on that day.",
    "Their flagship product such shipped late.",
    "He likes coffee and other beverages in the morning.",
    "Directors discussed strategy over dinner.",
]
_PATTERN_TEMPLATES = [
    "Companies are exposed to {adj} risks such as {lst}.",
    "Analysts warned of {adj} risks including {lst}.",
    "Funds worry about {adj} risks like {lst}.",
    "{lst} and other {adj} risks hit the sector.",
    "{lst} or other {adj} risks were cited in filings.",
]


def synthetic_hearst_corpus(n_sentences: int, seed: int = 7) -> Corpus:
    rng = random.Random(seed)
    corpus = Corpus()
    for i in range(n_sentences):
        if rng.random() < 0.45:
            template = rng.choice(_PATTERN_TEMPLATES)
            phrases = rng.sample(_NOUNS, rng.randint(1, 4))
            if len(phrases) == 1:
                lst = phrases[0]
            else:
                joiner = rng.choice([" and ", " or "])
                lst = ", ".join(phrases[:-1]) + joiner + phrases[-1]
            text = template.format(adj=rng.choice(_ADJECTIVES), lst=lst)
        else:
            text = rng.choice(_DISTRACTORS)
        corpus.add(Document(doc_id=f"s{i:05d}", source="synthetic",
                            published_at=datetime(2015, 1, 1, tzinfo=UTC), text=text))
    return corpus


# ---------------------------------------------------------------------------
# Pattern plumbing
# ---------------------------------------------------------------------------


class TestPatterns:
    def test_default_inventory(self):
        patterns = default_patterns()
        assert len(patterns) == 5
        assert {p.direction for p in patterns} == {"hypernym-first", "hyponym-first"}

    def test_direction_must_match_slot_order(self):
        with pytest.raises(ValueError, match="contradicts slot order"):
            HearstPattern("bad", "<H> such as <L>", "hyponym-first")

    def test_needs_two_slots(self):
        with pytest.raises(ValueError):
            HearstPattern("bad", "<H> such as", "hypernym-first")

    def test_needs_literal_separator(self):
        with pytest.raises(ValueError, match="literal"):
            HearstPattern("bad", "<H> <L>", "hypernym-first")

    def test_parse_pattern_file(self):
        lines = ["<H> such as <L>\thypernym-first", "", "# comment",
                 "<L> and other <H>\thyponym-first"]
        patterns = parse_pattern_file(lines)
        assert [p.pattern_id for p in patterns] == ["such_as", "and_other"]

    def test_parse_pattern_file_rejects_bad_line(self):
        with pytest.raises(ValueError, match="line 1"):
            parse_pattern_file(["no tab here"])


class TestNormalize:
    def test_lowercase_collapse_determiners_plural(self):
        assert normalize_risk_phrase("The  Financial   Risks") == "financial risk"

    def test_plain_word_untouched(self):
        assert normalize_risk_phrase("Bankruptcy") == "bankruptcy"

    def test_non_risk_plural_kept(self):
        assert normalize_risk_phrase("strikes") == "strikes"


# ---------------------------------------------------------------------------
# Mining
# ---------------------------------------------------------------------------


class TestMineTaxonomy:
    def test_paper_example_sentence(self):
        corpus = corpus_of(
            "Banks are exposed to financial risks such as bankruptcy, "
            "currency devaluation and fraud.")
        graph = mine_taxonomy(corpus)
        expected = {
            ("bankruptcy", "financial risk"),
            ("currency devaluation", "financial risk"),
            ("fraud", "financial risk"),
            ("financial risk", ROOT_ID),
        }
        assert set(graph.edges) == expected

    def test_empty_corpus_root_only(self):
        graph = mine_taxonomy(Corpus())
        assert set(graph.nodes) == {ROOT_ID}
        assert graph.edges == {}

    def test_planted_corpus_matches_regex_oracle(self):
        corpus = synthetic_hearst_corpus(120, seed=3)
        graph = mine_taxonomy(corpus)
        assert graph_counts(graph) == regex_scan_taxonomy(corpus)

    def test_min_support_prunes_nodes_and_edges(self):
        corpus = corpus_of(
            "Firms face exposure to legal risks such as lawsuit and fraud.",
            "Firms face exposure to legal risks such as lawsuit.",
        )
        graph = mine_taxonomy(corpus, min_support=2)
        assert "lawsuit" in graph.nodes
        assert "fraud" not in graph.nodes
        assert ("fraud", "legal risk") not in graph.edges
        assert graph.nodes["lawsuit"].support == 2

    def test_provenance_records_doc_and_sentence(self):
        corpus = corpus_of("Shops are wary of seasonal risks such as flood.")
        graph = mine_taxonomy(corpus)
        assert graph.nodes["flood"].provenance == [("d000", 0, "such_as")]

    def test_support_equals_provenance_count(self):
        corpus = synthetic_hearst_corpus(80, seed=11)
        graph = mine_taxonomy(corpus)
        for node in graph.nodes.values():
            if node.risk_type_id != ROOT_ID:
                assert node.support == len(node.provenance) >= 1
        for edge in graph.edges.values():
            assert edge.support == len(edge.provenance)

    def test_monotonicity_supports_only_grow(self):
        small = synthetic_hearst_corpus(60, seed=5)
        grown = synthetic_hearst_corpus(120, seed=5)  # same prefix by construction
        g_small = mine_taxonomy(small)
        g_grown = mine_taxonomy(grown)
        for node_id, node in g_small.nodes.items():
            assert node_id in g_grown.nodes
            assert g_grown.nodes[node_id].support >= node.support
        for key, edge in g_small.edges.items():
            assert key in g_grown.edges
            assert g_grown.edges[key].support >= edge.support

    def test_same_edge_from_two_patterns_sums(self):
        corpus = corpus_of(
            "Miners spoke of labor risks such as strike.",
            "Miners spoke of labor risks including strike.",
        )
        graph = mine_taxonomy(corpus)
        assert graph.edges[("strike", "labor risk")].support == 2
        assert graph.nodes["strike"].support == 2

    def test_requires_patterns_and_support(self):
        with pytest.raises(ValueError):
            mine_taxonomy(Corpus(), patterns=[])
        with pytest.raises(ValueError):
            mine_taxonomy(Corpus(), min_support=0)

    def test_determinism(self):
        corpus = synthetic_hearst_corpus(100, seed=2)
        a = graph_counts(mine_taxonomy(corpus))
        b = graph_counts(mine_taxonomy(corpus))
        assert a == b


class TestAttachOrphans:
    def test_isolated_node_gains_default_edge(self):
        graph = TaxonomyGraph()
        graph.ensure_node("strike")
        fixed = attach_orphans(graph)
        edge = fixed.edges[("strike", ROOT_ID)]
        assert edge.origin == "default-attachment"

    def test_rooted_graph_unchanged(self):
        graph = TaxonomyGraph()
        graph.add_edge("strike", ROOT_ID, ("d", 0, "p"))
        fixed = attach_orphans(graph)
        assert set(fixed.edges) == set(graph.edges)
        assert fixed.edges[("strike", ROOT_ID)].origin == "pattern"

    def test_chain_only_orphan_end_attached(self):
        graph = TaxonomyGraph()
        graph.add_edge("a", "b", ("d", 0, "p"))
        fixed = attach_orphans(graph)
        assert ("b", ROOT_ID) in fixed.edges
        assert ("a", ROOT_ID) not in fixed.edges

    def test_cycle_island_reaches_root(self):
        graph = TaxonomyGraph()
        graph.add_edge("a", "b", ("d", 0, "p"))
        graph.add_edge("b", "a", ("d", 1, "p"))
        fixed = attach_orphans(graph)
        assert set(fixed.nodes) == fixed.reaches_root()

    def test_idempotent(self):
        graph = TaxonomyGraph()
        graph.ensure_node("solo")
        once = attach_orphans(graph)
        twice = attach_orphans(once)
        assert set(twice.edges) == set(once.edges)

    def test_mined_graph_fully_rooted(self):
        corpus = synthetic_hearst_corpus(150, seed=13)
        graph = attach_orphans(mine_taxonomy(corpus))
        assert set(graph.nodes) == graph.reaches_root()


class TestLookup:
    @pytest.fixture()
    def fixture_graph(self):
        corpus = corpus_of(
            "Banks are exposed to financial risks such as bankruptcy, "
            "currency devaluation and fraud.")
        return mine_taxonomy(corpus)

    def test_capitalized_phrase_finds_path(self, fixture_graph):
        result = lookup(fixture_graph, "Bankruptcy")
        assert result is not None
        assert result.node.risk_type_id == "bankruptcy"
        assert result.paths == (("financial risk", ROOT_ID),)

    def test_root_has_empty_path(self, fixture_graph):
        result = lookup(fixture_graph, "risk")
        assert result.node.risk_type_id == ROOT_ID
        assert result.paths == ((),)

    def test_miss_returns_none(self, fixture_graph):
        assert lookup(fixture_graph, "unicorn stampede") is None

    def test_multiple_parents_give_multiple_paths(self):
        graph = TaxonomyGraph()
        graph.add_edge("flood", "weather risk", ("d", 0, "p"))
        graph.add_edge("flood", "supply risk", ("d", 1, "p"))
        graph.add_edge("weather risk", ROOT_ID, ("d", 0, "p"))
        graph.add_edge("supply risk", ROOT_ID, ("d", 1, "p"))
        result = lookup(graph, "flood")
        assert result.paths == (("supply risk", ROOT_ID), ("weather risk", ROOT_ID))


class TestInterchange:
    def test_write_and_load_round_trip(self, tmp_path):
        corpus = synthetic_hearst_corpus(60, seed=17)
        graph = attach_orphans(mine_taxonomy(corpus))
        write_taxonomy(graph, tmp_path)
        loaded = load_taxonomy(tmp_path)
        assert set(loaded.nodes) == set(graph.nodes)
        assert {k: e.support for k, e in loaded.edges.items()} \
            == {k: e.support for k, e in graph.edges.items()}
        for node_id, node in graph.nodes.items():
            assert loaded.nodes[node_id].support == node.support

    def test_dot_render_contains_edges(self):
        corpus = corpus_of("Shops are wary of seasonal risks such as flood.")
        dot = export_dot(mine_taxonomy(corpus))
        assert dot.startswith("digraph")
        assert '"flood" -> "seasonal risk"' in dot


def test_miner_estimator_wrapper():
    corpus = synthetic_hearst_corpus(40, seed=23)
    miner = TaxonomyMiner(min_support=1)
    assert miner.get_params()["min_support"] == 1
    miner.fit(corpus)
    assert set(miner.graph_.nodes) == miner.graph_.reaches_root()
    hit = miner.lookup(sorted(miner.graph_.nodes)[0])
    assert hit is not None
