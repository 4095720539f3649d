"""Bundled demonstration fixtures.

A small synthetic news archive wired so the full pipeline produces the
documented walkthrough results: a planted taxonomy corpus, the Acme Inc.
mention stream (office fire 1, cash-flow 2, copyright litigation 1, demand
14, plus two false-positive decoys), the five-company portfolio grid, the
canonical Microsoft fine/feel-fine sentence pair, a 400-example labeled
training set, and the factory-to-brand supply chain with its reputation
transformation rule.

Everything here is deterministic; tests and the demo store build on it.
"""

from __future__ import annotations

import random
from datetime import date, datetime, timedelta, timezone
from functools import lru_cache

from .corpus import Corpus, Document, segment
from .ecosystem import Portfolio, SupplyChainGraph
from .register import PlanRule, RiskEntry, RiskRegister
from .relation import LABEL_NEGATIVE, LABEL_POSITIVE, LabeledExample
from .tagger import CandidatePair, CompanyEntity, build_gazetteer, extract_candidates
from .taxonomy import TaxonomyGraph, attach_orphans, mine_taxonomy

_UTC = timezone.utc

PAPER_SENTENCE_A = "Microsoft are facing a fine, said Bill Gates."
PAPER_SENTENCE_B = "I feel fine, said Microsoft's Bill Gates."

FIG4_ENTITY = "acme"
FIG4_EXPECTED_COUNTS = {
    "office fire risk": 1,
    "cash-flow risk": 2,
    "copyright litigation risk": 1,
    "demand risk": 14,
}

FIG9_REGISTERS = {
    "comp-a": {"type-b risk", "type-j risk"},
    "comp-b": {"type-a risk", "type-b risk"},
    "comp-c": {"type-c risk", "type-j risk"},
    "comp-d": {"type-d risk"},
    "comp-e": {"type-a risk", "type-k risk"},
}

# Sentences planted so taxonomy mining yields every risk type the demo
# needs; none of them mention a company.
_TAXONOMY_SENTENCES = [
    "Small publishers are exposed to operational risks such as office fire risk and supply disruption.",
    "Analysts warned of financial risks such as cash-flow risk, currency devaluation, fraud and bankruptcy.",
    "The report pointed at legal risks like fine, lawsuit, copyright litigation risk and defamation.",
    "Retailers worry about market risks including demand risk and pricing pressure.",
    "Strikes, lockouts or other labor risks disrupted production.",
    "Manufacturers are braced for industrial risks such as strike, product recall, data breach and outage.",
    "Funds screen for portfolio risks such as type-a risk, type-b risk, type-c risk and type-d risk.",
    "Funds are wary of exposure risks such as type-j risk and type-k risk.",
]

_POSITIVE_TEMPLATES = [
    "{company} are facing a {risk}, said {person}.",
    "{company} is facing {risk}.",
    "{company} faces {risk} this quarter.",
    "{company} was hit by {risk} last month.",
    "{company} warned of {risk} in its annual report.",
    "Analysts said {company} is exposed to {risk}.",
]

_NEGATIVE_TEMPLATES = [
    "I feel {risk}, said {company}'s {role}.",
    "The {risk} at a rival firm did not affect {company}, said {person}.",
    "A {risk} elsewhere was no concern for {company}, said {person}.",
    "{risk}, said {company}'s {role}, was not a topic.",
]

_TRAINING_COMPANIES = [
    ("fx-techcorp", "TechCorp"),
    ("fx-globex", "Globex"),
    ("fx-initech", "Initech"),
    ("fx-umbrella", "Umbrella Corp"),
    ("fx-stark", "Stark Industries"),
    ("fx-wayne", "Wayne Enterprises"),
    ("fx-hooli", "Hooli"),
    ("fx-vandelay", "Vandelay Industries"),
]

_TRAINING_RISKS = [
    "fine", "strike", "lawsuit", "product recall",
    "data breach", "outage", "fraud", "bankruptcy",
]

_PERSONS = ["John Smith", "Mary Jones", "Ada Park", "Lee Wong"]
_ROLES = ["spokesman", "founder", "chairman", "counsel"]


def _doc(doc_id: str, text: str, day: date, source: str = "fixture-wire") -> Document:
    published = datetime(day.year, day.month, day.day, 9, 0, tzinfo=_UTC)
    return Document(doc_id=doc_id, source=source, published_at=published, text=text)


def taxonomy_documents() -> list[Document]:
    base = date(2014, 6, 1)
    return [
        _doc(f"tax-{i:02d}", text, base + timedelta(days=i))
        for i, text in enumerate(_TAXONOMY_SENTENCES)
    ]


def _fig4_documents() -> list[Document]:
    docs: list[Document] = []
    rows: list[tuple[str, date]] = [
        ("Acme is facing office fire risk.", date(2015, 1, 5)),
        ("Acme warned of cash-flow risk in its annual report.", date(2015, 1, 10)),
        ("Acme was hit by cash-flow risk last month.", date(2015, 2, 20)),
        ("Analysts said Acme is exposed to copyright litigation risk.", date(2015, 3, 1)),
    ]
    demand_templates = [
        "Acme is facing demand risk.",
        "Acme faces demand risk this quarter.",
        "Acme warned of demand risk in its annual report.",
        "Analysts said Acme is exposed to demand risk.",
        "Acme was hit by demand risk last month.",
    ]
    for i in range(14):
        rows.append((demand_templates[i % len(demand_templates)],
                     date(2015, 1, 15) + timedelta(days=7 * i)))
    # Two false-positive decoys the classifier must reject.
    rows.append(("I feel fine, said Acme's spokesman.", date(2015, 2, 1)))
    rows.append(("fine, said Acme's founder, was not a topic.", date(2015, 2, 2)))
    for i, (text, day) in enumerate(rows):
        docs.append(_doc(f"acme-{i:02d}", text, day))
    return docs


def _fig9_documents() -> list[Document]:
    docs = []
    i = 0
    for entity_id in sorted(FIG9_REGISTERS):
        name = demo_entity_name(entity_id)
        for risk in sorted(FIG9_REGISTERS[entity_id]):
            docs.append(_doc(f"folio-{i:02d}", f"{name} is facing {risk}.",
                             date(2015, 5, 1) + timedelta(days=i)))
            i += 1
    return docs


def _paper_documents() -> list[Document]:
    return [
        _doc("paper-a", PAPER_SENTENCE_A, date(2015, 4, 1)),
        _doc("paper-b", PAPER_SENTENCE_B, date(2015, 4, 2)),
    ]


def demo_entity_name(entity_id: str) -> str:
    return {
        "acme": "Acme Inc.",
        "microsoft": "Microsoft",
        "comp-a": "Company A",
        "comp-b": "Company B",
        "comp-c": "Company C",
        "comp-d": "Company D",
        "comp-e": "Company E",
    }[entity_id]


def demo_entities() -> list[CompanyEntity]:
    entities = [
        CompanyEntity("acme", "Acme Inc.", frozenset({"Acme"})),
        CompanyEntity("microsoft", "Microsoft"),
    ]
    for suffix in "abcde":
        entity_id = f"comp-{suffix}"
        entities.append(CompanyEntity(entity_id, demo_entity_name(entity_id)))
    return entities


@lru_cache(maxsize=1)
def demo_corpus() -> Corpus:
    corpus = Corpus()
    for doc in (taxonomy_documents() + _fig4_documents()
                + _fig9_documents() + _paper_documents()):
        corpus.add(doc)
    return corpus


@lru_cache(maxsize=1)
def demo_taxonomy() -> TaxonomyGraph:
    return attach_orphans(mine_taxonomy(demo_corpus()))


def paper_pairs() -> tuple[CandidatePair, CandidatePair]:
    """The canonical (Microsoft, fine) pair from each paper sentence."""
    gazetteer = build_gazetteer(demo_entities(), demo_taxonomy())
    corpus = Corpus()
    for doc in _paper_documents():
        corpus.add(doc)
    pairs = extract_candidates(corpus, gazetteer)
    by_doc = {p.doc_id: p for p in pairs}
    return by_doc["paper-a"], by_doc["paper-b"]


def training_entities() -> list[CompanyEntity]:
    return [CompanyEntity(eid, name) for eid, name in _TRAINING_COMPANIES]


@lru_cache(maxsize=1)
def labeled_examples() -> tuple[LabeledExample, ...]:
    """400 deterministic labeled pairs, half risk-exposure contexts and
    half quoted-speech / elsewhere false positives.

    Sentences are generated from templates over fixture companies and the
    demo taxonomy's risk phrases, then run through the real tagger so the
    spans are exactly what the pipeline would produce. The two paper
    sentences themselves are never included.
    """
    rng = random.Random(42)
    combos_pos = [(c, r, t) for c, _ in _TRAINING_COMPANIES
                  for r in _TRAINING_RISKS for t in range(len(_POSITIVE_TEMPLATES))]
    combos_neg = [(c, r, t) for c, _ in _TRAINING_COMPANIES
                  for r in _TRAINING_RISKS for t in range(len(_NEGATIVE_TEMPLATES))]
    picks = ([(combo, LABEL_POSITIVE) for combo in rng.sample(combos_pos, 200)]
             + [(combo, LABEL_NEGATIVE) for combo in rng.sample(combos_neg, 200)])
    rng.shuffle(picks)

    names = dict(_TRAINING_COMPANIES)
    corpus = Corpus()
    labels: dict[str, str] = {}
    base = date(2014, 1, 1)
    for i, ((entity_id, risk, template_idx), label) in enumerate(picks):
        templates = _POSITIVE_TEMPLATES if label == LABEL_POSITIVE else _NEGATIVE_TEMPLATES
        text = templates[template_idx].format(
            company=names[entity_id], risk=risk,
            person=_PERSONS[rng.randrange(len(_PERSONS))],
            role=_ROLES[rng.randrange(len(_ROLES))])
        doc_id = f"train-{i:04d}"
        corpus.add(_doc(doc_id, text, base + timedelta(days=i), source="fixture-training"))
        labels[doc_id] = label

    gazetteer = build_gazetteer(training_entities(), demo_taxonomy())
    pairs = extract_candidates(corpus, gazetteer)
    by_doc: dict[str, list[CandidatePair]] = {}
    for pair in pairs:
        by_doc.setdefault(pair.doc_id, []).append(pair)
    examples: list[LabeledExample] = []
    labeled_at = datetime(2015, 6, 1, tzinfo=_UTC)
    for doc_id in sorted(labels):
        doc_pairs = by_doc.get(doc_id, [])
        if len(doc_pairs) != 1:
            raise RuntimeError(
                f"fixture doc {doc_id} produced {len(doc_pairs)} pairs; "
                "template vocabulary collided with the gazetteer")
        examples.append(LabeledExample(
            pair=doc_pairs[0], label=labels[doc_id],
            annotator="fixture", labeled_at=labeled_at))
    return tuple(examples)


def fig4_candidate_pairs() -> list[CandidatePair]:
    """Candidate stream for the Acme register walkthrough (decoys included)."""
    gazetteer = build_gazetteer(demo_entities(), demo_taxonomy())
    corpus = Corpus()
    for doc in _fig4_documents():
        corpus.add(doc)
    return extract_candidates(corpus, gazetteer)


def fig5_rules() -> list[PlanRule]:
    return [
        PlanRule("office fire risk", "TRANSFER", "buy fire insurance"),
        PlanRule("cash-flow risk", "MITIGATE", "apply for credit line"),
        PlanRule("copyright litigation risk", "MITIGATE", "submit manuscripts to plagiarism checker"),
        PlanRule("demand risk", "ACCEPT", "do nothing"),
    ]


def simple_register(entity_id: str, risk_types: set[str],
                    seen: date = date(2015, 1, 1)) -> RiskRegister:
    """Hand-built register for graph/portfolio fixtures."""
    entries = {
        risk_type: RiskEntry(
            risk_type=risk_type, mention_count=1, first_seen=seen, last_seen=seen,
            provenance=(f"fixture-{entity_id}-{i}",))
        for i, risk_type in enumerate(sorted(risk_types))
    }
    return RiskRegister(entity_id=entity_id, entries=entries,
                        as_of=seen if entries else None)


def fig7_graph() -> SupplyChainGraph:
    graph = SupplyChainGraph()
    graph.add_edge("factory", "brand", 1.0,
                   {"human rights violation risk": "reputation risk"})
    return graph


def fig7_registers() -> dict[str, RiskRegister]:
    return {
        "factory": simple_register("factory", {"human rights violation risk"}),
        "brand": simple_register("brand", set()),
    }


def fig9_portfolio() -> Portfolio:
    return Portfolio("fig9", tuple(sorted(FIG9_REGISTERS)))


def fig9_registers() -> dict[str, RiskRegister]:
    return {entity_id: simple_register(entity_id, types)
            for entity_id, types in FIG9_REGISTERS.items()}


def sentence_texts(doc: Document) -> list[str]:
    return [s.text for s in segment(doc)]
