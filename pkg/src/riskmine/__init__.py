"""riskmine: computer-supported risk identification from text.

Pipeline: ingest trusted prose -> mine a risk-type taxonomy via lexical
IS-A patterns -> tag company and risk mentions -> classify candidate pairs
-> aggregate vetted mentions into per-entity risk registers -> analyze
registers across supply chains and portfolios. Analyst judgments loop back
into classifier retraining through the gateway service.
"""

from .corpus import Corpus, Document, Sentence, Token, ingest, segment, tokenize
from .dynprob import UNDEFINED, EventUniverse
from .ecosystem import (Portfolio, PropagatedEntry, SupplyChainGraph,
                        portfolio_overlap, propagate, single_point_of_failure)
from .register import (GoldPool, ManagementPlan, RiskEntry, RiskRegister,
                       aggregate, currency, evaluate_pooled, make_plan,
                       merge_registers, qualitative_view, surprise_score)
from .relation import (LabeledExample, RelationClassifier, RelationModel,
                       RiskMention, classify, featurize, incorporate_judgments,
                       train)
from .tagger import (CandidatePair, CompanyEntity, Gazetteer, MentionSpan,
                     MentionTagger, build_gazetteer, pair_candidates, tag)
from .taxonomy import (HearstPattern, RiskType, TaxonomyGraph, TaxonomyMiner,
                       attach_orphans, lookup, mine_taxonomy,
                       normalize_risk_phrase)

__version__ = "0.1.0"

__all__ = [
    "Corpus", "Document", "Sentence", "Token", "ingest", "segment", "tokenize",
    "HearstPattern", "RiskType", "TaxonomyGraph", "TaxonomyMiner",
    "mine_taxonomy", "attach_orphans", "lookup", "normalize_risk_phrase",
    "CompanyEntity", "MentionSpan", "CandidatePair", "Gazetteer",
    "MentionTagger", "build_gazetteer", "tag", "pair_candidates",
    "LabeledExample", "RelationClassifier", "RelationModel", "RiskMention",
    "featurize", "train", "classify", "incorporate_judgments",
    "RiskEntry", "RiskRegister", "ManagementPlan", "GoldPool", "aggregate",
    "merge_registers", "qualitative_view", "surprise_score", "evaluate_pooled",
    "currency", "make_plan",
    "SupplyChainGraph", "PropagatedEntry", "Portfolio", "propagate",
    "single_point_of_failure", "portfolio_overlap",
    "EventUniverse", "UNDEFINED",
    "__version__",
]
