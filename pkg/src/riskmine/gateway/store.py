"""File-backed store behind the review service.

Layout inside the store directory:

    config.json       module defaults, overridable
    documents.jsonl   corpus (line-delimited document records)
    entities.tsv      company gazetteer input
    rules.tsv         management-plan rules (optional)
    portfolios.tsv    portfolio definitions (optional)
    examples.jsonl    labeled training examples, append-only
    judgments.log     judgment audit log, append-only
    mentions.jsonl    classified-candidate snapshot (compacted on retrain)
    models/           model_v<N>.tsv, every version retained

The taxonomy is re-mined from the corpus at load time (mining is
deterministic, so this is cheap fidelity). Registers are computed on demand
from the current mentions, so a judgment posted a second ago is reflected
in the next register read. Retraining swaps the model atomically: readers
see the old version until the new one is fully built.
"""

from __future__ import annotations

import json
import logging
import os
import threading
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

from ..corpus import Corpus, load_corpus, parse_timestamp
from ..ecosystem import Portfolio, OverlapResult, parse_portfolio_file, portfolio_overlap
from ..register import (GoldPool, ManagementPlan, RiskRegister, aggregate,
                        make_plan, mention_stats, parse_pool_file,
                        parse_rules_file, surprise_score)
from ..relation import (JUDGMENT_CORRECT, JUDGMENT_INCORRECT, JUDGMENT_UNREVIEWED,
                        LABEL_NEGATIVE, LABEL_POSITIVE, LabeledExample,
                        RelationModel, RiskMention, classify, dump_examples,
                        incorporate_judgments, load_examples, load_model,
                        mention_from_dict, mention_to_dict, save_model, train)
from ..tagger import CompanyEntity, build_gazetteer, extract_candidates, parse_entity_file
from ..taxonomy import TaxonomyGraph, attach_orphans, mine_taxonomy
from ..validation import require
from .config import Config

logger = logging.getLogger(__name__)

_UTC = timezone.utc


class UnknownPairError(KeyError):
    pass


class NothingToRetrainError(RuntimeError):
    pass


@dataclass(frozen=True)
class JudgmentRecord:
    pair_id: str
    judgment: str  # CORRECT | INCORRECT
    annotator: str
    judged_at: datetime
    model_version_at_judgment: int

    def __post_init__(self) -> None:
        require(self.judgment in (JUDGMENT_CORRECT, JUDGMENT_INCORRECT),
                f"judgment must be CORRECT or INCORRECT, got {self.judgment!r}")
        require(bool(self.annotator), "annotator must be non-empty")

    def to_dict(self) -> dict:
        return {
            "pair_id": self.pair_id, "judgment": self.judgment,
            "annotator": self.annotator, "judged_at": self.judged_at.isoformat(),
            "model_version_at_judgment": self.model_version_at_judgment,
        }

    @classmethod
    def from_dict(cls, record: dict) -> "JudgmentRecord":
        return cls(
            pair_id=record["pair_id"], judgment=record["judgment"],
            annotator=record["annotator"],
            judged_at=parse_timestamp(record["judged_at"]),
            model_version_at_judgment=int(record["model_version_at_judgment"]))


def _write_atomic(path: Path, content: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(content, encoding="utf-8")
    os.replace(tmp, path)


class Store:
    """In-memory working state over the persistence directory.

    Mutations are serialized by a re-entrant lock; reads of the model
    reference and the mention map are single attribute/dict lookups, so
    concurrent readers always see a consistent (old or new) state.
    """

    def __init__(self, directory: str | Path, config: Config | None = None):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        config_path = self.directory / "config.json"
        if config is None:
            config = Config.from_file(config_path) if config_path.exists() else Config()
        self.config = config
        self._lock = threading.RLock()
        self.corpus: Corpus = Corpus()
        self.entities: list[CompanyEntity] = []
        self.taxonomy: TaxonomyGraph = attach_orphans(mine_taxonomy(self.corpus))
        self.examples: list[LabeledExample] = []
        self.mentions: dict[str, RiskMention] = {}
        self.model: RelationModel | None = None
        self.rules = []
        self.portfolios: dict[str, Portfolio] = {}
        # Active judgment per (pair_id, annotator); audit log is on disk.
        self.judgments: dict[tuple[str, str], JudgmentRecord] = {}
        self._pending: dict[tuple[str, str], JudgmentRecord] = {}

    # -- loading ------------------------------------------------------------

    def load(self) -> "Store":
        docs = self.directory / "documents.jsonl"
        if docs.exists():
            self.corpus = load_corpus(docs)
        self.taxonomy = attach_orphans(
            mine_taxonomy(self.corpus, min_support=self.config.min_support))
        entities_path = self.directory / "entities.tsv"
        if entities_path.exists():
            with entities_path.open(encoding="utf-8") as fh:
                self.entities = parse_entity_file(fh)
        rules_path = self.directory / "rules.tsv"
        if rules_path.exists():
            with rules_path.open(encoding="utf-8") as fh:
                self.rules = parse_rules_file(fh)
        portfolio_path = self.directory / "portfolios.tsv"
        if portfolio_path.exists():
            with portfolio_path.open(encoding="utf-8") as fh:
                self.portfolios = {p.portfolio_id: p for p in parse_portfolio_file(fh)}
        examples_path = self.directory / "examples.jsonl"
        if examples_path.exists():
            with examples_path.open(encoding="utf-8") as fh:
                self.examples = load_examples(fh)
        self._load_model()
        self._load_judgments()
        self._load_or_build_mentions()
        return self

    def _model_dir(self) -> Path:
        path = self.directory / "models"
        path.mkdir(exist_ok=True)
        return path

    def _model_versions(self) -> list[int]:
        return sorted(
            int(p.stem.split("_v")[1]) for p in self._model_dir().glob("model_v*.tsv"))

    def _load_model(self) -> None:
        versions = self._model_versions()
        if versions:
            latest = versions[-1]
            model = load_model(self._model_dir() / f"model_v{latest}.tsv")
            self.model = replace(
                model, config=self.config.training_config(),
                training_examples=tuple(self.examples))
            logger.info("loaded model v%d (%d weights)", latest, len(model.weights))
        elif self.examples:
            self.model = train(self.examples, config=self.config.training_config(),
                               taxonomy=self.taxonomy)
            save_model(self.model, self._model_dir() / f"model_v{self.model.model_version}.tsv")
            logger.info("trained initial model v%d on %d examples",
                        self.model.model_version, len(self.examples))

    def _load_judgments(self) -> None:
        log_path = self.directory / "judgments.log"
        if not log_path.exists():
            return
        for line in log_path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            record = JudgmentRecord.from_dict(json.loads(line))
            self.judgments[(record.pair_id, record.annotator)] = record
            # A judgment taken under the current model version has not been
            # folded into any retrain yet.
            if self.model and record.model_version_at_judgment >= self.model.model_version:
                self._pending[(record.pair_id, record.annotator)] = record

    def _load_or_build_mentions(self) -> None:
        snapshot = self.directory / "mentions.jsonl"
        if snapshot.exists():
            for line in snapshot.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    mention = mention_from_dict(json.loads(line))
                    self.mentions[mention.pair.pair_id] = mention
        elif self.model is not None and len(self.corpus) > 0 and self.entities:
            self.rescore_all()
        self._apply_judgments_to_mentions()

    # -- persistence helpers --------------------------------------------------

    def _write_mentions(self) -> None:
        lines = [json.dumps(mention_to_dict(self.mentions[pid]), ensure_ascii=False)
                 for pid in sorted(self.mentions)]
        _write_atomic(self.directory / "mentions.jsonl", "\n".join(lines) + ("\n" if lines else ""))

    def _append_judgment(self, record: JudgmentRecord) -> None:
        with (self.directory / "judgments.log").open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record.to_dict(), ensure_ascii=False) + "\n")

    def _write_examples(self) -> None:
        _write_atomic(self.directory / "examples.jsonl",
                      "\n".join(dump_examples(self.examples)) + ("\n" if self.examples else ""))

    # -- pipeline state -------------------------------------------------------

    def rescore_all(self) -> None:
        """Tag + classify every corpus sentence with the current model."""
        require(self.model is not None, "no model available; add labeled examples first")
        gazetteer = build_gazetteer(self.entities, self.taxonomy)
        pairs = extract_candidates(self.corpus, gazetteer)
        fresh: dict[str, RiskMention] = {}
        for pair in pairs:
            fresh[pair.pair_id] = classify(self.model, pair, self.taxonomy)
        self.mentions = fresh
        self._apply_judgments_to_mentions()
        self._write_mentions()

    def _effective_judgment(self, pair_id: str) -> str:
        records = [r for (pid, _a), r in self.judgments.items() if pid == pair_id]
        if not records:
            return JUDGMENT_UNREVIEWED
        records.sort(key=lambda r: (r.judged_at, r.annotator))
        return records[-1].judgment

    def _apply_judgments_to_mentions(self) -> None:
        for pair_id in list(self.mentions):
            judgment = self._effective_judgment(pair_id)
            mention = self.mentions[pair_id]
            if mention.judgment != judgment:
                self.mentions[pair_id] = replace(mention, judgment=judgment)

    # -- review-loop operations ------------------------------------------------

    def record_judgment(self, pair_id: str, judgment: str, annotator: str,
                        judged_at: datetime | None = None) -> JudgmentRecord:
        """Idempotent per (pair_id, annotator): the latest write wins. The
        audit log keeps every write."""
        with self._lock:
            if pair_id not in self.mentions:
                raise UnknownPairError(pair_id)
            record = JudgmentRecord(
                pair_id=pair_id, judgment=judgment, annotator=annotator,
                judged_at=judged_at or datetime.now(_UTC),
                model_version_at_judgment=self.model_version)
            self.judgments[(pair_id, annotator)] = record
            self._pending[(pair_id, annotator)] = record
            self._append_judgment(record)
            mention = self.mentions[pair_id]
            effective = self._effective_judgment(pair_id)
            if mention.judgment != effective:
                self.mentions[pair_id] = replace(mention, judgment=effective)
                self._write_mentions()
            return record

    def retrain(self) -> RelationModel:
        """Fold pending judgments into a new model version.

        Raises NothingToRetrainError when no judgment arrived since the last
        retrain. The current model keeps serving until the swap."""
        with self._lock:
            if not self._pending:
                raise NothingToRetrainError("no new judgments since the last retrain")
            require(self.model is not None, "no model to retrain")
            new_examples = []
            for record in sorted(self._pending.values(),
                                 key=lambda r: (r.judged_at, r.pair_id, r.annotator)):
                mention = self.mentions.get(record.pair_id)
                if mention is None:
                    continue
                label = LABEL_POSITIVE if record.judgment == JUDGMENT_CORRECT else LABEL_NEGATIVE
                new_examples.append(LabeledExample(
                    pair=mention.pair, label=label,
                    annotator=record.annotator, labeled_at=record.judged_at))
            new_model = incorporate_judgments(self.model, new_examples, self.taxonomy)
            save_model(new_model, self._model_dir() / f"model_v{new_model.model_version}.tsv")
            self.examples = list(new_model.training_examples)
            self._write_examples()
            self.model = new_model  # atomic swap; readers saw the old version until here
            self._pending.clear()
            self.rescore_all()
            logger.info("retrained: model v%d, %d examples",
                        new_model.model_version, len(self.examples))
            return new_model

    # -- queries ----------------------------------------------------------------

    @property
    def model_version(self) -> int:
        return self.model.model_version if self.model else 0

    def entity_name(self, entity_id: str) -> str:
        for entity in self.entities:
            if entity.entity_id == entity_id:
                return entity.canonical_name
        return entity_id

    def list_candidates(self, status: str | None = None, entity: str | None = None
                        ) -> list[RiskMention]:
        mentions = [self.mentions[pid] for pid in sorted(self.mentions)]
        if entity:
            mentions = [m for m in mentions if m.pair.entity_id == entity]
        if status and status.upper() != "ALL":
            mentions = [m for m in mentions if m.judgment == status.upper()]
        return mentions

    def entity_mentions(self, entity_id: str) -> list[RiskMention]:
        return [m for m in self.mentions.values() if m.pair.entity_id == entity_id]

    def build_register(self, entity_id: str) -> RiskRegister:
        register = aggregate(self.entity_mentions(entity_id), entity_id)
        stats = mention_stats(self.mentions.values())
        if stats and register.entries:
            _scores, register = surprise_score(
                register, stats,
                theta_obvious=self.config.theta_obvious,
                theta_gray=self.config.theta_gray)
        return register

    def build_plan(self, entity_id: str) -> ManagementPlan:
        return make_plan(self.build_register(entity_id), self.rules, self.taxonomy)

    def build_overlap(self, portfolio_id: str) -> OverlapResult:
        portfolio = self.portfolios.get(portfolio_id)
        if portfolio is None:
            raise KeyError(portfolio_id)
        registers = {h: self.build_register(h) for h in portfolio.holdings}
        return portfolio_overlap(portfolio, registers)

    def pools(self) -> dict[str, GoldPool]:
        path = self.directory / "pools.tsv"
        if not path.exists():
            return {}
        with path.open(encoding="utf-8") as fh:
            return parse_pool_file(fh)


def seed_demo(directory: str | Path) -> Store:
    """Materialize the bundled fixture store: corpus, entities, rules,
    portfolio, labeled examples; then train and classify."""
    from .. import fixtures

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    config = Config()
    config.write(directory / "config.json")
    docs = []
    for doc in fixtures.demo_corpus():
        docs.append(json.dumps({
            "doc_id": doc.doc_id, "source": doc.source,
            "published_at": doc.published_at.isoformat(), "text": doc.text,
        }, ensure_ascii=False))
    _write_atomic(directory / "documents.jsonl", "\n".join(docs) + "\n")
    entity_lines = [
        "\t".join([e.entity_id, e.canonical_name, "|".join(sorted(e.aliases))])
        for e in fixtures.demo_entities()
    ]
    _write_atomic(directory / "entities.tsv", "\n".join(entity_lines) + "\n")
    rule_lines = ["\t".join([r.risk_type, r.action, r.note]) for r in fixtures.fig5_rules()]
    _write_atomic(directory / "rules.tsv", "\n".join(rule_lines) + "\n")
    portfolio = fixtures.fig9_portfolio()
    _write_atomic(directory / "portfolios.tsv",
                  f"portfolio\t{portfolio.portfolio_id}\n"
                  + "\n".join(portfolio.holdings) + "\n")
    _write_atomic(directory / "examples.jsonl",
                  "\n".join(dump_examples(fixtures.labeled_examples())) + "\n")
    store = Store(directory).load()
    logger.info("demo store ready: %d docs, %d mentions, model v%d",
                len(store.corpus), len(store.mentions), store.model_version)
    return store
