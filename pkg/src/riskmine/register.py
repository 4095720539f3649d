"""Risk registers: per-entity aggregation of vetted risk mentions.

A register entry records a risk type with its mention count, date range,
and pair-id provenance. Likelihood and impact are manual-input fields only:
mention frequency is never written into likelihood, because a frequently
mentioned risk is merely a frequently mentioned risk. Analyst judgments
take precedence over classifier verdicts during aggregation.

Registers form a commutative merge monoid (counts add, date ranges union,
provenance unions), so partial registers computed in parallel aggregate to
the same result as a single pass.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from datetime import date
from typing import Iterable, Mapping, Sequence

from .relation import RiskMention
from .taxonomy import TaxonomyGraph, normalize_risk_phrase
from .validation import require

SWAN_OBVIOUS = "OBVIOUS"
SWAN_GRAY = "GRAY"
SWAN_UNCLASSIFIED = "UNCLASSIFIED"

ACTION_AVOID = "AVOID"
ACTION_TRANSFER = "TRANSFER"
ACTION_MITIGATE = "MITIGATE"
ACTION_ACCEPT = "ACCEPT"
ACTIONS = (ACTION_AVOID, ACTION_TRANSFER, ACTION_MITIGATE, ACTION_ACCEPT)

DEFAULT_THETA_OBVIOUS = 3.0
DEFAULT_THETA_GRAY = 7.0

# Likelihood is a manual band or probability; impact a manual band or a
# (min, expected, max) monetary triple. Neither is ever computed here.
Likelihood = str | float | None
Impact = str | tuple[float, float, float] | None


@dataclass(frozen=True)
class RiskEntry:
    risk_type: str
    mention_count: int
    first_seen: date
    last_seen: date
    provenance: tuple[str, ...]
    likelihood: Likelihood = None
    impact: Impact = None
    swan_class: str = SWAN_UNCLASSIFIED

    def __post_init__(self) -> None:
        require(self.mention_count == len(self.provenance) >= 1,
                f"entry {self.risk_type!r}: mention_count must equal |provenance| >= 1")
        require(self.first_seen <= self.last_seen,
                f"entry {self.risk_type!r}: first_seen after last_seen")


@dataclass(frozen=True)
class RiskRegister:
    entity_id: str
    entries: dict[str, RiskEntry] = field(default_factory=dict)
    as_of: date | None = None
    form: str = "QUANTITATIVE"

    def risk_types(self) -> set[str]:
        return set(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class ManagementPlan:
    entity_id: str
    actions: dict[str, tuple[str, str]]  # risk_type -> (action, note)


@dataclass(frozen=True)
class PlanRule:
    risk_type: str  # exact type or taxonomy ancestor, normalized
    action: str
    note: str = ""

    def __post_init__(self) -> None:
        require(self.action in ACTIONS,
                f"rule for {self.risk_type!r}: action must be one of {', '.join(ACTIONS)}")


@dataclass(frozen=True)
class GoldPool:
    entity_id: str
    judgments: dict[str, str]  # risk_type -> CORRECT | INCORRECT

    def __post_init__(self) -> None:
        for risk_type, verdict in self.judgments.items():
            require(verdict in ("CORRECT", "INCORRECT"),
                    f"pool judgment for {risk_type!r} must be CORRECT or INCORRECT")

    @property
    def correct(self) -> set[str]:
        return {t for t, v in self.judgments.items() if v == "CORRECT"}


@dataclass(frozen=True)
class PoolMetrics:
    precision: float
    recall: float
    f1: float


def aggregate(mentions: Sequence[RiskMention], entity_id: str) -> RiskRegister:
    """Fold accepted mentions into one entry per risk type.

    Judgment precedence applies: INCORRECT drops a mention even if the
    classifier accepted it, CORRECT keeps one even if rejected. Mentions
    for a different entity are an error. Deterministic given the input set;
    as_of is the latest source-document date.
    """
    selected: dict[str, RiskMention] = {}
    for mention in mentions:
        if mention.pair.entity_id != entity_id:
            raise ValueError(
                f"mention {mention.pair.pair_id} belongs to entity "
                f"{mention.pair.entity_id!r}, not {entity_id!r}")
        if mention.accepted:
            selected[mention.pair.pair_id] = mention
    groups: dict[str, list[RiskMention]] = {}
    for mention in selected.values():
        key = normalize_risk_phrase(mention.pair.risk_type_id)
        groups.setdefault(key, []).append(mention)
    entries: dict[str, RiskEntry] = {}
    for risk_type in sorted(groups):
        group = groups[risk_type]
        dates = [m.pair.published_at.date() for m in group if m.pair.published_at]
        require(bool(dates),
                f"mentions of {risk_type!r} carry no source dates; "
                "ingest documents with published_at")
        entries[risk_type] = RiskEntry(
            risk_type=risk_type,
            mention_count=len(group),
            first_seen=min(dates),
            last_seen=max(dates),
            provenance=tuple(sorted(m.pair.pair_id for m in group)),
        )
    as_of = max((e.last_seen for e in entries.values()), default=None)
    return RiskRegister(entity_id=entity_id, entries=entries, as_of=as_of)


def merge_registers(a: RiskRegister, b: RiskRegister) -> RiskRegister:
    """Commutative merge: counts add, date ranges union, provenance unions."""
    require(a.entity_id == b.entity_id,
            f"cannot merge registers for {a.entity_id!r} and {b.entity_id!r}")
    entries: dict[str, RiskEntry] = dict(a.entries)
    for risk_type, entry in b.entries.items():
        existing = entries.get(risk_type)
        if existing is None:
            entries[risk_type] = entry
        else:
            provenance = tuple(sorted(set(existing.provenance) | set(entry.provenance)))
            entries[risk_type] = RiskEntry(
                risk_type=risk_type,
                mention_count=len(provenance),
                first_seen=min(existing.first_seen, entry.first_seen),
                last_seen=max(existing.last_seen, entry.last_seen),
                provenance=provenance,
                likelihood=existing.likelihood if existing.likelihood is not None else entry.likelihood,
                impact=existing.impact if existing.impact is not None else entry.impact,
            )
    entries = {t: entries[t] for t in sorted(entries)}
    as_of = max((e.last_seen for e in entries.values()), default=None)
    return RiskRegister(entity_id=a.entity_id, entries=entries, as_of=as_of)


def qualitative_view(register: RiskRegister) -> set[str]:
    """The simple risk register: just the set of risk types."""
    return register.risk_types()


def set_assessment(register: RiskRegister, risk_type: str,
                   likelihood: Likelihood = None, impact: Impact = None) -> RiskRegister:
    """The manual input path for likelihood/impact; the only way either
    field is ever populated."""
    key = normalize_risk_phrase(risk_type)
    require(key in register.entries, f"register has no entry for {risk_type!r}")
    entries = dict(register.entries)
    entry = entries[key]
    entries[key] = replace(
        entry,
        likelihood=likelihood if likelihood is not None else entry.likelihood,
        impact=impact if impact is not None else entry.impact)
    return replace(register, entries=entries)


def surprise_score(register: RiskRegister, corpus_stats: Mapping[str, int],
                   theta_obvious: float = DEFAULT_THETA_OBVIOUS,
                   theta_gray: float = DEFAULT_THETA_GRAY
                   ) -> tuple[dict[str, float], RiskRegister]:
    """Information content of each register entry under the global mention
    distribution: score(t) = -log2(count(t) / total) bits.

    Low scores are obvious risks, high scores gray swans (thresholds are an
    operationalization knob, not a claim). A type absent from the stats gets
    no score and stays UNCLASSIFIED: an outcome never observed cannot be
    assigned a probability. Black swans have no detector here, by design.
    """
    total = sum(corpus_stats.values())
    require(total > 0, "corpus stats must contain at least one mention")
    require(theta_obvious <= theta_gray, "theta_obvious must not exceed theta_gray")
    scores: dict[str, float] = {}
    entries: dict[str, RiskEntry] = {}
    for risk_type, entry in register.entries.items():
        count = corpus_stats.get(risk_type, 0)
        if count <= 0:
            entries[risk_type] = replace(entry, swan_class=SWAN_UNCLASSIFIED)
            continue
        bits = -math.log2(count / total)
        scores[risk_type] = bits
        if bits <= theta_obvious:
            swan = SWAN_OBVIOUS
        elif bits >= theta_gray:
            swan = SWAN_GRAY
        else:
            swan = SWAN_UNCLASSIFIED
        entries[risk_type] = replace(entry, swan_class=swan)
    return scores, replace(register, entries=entries)


def mention_stats(mentions: Iterable[RiskMention]) -> dict[str, int]:
    """Global accepted-mention counts per risk type, for surprise scoring."""
    stats: dict[str, int] = {}
    for mention in mentions:
        if mention.accepted:
            key = normalize_risk_phrase(mention.pair.risk_type_id)
            stats[key] = stats.get(key, 0) + 1
    return stats


def evaluate_pooled(system_registers: Sequence[tuple[str, RiskRegister]],
                    pool: GoldPool) -> dict[str, PoolMetrics]:
    """Pool-relative precision/recall/F1 per system.

    The pool must judge every type appearing in any system register; absolute
    comprehensiveness is unmeasurable, so recall is relative to the pooled
    CORRECT set. An empty system register scores precision 1.0, recall 0.0.
    """
    unjudged = sorted({t for _sid, reg in system_registers for t in reg.risk_types()}
                      - set(pool.judgments))
    if unjudged:
        raise ValueError(f"pool is missing judgments for: {', '.join(unjudged)}")
    correct = pool.correct
    metrics: dict[str, PoolMetrics] = {}
    for system_id, register in system_registers:
        system = register.risk_types()
        hits = len(system & correct)
        precision = hits / len(system) if system else 1.0
        recall = hits / len(correct) if correct else 0.0
        f1 = (2 * precision * recall / (precision + recall)) if (precision + recall) > 0 else 0.0
        metrics[system_id] = PoolMetrics(precision, recall, f1)
    return metrics


def currency(register: RiskRegister, materializations: Mapping[str, date]) -> dict[str, int]:
    """Lead time in days between first mention and materialization; positive
    means the register contained the risk before it happened."""
    leads: dict[str, int] = {}
    for risk_type, entry in register.entries.items():
        event = materializations.get(risk_type)
        if event is not None:
            leads[risk_type] = (event - entry.first_seen).days
    return leads


def make_plan(register: RiskRegister, rules: Sequence[PlanRule],
              taxonomy: TaxonomyGraph | None = None) -> ManagementPlan:
    """Map each register entry to an action via the most specific rule:
    exact type, else nearest taxonomy ancestor, else ACCEPT (do nothing)."""
    by_type = {normalize_risk_phrase(r.risk_type): r for r in rules}
    actions: dict[str, tuple[str, str]] = {}
    for risk_type in sorted(register.entries):
        rule = by_type.get(risk_type)
        if rule is None and taxonomy is not None and risk_type in taxonomy.nodes:
            rule = _nearest_ancestor_rule(risk_type, by_type, taxonomy)
        if rule is None:
            actions[risk_type] = (ACTION_ACCEPT, "do nothing")
        else:
            actions[risk_type] = (rule.action, rule.note)
    return ManagementPlan(entity_id=register.entity_id, actions=actions)


def _nearest_ancestor_rule(risk_type: str, by_type: Mapping[str, PlanRule],
                           taxonomy: TaxonomyGraph) -> PlanRule | None:
    frontier = [risk_type]
    visited = {risk_type}
    while frontier:
        next_frontier: list[str] = []
        for node in frontier:
            for parent in taxonomy.parents(node):
                if parent in visited:
                    continue
                visited.add(parent)
                next_frontier.append(parent)
        # Breadth-first: the first level holding any ruled ancestor wins;
        # ties break lexicographically for determinism.
        ruled = sorted(n for n in next_frontier if n in by_type)
        if ruled:
            return by_type[ruled[0]]
        frontier = next_frontier
    return None


# ---------------------------------------------------------------------------
# Interchange formats
# ---------------------------------------------------------------------------


def register_to_csv(registers: Sequence[RiskRegister]) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["entity_id", "risk_type", "count", "first_seen", "last_seen",
                     "likelihood", "impact", "swan_class"])
    for register in registers:
        for risk_type in sorted(register.entries):
            entry = register.entries[risk_type]
            impact = entry.impact
            if isinstance(impact, tuple):
                impact = "/".join(str(v) for v in impact)
            writer.writerow([
                register.entity_id, risk_type, entry.mention_count,
                entry.first_seen.isoformat(), entry.last_seen.isoformat(),
                "" if entry.likelihood is None else entry.likelihood,
                "" if impact is None else impact,
                entry.swan_class,
            ])
    return out.getvalue()


def register_to_dict(register: RiskRegister) -> dict:
    return {
        "entity_id": register.entity_id,
        "as_of": register.as_of.isoformat() if register.as_of else None,
        "form": register.form,
        "entries": [
            {
                "risk_type": e.risk_type,
                "count": e.mention_count,
                "first_seen": e.first_seen.isoformat(),
                "last_seen": e.last_seen.isoformat(),
                "likelihood": e.likelihood,
                "impact": list(e.impact) if isinstance(e.impact, tuple) else e.impact,
                "swan_class": e.swan_class,
                "provenance": list(e.provenance),
            }
            for _t, e in sorted(register.entries.items())
        ],
    }


def register_from_dict(record: dict) -> RiskRegister:
    entries: dict[str, RiskEntry] = {}
    for raw in record.get("entries", []):
        impact = raw.get("impact")
        if isinstance(impact, list):
            impact = tuple(impact)
        entries[raw["risk_type"]] = RiskEntry(
            risk_type=raw["risk_type"],
            mention_count=int(raw["count"]),
            first_seen=date.fromisoformat(raw["first_seen"]),
            last_seen=date.fromisoformat(raw["last_seen"]),
            provenance=tuple(raw.get("provenance", [])),
            likelihood=raw.get("likelihood"),
            impact=impact,
            swan_class=raw.get("swan_class", SWAN_UNCLASSIFIED),
        )
    as_of = record.get("as_of")
    return RiskRegister(
        entity_id=record["entity_id"],
        entries=entries,
        as_of=date.fromisoformat(as_of) if as_of else None,
        form=record.get("form", "QUANTITATIVE"),
    )


def dump_registers(registers: Iterable[RiskRegister]):
    for register in registers:
        yield json.dumps(register_to_dict(register), ensure_ascii=False)


def load_registers(lines: Iterable[str]) -> dict[str, RiskRegister]:
    registers: dict[str, RiskRegister] = {}
    for line in lines:
        if line.strip():
            register = register_from_dict(json.loads(line))
            registers[register.entity_id] = register
    return registers


def parse_pool_file(lines: Iterable[str]) -> dict[str, GoldPool]:
    """`entity_id TAB risk_type TAB CORRECT|INCORRECT TAB judge` per line."""
    pools: dict[str, dict[str, str]] = {}
    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise ValueError(
                f"pool file line {lineno}: expected `entity TAB type TAB judgment TAB judge`")
        entity_id, risk_type, judgment, _judge = (p.strip() for p in parts)
        key = normalize_risk_phrase(risk_type)
        entity_pool = pools.setdefault(entity_id, {})
        if key in entity_pool and entity_pool[key] != judgment:
            raise ValueError(
                f"pool file line {lineno}: conflicting judgments for {risk_type!r}")
        entity_pool[key] = judgment
    return {eid: GoldPool(eid, judgments) for eid, judgments in pools.items()}


def parse_rules_file(lines: Iterable[str]) -> list[PlanRule]:
    """`risk_type TAB action [TAB note]` per line."""
    rules: list[PlanRule] = []
    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 2:
            raise ValueError(f"rules file line {lineno}: expected `risk_type TAB action [TAB note]`")
        note = parts[2].strip() if len(parts) > 2 else ""
        rules.append(PlanRule(parts[0].strip(), parts[1].strip().upper(), note))
    return rules


def plan_to_csv(plan: ManagementPlan) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["risk_type", "action", "note"])
    for risk_type in sorted(plan.actions):
        action, note = plan.actions[risk_type]
        writer.writerow([risk_type, action.lower(), note])
    return out.getvalue()
