"""Risk ecosystems: supply-chain propagation and portfolio overlap.

A supplier's risks are a customer's risks, transitively: a factory's human
rights violations become the brand's reputation risk. Propagation walks
every simple directed path (bounded by max_hops, so cycles terminate),
transforming risk types edge by edge when an edge carries a rule and
multiplying per-edge attenuation into a path weight. Propagated entries
stay separate from an entity's own register; they are leads, not vetted
mentions.

Portfolio overlap compares holdings' qualitative registers: an occupancy
matrix, pairwise Jaccard similarity, and a diversity score (1 - mean
pairwise Jaccard). Sets of risk registers are better when they do not
overlap a lot.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .register import RiskRegister, qualitative_view
from .taxonomy import normalize_risk_phrase
from .validation import require

DEFAULT_MAX_HOPS = 3


@dataclass(frozen=True)
class SupplyEdge:
    supplier: str
    customer: str
    attenuation: float = 1.0
    rules: dict[str, str] = field(default_factory=dict)  # upstream type -> downstream type

    def __post_init__(self) -> None:
        require(self.supplier != self.customer, f"self-edge rejected: {self.supplier!r}")
        require(0.0 < self.attenuation <= 1.0,
                f"edge {self.supplier}->{self.customer}: attenuation must be in (0, 1]")

    def transform(self, risk_type: str) -> str:
        return self.rules.get(risk_type, risk_type)


class SupplyChainGraph:
    def __init__(self) -> None:
        self.nodes: set[str] = set()
        self.edges: dict[tuple[str, str], SupplyEdge] = {}

    def add_node(self, entity_id: str) -> None:
        require(bool(entity_id), "entity_id must be non-empty")
        self.nodes.add(entity_id)

    def add_edge(self, supplier: str, customer: str, attenuation: float = 1.0,
                 rules: Mapping[str, str] | None = None) -> SupplyEdge:
        edge = SupplyEdge(supplier, customer, attenuation, dict(rules or {}))
        self.add_node(supplier)
        self.add_node(customer)
        self.edges[(supplier, customer)] = edge
        return edge

    def suppliers_of(self, entity_id: str) -> list[str]:
        return sorted(s for (s, c) in self.edges if c == entity_id)

    def customers_of(self, entity_id: str) -> list[str]:
        return sorted(c for (s, c) in self.edges if s == entity_id)


@dataclass(frozen=True)
class PropagatedEntry:
    risk_type: str        # after per-edge transformation
    origin_entity: str
    hop_count: int
    path: tuple[str, ...]  # origin ... target, inclusive
    weight: float
    directness: str = "INDIRECT"

    def __post_init__(self) -> None:
        require(self.hop_count == len(self.path) - 1 >= 1,
                "hop_count must equal |path| - 1 >= 1")
        require(0.0 < self.weight <= 1.0, "weight must be in (0, 1]")


def _check_registers(graph: SupplyChainGraph,
                     registers: Mapping[str, RiskRegister]) -> None:
    unknown = sorted(set(registers) - graph.nodes)
    if unknown:
        raise ValueError(f"registers reference entities not in the graph: {', '.join(unknown)}")
    missing = sorted(graph.nodes - set(registers))
    if missing:
        raise ValueError(f"no register supplied for graph node(s): {', '.join(missing)}")


def propagate(graph: SupplyChainGraph, registers: Mapping[str, RiskRegister],
              max_hops: int = DEFAULT_MAX_HOPS) -> dict[str, list[PropagatedEntry]]:
    """Carry every upstream register entry down each simple supplier path.

    For every directed path supplier ~> entity of length <= max_hops, each
    of the supplier's own risk types arrives transformed edge by edge with
    weight = product of edge attenuations. Paths never revisit a node, so
    propagation terminates on cyclic graphs. Direct entries are not
    duplicated: only strictly upstream origins (hop >= 1) are reported.
    """
    require(max_hops >= 1, "max_hops must be >= 1")
    _check_registers(graph, registers)
    results: dict[str, list[PropagatedEntry]] = {n: [] for n in graph.nodes}

    def walk(origin: str, node: str, path: tuple[str, ...],
             types_weights: list[tuple[str, float]]) -> None:
        for customer in graph.customers_of(node):
            if customer in path:
                continue
            edge = graph.edges[(node, customer)]
            arrived = [(edge.transform(t), w * edge.attenuation)
                       for t, w in types_weights]
            new_path = path + (customer,)
            for risk_type, weight in arrived:
                results[customer].append(PropagatedEntry(
                    risk_type=risk_type, origin_entity=origin,
                    hop_count=len(new_path) - 1, path=new_path, weight=weight))
            if len(new_path) - 1 < max_hops:
                walk(origin, customer, new_path, arrived)

    for origin in sorted(graph.nodes):
        own_types = sorted(qualitative_view(registers[origin]))
        if own_types:
            walk(origin, origin, (origin,), [(t, 1.0) for t in own_types])
    for entries in results.values():
        entries.sort(key=lambda e: (e.origin_entity, e.hop_count, e.path, e.risk_type))
    return results


@dataclass(frozen=True)
class FailurePoint:
    origin_entity: str
    risk_type: str
    num_alternative_suppliers: int


def single_point_of_failure(graph: SupplyChainGraph,
                            registers: Mapping[str, RiskRegister], entity: str,
                            max_hops: int = DEFAULT_MAX_HOPS) -> list[FailurePoint]:
    """Count sourcing alternatives for each risk propagated into `entity`.

    For a risk of type t originating at supplier O and first passing through
    customer c, the alternatives are c's other in-neighbors whose own
    registers are free of t -- suppliers c could switch to without importing
    the same risk. Zero alternatives flags a single point of failure. When
    several paths carry the same (origin, type), the smallest count wins.
    """
    require(entity in graph.nodes, f"unknown entity {entity!r}")
    _check_registers(graph, registers)
    propagated = propagate(graph, registers, max_hops=max_hops)
    worst: dict[tuple[str, str], int] = {}
    for entry in propagated[entity]:
        origin = entry.origin_entity
        first_customer = entry.path[1]
        # The check runs on the origin-tier risk type: the register entry
        # as the origin holds it, before any edge transformation.
        for origin_type in sorted(qualitative_view(registers[origin])):
            if _arrives_as(graph, entry.path, origin_type) != entry.risk_type:
                continue
            alternatives = 0
            for sibling in graph.suppliers_of(first_customer):
                if sibling == origin:
                    continue
                if origin_type not in qualitative_view(registers[sibling]):
                    alternatives += 1
            key = (origin, origin_type)
            worst[key] = min(worst.get(key, alternatives), alternatives)
    return [FailurePoint(o, t, n) for (o, t), n in sorted(worst.items())]


def _arrives_as(graph: SupplyChainGraph, path: Sequence[str], risk_type: str) -> str:
    current = risk_type
    for supplier, customer in zip(path, path[1:]):
        current = graph.edges[(supplier, customer)].transform(current)
    return current


@dataclass(frozen=True)
class Portfolio:
    portfolio_id: str
    holdings: tuple[str, ...]

    def __post_init__(self) -> None:
        require(len(self.holdings) > 0, "portfolio must hold at least one entity")
        require(len(set(self.holdings)) == len(self.holdings),
                f"portfolio {self.portfolio_id!r} has duplicate holdings")


@dataclass(frozen=True)
class OverlapResult:
    holdings: tuple[str, ...]
    risk_types: tuple[str, ...]
    matrix: tuple[tuple[int, ...], ...]   # rows follow holdings, columns risk_types
    jaccard: dict[tuple[str, str], float]
    diversity: float


def jaccard(a: set[str], b: set[str]) -> float:
    union = a | b
    if not union:
        return 0.0
    return len(a & b) / len(union)


def portfolio_overlap(portfolio: Portfolio,
                      registers: Mapping[str, RiskRegister]) -> OverlapResult:
    """Occupancy matrix, pairwise Jaccard, and diversity = 1 - mean Jaccard.

    Identical registers everywhere give diversity 0; fully disjoint ones
    give 1. A single-holding portfolio has no pairs and scores 1.
    """
    missing = sorted(set(portfolio.holdings) - set(registers))
    if missing:
        raise ValueError(f"no register for holding(s): {', '.join(missing)}")
    views = {h: qualitative_view(registers[h]) for h in portfolio.holdings}
    risk_types = tuple(sorted(set().union(*views.values()) if views else set()))
    matrix = tuple(
        tuple(1 if t in views[h] else 0 for t in risk_types)
        for h in portfolio.holdings)
    similarities: dict[tuple[str, str], float] = {}
    values: list[float] = []
    holdings = portfolio.holdings
    for i, a in enumerate(holdings):
        for b in holdings[i + 1:]:
            value = jaccard(views[a], views[b])
            similarities[(a, b)] = value
            values.append(value)
    diversity = 1.0 - (sum(values) / len(values)) if values else 1.0
    return OverlapResult(holdings=holdings, risk_types=risk_types, matrix=matrix,
                         jaccard=similarities, diversity=diversity)


# ---------------------------------------------------------------------------
# Interchange formats
# ---------------------------------------------------------------------------


def parse_graph_file(lines: Iterable[str]) -> SupplyChainGraph:
    """`supplier TAB customer [TAB lambda [TAB src->dst|src->dst...]]`."""
    graph = SupplyChainGraph()
    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 2:
            raise ValueError(f"graph file line {lineno}: expected `supplier TAB customer ...`")
        supplier, customer = parts[0].strip(), parts[1].strip()
        attenuation = float(parts[2]) if len(parts) > 2 and parts[2].strip() else 1.0
        rules: dict[str, str] = {}
        if len(parts) > 3 and parts[3].strip():
            for clause in parts[3].split("|"):
                if "->" not in clause:
                    raise ValueError(f"graph file line {lineno}: bad rule {clause!r}")
                src, dst = clause.split("->", maxsplit=1)
                rules[normalize_risk_phrase(src)] = normalize_risk_phrase(dst)
        graph.add_edge(supplier, customer, attenuation, rules)
    return graph


def parse_portfolio_file(lines: Iterable[str]) -> list[Portfolio]:
    """One or more blocks: `portfolio TAB <id>` header, then one holding
    per line."""
    portfolios: list[Portfolio] = []
    current_id: str | None = None
    holdings: list[str] = []

    def flush() -> None:
        if current_id is not None:
            portfolios.append(Portfolio(current_id, tuple(holdings)))

    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        if line.lower().startswith("portfolio\t"):
            flush()
            current_id = line.split("\t", maxsplit=1)[1].strip()
            holdings = []
        elif current_id is None:
            raise ValueError(f"portfolio file line {lineno}: holding before `portfolio` header")
        else:
            holdings.append(line.strip())
    flush()
    return portfolios


def overlap_to_csv(result: OverlapResult) -> str:
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["entity_id", *result.risk_types])
    for holding, row in zip(result.holdings, result.matrix):
        writer.writerow([holding, *row])
    writer.writerow(["diversity", repr(result.diversity),
                     *[""] * max(0, len(result.risk_types) - 1)])
    return out.getvalue()


def propagated_to_dicts(results: Mapping[str, Sequence[PropagatedEntry]]) -> Iterable[dict]:
    for entity in sorted(results):
        for entry in results[entity]:
            yield {
                "entity_id": entity,
                "risk_type": entry.risk_type,
                "origin_entity": entry.origin_entity,
                "hop_count": entry.hop_count,
                "path": list(entry.path),
                "weight": entry.weight,
                "directness": entry.directness,
            }
