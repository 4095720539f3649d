"""Command-line pipeline driver.

Every subcommand is a pure function of its input files and flags; outputs
are written atomically (temp file + rename), so a failed run leaves no
partial artifacts. Pass --run-log PATH to append a pipeline-run record with
input/output hashes, wall clock, and the flag snapshot -- rerunning a stage
on identical inputs must reproduce identical output hashes.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
import uuid
from datetime import datetime, timezone
from pathlib import Path

from ..corpus import CorpusError, dump_sentences, load_corpus
from ..dynprob import UNDEFINED, EventUniverse, dump_timeline, load_timeline
from ..ecosystem import (overlap_to_csv, parse_graph_file, parse_portfolio_file,
                         portfolio_overlap, propagate, propagated_to_dicts)
from ..register import (RiskRegister, aggregate, dump_registers,
                        evaluate_pooled, load_registers, make_plan,
                        mention_stats, parse_pool_file, parse_rules_file,
                        plan_to_csv, register_to_csv, surprise_score)
from ..relation import (TrainingConfig, classify, load_examples, load_model,
                        mention_from_dict, mention_to_dict, save_model, train)
from ..tagger import (build_gazetteer, dump_candidates, extract_candidates,
                      pair_from_dict, parse_entity_file)
from ..taxonomy import (load_taxonomy, mine_taxonomy, parse_pattern_file,
                        write_taxonomy)
from ..validation import require
from .config import load_config


def _write_atomic(path: Path, content: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(content, encoding="utf-8")
    os.replace(tmp, path)


def _write_lines(path: Path, lines) -> None:
    body = "\n".join(lines)
    _write_atomic(path, body + "\n" if body else "")


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _load_mentions(path: Path) -> list:
    mentions = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.strip():
            mentions.append(mention_from_dict(json.loads(line)))
    return mentions


def _load_candidates(path: Path) -> list:
    pairs = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.strip():
            pairs.append(pair_from_dict(json.loads(line)))
    return pairs


def _maybe_taxonomy(path: str | None):
    return load_taxonomy(path) if path else None


# ---------------------------------------------------------------------------
# Subcommand handlers: each returns (input paths, output paths) for run logging
# ---------------------------------------------------------------------------


def cmd_ingest(args) -> tuple[list[Path], list[Path]]:
    corpus = load_corpus(args.input)
    lines = []
    for doc in corpus:
        lines.append(json.dumps({
            "doc_id": doc.doc_id, "source": doc.source,
            "published_at": doc.published_at.isoformat(), "text": doc.text,
        }, ensure_ascii=False))
    outputs = [Path(args.out)]
    _write_lines(Path(args.out), lines)
    if args.sentences:
        _write_lines(Path(args.sentences), list(dump_sentences(corpus)))
        outputs.append(Path(args.sentences))
    print(f"ingested {len(corpus)} documents")
    return [Path(args.input)], outputs


def cmd_mine_taxonomy(args) -> tuple[list[Path], list[Path]]:
    corpus = load_corpus(args.corpus)
    inputs = [Path(args.corpus)]
    patterns = None
    if args.patterns:
        with open(args.patterns, encoding="utf-8") as fh:
            patterns = parse_pattern_file(fh)
        inputs.append(Path(args.patterns))
    graph = mine_taxonomy(corpus, patterns=patterns, min_support=args.min_support)
    if args.attach_orphans:
        from ..taxonomy import attach_orphans
        graph = attach_orphans(graph)
    out_dir = Path(args.out)
    write_taxonomy(graph, out_dir)
    print(f"mined {len(graph.nodes)} risk types, {len(graph.edges)} IS-A edges")
    return inputs, [out_dir / "edges.tsv", out_dir / "nodes.jsonl", out_dir / "taxonomy.dot"]


def cmd_tag(args) -> tuple[list[Path], list[Path]]:
    corpus = load_corpus(args.corpus)
    with open(args.entities, encoding="utf-8") as fh:
        entities = parse_entity_file(fh)
    taxonomy = load_taxonomy(args.taxonomy)
    gazetteer = build_gazetteer(entities, taxonomy)
    pairs = extract_candidates(corpus, gazetteer)
    _write_lines(Path(args.out), list(dump_candidates(pairs)))
    print(f"tagged {len(corpus)} documents; {len(pairs)} candidate pairs")
    return [Path(args.corpus), Path(args.entities), Path(args.taxonomy) / "nodes.jsonl"], \
        [Path(args.out)]


def cmd_train(args) -> tuple[list[Path], list[Path]]:
    with open(args.examples, encoding="utf-8") as fh:
        examples = load_examples(fh)
    inputs = [Path(args.examples)]
    taxonomy = _maybe_taxonomy(args.taxonomy)
    if args.taxonomy:
        inputs.append(Path(args.taxonomy) / "nodes.jsonl")
    previous = None
    if args.previous:
        previous = load_model(args.previous)
        inputs.append(Path(args.previous))
    config = TrainingConfig(
        learning_rate=args.learning_rate, l2=args.l2, max_epochs=args.max_epochs,
        tol=args.tol, threshold=args.threshold, balance_classes=args.balance_classes,
        seed=args.seed)
    model = train(examples, config=config, taxonomy=taxonomy, previous=previous)
    save_model(model, args.out)
    print(f"trained model v{model.model_version} on {len(examples)} examples "
          f"({len(model.weights)} features)")
    return inputs, [Path(args.out)]


def cmd_classify(args) -> tuple[list[Path], list[Path]]:
    pairs = _load_candidates(Path(args.candidates))
    model = load_model(args.model)
    taxonomy = _maybe_taxonomy(args.taxonomy)
    mentions = [classify(model, pair, taxonomy) for pair in pairs]
    _write_lines(Path(args.out),
                 [json.dumps(mention_to_dict(m), ensure_ascii=False) for m in mentions])
    accepted = sum(1 for m in mentions if m.verdict == "ACCEPTED")
    print(f"classified {len(mentions)} pairs: {accepted} accepted, "
          f"{len(mentions) - accepted} rejected")
    inputs = [Path(args.candidates), Path(args.model)]
    if args.taxonomy:
        inputs.append(Path(args.taxonomy) / "nodes.jsonl")
    return inputs, [Path(args.out)]


def cmd_aggregate(args) -> tuple[list[Path], list[Path]]:
    mentions = _load_mentions(Path(args.mentions))
    entities = sorted({m.pair.entity_id for m in mentions}) \
        if args.entity == "all" else [args.entity]
    stats = mention_stats(mentions)
    registers = []
    for entity_id in entities:
        register = aggregate([m for m in mentions if m.pair.entity_id == entity_id],
                             entity_id)
        if args.swan and register.entries and stats:
            _scores, register = surprise_score(register, stats)
        registers.append(register)
    outputs = [Path(args.out)]
    _write_atomic(Path(args.out), register_to_csv(registers))
    if args.registers_out:
        _write_lines(Path(args.registers_out), list(dump_registers(registers)))
        outputs.append(Path(args.registers_out))
    total = sum(len(r.entries) for r in registers)
    print(f"aggregated {len(registers)} register(s), {total} entries")
    return [Path(args.mentions)], outputs


def cmd_plan(args) -> tuple[list[Path], list[Path]]:
    with open(args.registers, encoding="utf-8") as fh:
        registers = load_registers(fh)
    register = registers.get(args.entity)
    require(register is not None, f"no register for entity {args.entity!r}")
    with open(args.rules, encoding="utf-8") as fh:
        rules = parse_rules_file(fh)
    taxonomy = _maybe_taxonomy(args.taxonomy)
    plan = make_plan(register, rules, taxonomy)
    _write_atomic(Path(args.out), plan_to_csv(plan))
    print(f"planned {len(plan.actions)} actions for {args.entity}")
    inputs = [Path(args.registers), Path(args.rules)]
    if args.taxonomy:
        inputs.append(Path(args.taxonomy) / "nodes.jsonl")
    return inputs, [Path(args.out)]


def cmd_propagate(args) -> tuple[list[Path], list[Path]]:
    with open(args.graph, encoding="utf-8") as fh:
        graph = parse_graph_file(fh)
    with open(args.registers, encoding="utf-8") as fh:
        registers = load_registers(fh)
    if args.default_empty:
        for node in graph.nodes:
            registers.setdefault(node, RiskRegister(entity_id=node))
    results = propagate(graph, registers, max_hops=args.max_hops)
    _write_lines(Path(args.out),
                 [json.dumps(record, ensure_ascii=False)
                  for record in propagated_to_dicts(results)])
    total = sum(len(v) for v in results.values())
    print(f"propagated {total} entries across {len(graph.nodes)} entities")
    return [Path(args.graph), Path(args.registers)], [Path(args.out)]


def cmd_portfolio(args) -> tuple[list[Path], list[Path]]:
    with open(args.portfolio, encoding="utf-8") as fh:
        portfolios = {p.portfolio_id: p for p in parse_portfolio_file(fh)}
    require(bool(portfolios), "portfolio file defines no portfolios")
    portfolio_id = args.portfolio_id or sorted(portfolios)[0]
    portfolio = portfolios.get(portfolio_id)
    require(portfolio is not None, f"no portfolio {portfolio_id!r} in file")
    with open(args.registers, encoding="utf-8") as fh:
        registers = load_registers(fh)
    result = portfolio_overlap(portfolio, registers)
    _write_atomic(Path(args.out), overlap_to_csv(result))
    print(f"portfolio {portfolio_id}: {len(result.holdings)} holdings, "
          f"{len(result.risk_types)} risk types, diversity {result.diversity:.4f}")
    return [Path(args.portfolio), Path(args.registers)], [Path(args.out)]


def cmd_eval_pool(args) -> tuple[list[Path], list[Path]]:
    with open(args.pool, encoding="utf-8") as fh:
        pools = parse_pool_file(fh)
    pool = pools.get(args.entity)
    require(pool is not None, f"pool file has no judgments for entity {args.entity!r}")
    inputs = [Path(args.pool)]
    system_registers = []
    for spec_item in args.system:
        if "=" not in spec_item:
            raise ValueError(f"--system expects NAME=registers.jsonl, got {spec_item!r}")
        name, path = spec_item.split("=", maxsplit=1)
        with open(path, encoding="utf-8") as fh:
            registers = load_registers(fh)
        register = registers.get(args.entity)
        require(register is not None,
                f"system {name!r}: no register for entity {args.entity!r}")
        system_registers.append((name, register))
        inputs.append(Path(path))
    metrics = evaluate_pooled(system_registers, pool)
    lines = ["system,precision,recall,f1"]
    for name in sorted(metrics):
        m = metrics[name]
        lines.append(f"{name},{m.precision!r},{m.recall!r},{m.f1!r}")
    report = "\n".join(lines) + "\n"
    outputs = []
    if args.out:
        _write_atomic(Path(args.out), report)
        outputs.append(Path(args.out))
    print(report, end="")
    return inputs, outputs


def cmd_omega(args) -> tuple[list[Path], list[Path]]:
    inputs, outputs = [], []
    log_path = Path(args.log) if args.log else None
    if log_path and log_path.exists():
        with log_path.open(encoding="utf-8") as fh:
            universe = load_timeline(fh, alpha=args.alpha)
        inputs.append(log_path)
    else:
        universe = EventUniverse(alpha=args.alpha)
    if args.observe:
        for item in args.observe:
            t, outcome = item.split(":", maxsplit=1)
            universe.observe(int(t), outcome)
        if log_path:
            _write_lines(log_path, list(dump_timeline(universe)))
            outputs.append(log_path)
    if args.at is not None:
        known = sorted(universe.universe_at(args.at))
        print(f"universe at t={args.at}: {{{', '.join(known)}}}"
              if known else f"universe at t={args.at}: {{}}")
    if args.estimate:
        t, outcome = args.estimate.split(":", maxsplit=1)
        value = universe.estimate(int(t), outcome)
        if value is UNDEFINED:
            print(f"estimate({outcome!r} at t={t}) = UNDEFINED "
                  "(outcome outside the known universe)")
        else:
            print(f"estimate({outcome!r} at t={t}) = {value:.6f} "
                  f"(unseen mass {universe.unseen_mass(int(t)):.6f})")
    if not args.observe and args.at is None and not args.estimate:
        _omega_demo(args.alpha)
    return inputs, outputs


def _omega_demo(alpha: float) -> None:
    universe = EventUniverse(alpha=alpha)
    print("t=0  universe = {}")
    universe.observe(1, "Tail")
    print("t=1  observed Tail   -> universe = {Tail}")
    universe.observe(2, "Head")
    print("t=2  observed Head   -> universe = {Tail, Head}")
    t = 3
    for i in range(999_997):
        universe.observe(t, "Tail" if i % 2 == 0 else "Head")
        t += 1
    final = t - 1
    print(f"t={final}  after 10^6 total observations -> universe = "
          f"{{{', '.join(sorted(universe.universe_at(final)))}}} (no further set updates)")
    side = universe.estimate(final, "Side")
    print(f"estimate('Side') = {side!r}  (never observed: no probability, not even 0)")
    tail = universe.estimate(final, "Tail")
    print(f"estimate('Tail') = {tail:.6f}, unseen mass = {universe.unseen_mass(final):.6g}")


def cmd_serve(args) -> tuple[list[Path], list[Path]]:
    from .service import serve
    from .store import Store
    config = load_config(args.config) if args.config else None
    store = Store(args.store, config=config).load()
    print(f"serving store {args.store} (model v{store.model_version}, "
          f"{len(store.mentions)} mentions) on {args.host}:{args.port}")
    serve(store, host=args.host, port=args.port)
    return [], []


def cmd_demo(args) -> tuple[list[Path], list[Path]]:
    from .store import seed_demo
    store = seed_demo(args.store)
    print(f"demo store ready at {args.store}: {len(store.corpus)} documents, "
          f"{len(store.mentions)} candidate mentions, model v{store.model_version}")
    return [], [Path(args.store) / "documents.jsonl"]


# ---------------------------------------------------------------------------
# Parser wiring
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riskmine",
        description="Computer-supported risk identification pipeline")
    parser.add_argument("--run-log", metavar="PATH", default=None,
                        help="append a pipeline-run record (hashes, wall clock) here")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate and normalize a document feed")
    p.add_argument("-i", "--input", required=True, help="raw line-delimited document records")
    p.add_argument("-o", "--out", required=True, help="normalized corpus output")
    p.add_argument("--sentences", default=None, help="optional tokenized-sentence dump")
    p.set_defaults(handler=cmd_ingest)

    p = sub.add_parser("mine-taxonomy", help="induce the risk-type IS-A graph")
    p.add_argument("-c", "--corpus", required=True)
    p.add_argument("-p", "--patterns", default=None, help="pattern file (template TAB direction)")
    p.add_argument("--min-support", type=int, default=1)
    p.add_argument("--attach-orphans", action="store_true",
                   help="attach parentless nodes to the root")
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.set_defaults(handler=cmd_mine_taxonomy)

    p = sub.add_parser("tag", help="tag company/risk mentions, emit candidate pairs")
    p.add_argument("-c", "--corpus", required=True)
    p.add_argument("-t", "--taxonomy", required=True, help="taxonomy directory")
    p.add_argument("-e", "--entities", required=True, help="entity list file")
    p.add_argument("-o", "--out", required=True, help="candidate dump output")
    p.set_defaults(handler=cmd_tag)

    p = sub.add_parser("train", help="train the relation classifier")
    p.add_argument("-x", "--examples", required=True, help="labeled example file")
    p.add_argument("-t", "--taxonomy", default=None, help="taxonomy directory")
    p.add_argument("--previous", default=None, help="previous model (version increments)")
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--max-epochs", type=int, default=500)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--balance-classes", action="store_true")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("-o", "--out", required=True, help="model file output")
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("classify", help="score candidate pairs with a model")
    p.add_argument("-c", "--candidates", required=True)
    p.add_argument("-m", "--model", required=True)
    p.add_argument("-t", "--taxonomy", default=None)
    p.add_argument("-o", "--out", required=True, help="mention output")
    p.set_defaults(handler=cmd_classify)

    p = sub.add_parser("aggregate", help="build per-entity risk registers")
    p.add_argument("-m", "--mentions", required=True)
    p.add_argument("--entity", default="all", help="entity id, or 'all'")
    p.add_argument("--swan", action="store_true",
                   help="assign surprise-based swan classes")
    p.add_argument("-o", "--out", required=True, help="register CSV output")
    p.add_argument("--registers-out", default=None,
                   help="optional structured register output (with provenance)")
    p.set_defaults(handler=cmd_aggregate)

    p = sub.add_parser("plan", help="derive a risk management plan")
    p.add_argument("-r", "--registers", required=True, help="structured registers file")
    p.add_argument("--entity", required=True)
    p.add_argument("--rules", required=True, help="rules file (type TAB action [TAB note])")
    p.add_argument("-t", "--taxonomy", default=None)
    p.add_argument("-o", "--out", required=True, help="plan CSV output")
    p.set_defaults(handler=cmd_plan)

    p = sub.add_parser("propagate", help="propagate registers along the supply chain")
    p.add_argument("-g", "--graph", required=True, help="supply-chain graph file")
    p.add_argument("-r", "--registers", required=True, help="structured registers file")
    p.add_argument("--max-hops", type=int, default=3)
    p.add_argument("--default-empty", action="store_true",
                   help="treat graph nodes missing from the registers file as empty")
    p.add_argument("-o", "--out", required=True, help="propagated entries output")
    p.set_defaults(handler=cmd_propagate)

    p = sub.add_parser("portfolio", help="portfolio risk-overlap analysis")
    p.add_argument("-p", "--portfolio", required=True, help="portfolio file")
    p.add_argument("--portfolio-id", default=None)
    p.add_argument("-r", "--registers", required=True, help="structured registers file")
    p.add_argument("-o", "--out", required=True, help="overlap matrix CSV output")
    p.set_defaults(handler=cmd_portfolio)

    p = sub.add_parser("eval-pool", help="pooled precision/recall evaluation")
    p.add_argument("--system", action="append", required=True,
                   metavar="NAME=registers.jsonl")
    p.add_argument("--pool", required=True, help="pool judgment file")
    p.add_argument("--entity", required=True)
    p.add_argument("-o", "--out", default=None, help="optional metrics CSV output")
    p.set_defaults(handler=cmd_eval_pool)

    p = sub.add_parser("omega", help="dynamic event universe demo / queries")
    p.add_argument("--log", default=None, help="timeline append log (t TAB outcome)")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--observe", action="append", default=None, metavar="T:OUTCOME")
    p.add_argument("--at", type=int, default=None, help="print the universe at time t")
    p.add_argument("--estimate", default=None, metavar="T:OUTCOME")
    p.set_defaults(handler=cmd_omega)

    p = sub.add_parser("serve", help="run the analyst review HTTP service")
    p.add_argument("--store", required=True, help="persistence directory")
    p.add_argument("--config", default=None, help="config file (default: store/config.json)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8400)
    p.set_defaults(handler=cmd_serve)

    p = sub.add_parser("demo", help="materialize the bundled demo store")
    p.add_argument("--store", required=True, help="persistence directory")
    p.set_defaults(handler=cmd_demo)

    return parser


def _append_run_record(path: str, command: str, args: argparse.Namespace,
                       inputs: list[Path], outputs: list[Path], elapsed: float) -> None:
    flags = {k: v for k, v in vars(args).items()
             if k not in ("handler", "run_log") and not callable(v)}
    record = {
        "run_id": uuid.uuid4().hex,
        "stage": command,
        "started_at": datetime.now(timezone.utc).isoformat(),
        "wall_clock_seconds": round(elapsed, 6),
        "config": flags,
        "inputs": {str(p): _sha256(p) for p in inputs if p.exists()},
        "outputs": {str(p): _sha256(p) for p in outputs if p.exists()},
    }
    log = Path(path)
    log.parent.mkdir(parents=True, exist_ok=True)
    with log.open("a", encoding="utf-8") as fh:
        fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        inputs, outputs = args.handler(args)
    except (ValueError, CorpusError, FileNotFoundError, KeyError) as exc:
        print(f"riskmine {args.command}: error: {exc}", file=sys.stderr)
        return 1
    if args.run_log:
        _append_run_record(args.run_log, args.command, args,
                           inputs, outputs, time.perf_counter() - started)
    return 0


if __name__ == "__main__":
    sys.exit(main())
