"""Supervised filtering of candidate (company, risk) pairs.

A candidate pair only expresses a real risk exposure when the sentential
context supports it: "Microsoft are facing a fine" does, "I feel fine, said
Microsoft's Bill Gates" does not. This module turns each pair into sparse
lexical/context features and trains an L2-regularized logistic regression
from scratch with deterministic full-batch gradient descent, so a model is
a pure function of its training manifest and can be audited weight by
weight.

Analyst judgments flow back in through incorporate_judgments, which retrains
on the original examples plus the new ones and bumps the model version;
older versions stay around for audit.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .corpus import parse_timestamp
from .tagger import CandidatePair, pair_from_dict, pair_to_dict
from .taxonomy import TaxonomyGraph
from .validation import check_fitted, require

LABEL_POSITIVE = "POSITIVE"
LABEL_NEGATIVE = "NEGATIVE"

VERDICT_ACCEPTED = "ACCEPTED"
VERDICT_REJECTED = "REJECTED"

JUDGMENT_CORRECT = "CORRECT"
JUDGMENT_INCORRECT = "INCORRECT"
JUDGMENT_UNREVIEWED = "UNREVIEWED"

_DISTANCE_BUCKETS = ((0, "0"), (3, "1-3"), (7, "4-7"))


@dataclass(frozen=True)
class LabeledExample:
    pair: CandidatePair
    label: str
    annotator: str
    labeled_at: datetime

    def __post_init__(self) -> None:
        require(self.label in (LABEL_POSITIVE, LABEL_NEGATIVE),
                f"label must be {LABEL_POSITIVE} or {LABEL_NEGATIVE}, got {self.label!r}")


@dataclass(frozen=True)
class RiskMention:
    pair: CandidatePair
    score: float
    verdict: str
    judgment: str = JUDGMENT_UNREVIEWED

    def __post_init__(self) -> None:
        require(0.0 <= self.score <= 1.0, "score must lie in [0, 1]")

    @property
    def accepted(self) -> bool:
        """Effective acceptance: an analyst judgment overrides the verdict."""
        if self.judgment == JUDGMENT_CORRECT:
            return True
        if self.judgment == JUDGMENT_INCORRECT:
            return False
        return self.verdict == VERDICT_ACCEPTED


def featurize(pair: CandidatePair, taxonomy: TaxonomyGraph | None = None) -> dict[str, float]:
    """Sparse features over the pair's sentential context.

    Emits the bag of tokens between the two spans, a token-distance bucket,
    span order, two tokens of outer context on each side, a possessive-'s
    indicator, the risk phrase identity, and the risk phrase's taxonomy
    parents when a taxonomy is supplied.
    """
    tokens = pair.snippet_tokens
    for span in (pair.company, pair.risk):
        if span.token_end > len(tokens):
            raise ValueError(
                f"pair {pair.pair_id}: span [{span.token_start}, {span.token_end}) "
                f"dangles outside its {len(tokens)}-token sentence")
    first, second = sorted((pair.company, pair.risk), key=lambda s: s.token_start)
    features: dict[str, float] = {}
    for tok in tokens[first.token_end:second.token_start]:
        key = f"between={tok.lower()}"
        features[key] = features.get(key, 0.0) + 1.0
    gap = second.token_start - first.token_end
    features[f"dist={_bucket(gap)}"] = 1.0
    order = "company-first" if first is pair.company else "risk-first"
    features[f"order={order}"] = 1.0
    if first.token_start >= 1:
        features[f"left1={tokens[first.token_start - 1].lower()}"] = 1.0
    if first.token_start >= 2:
        features[f"left2={tokens[first.token_start - 2].lower()}"] = 1.0
    if second.token_end < len(tokens):
        features[f"right1={tokens[second.token_end].lower()}"] = 1.0
    if second.token_end + 1 < len(tokens):
        features[f"right2={tokens[second.token_end + 1].lower()}"] = 1.0
    for span in (pair.company, pair.risk):
        nxt = span.token_end
        if nxt < len(tokens) and tokens[nxt].lower() == "'s":
            features["possessive"] = 1.0
    features[f"risk={pair.risk_type_id}"] = 1.0
    if taxonomy is not None and pair.risk_type_id in taxonomy.nodes:
        for parent in taxonomy.parents(pair.risk_type_id):
            features[f"riskparent={parent}"] = 1.0
    return features


def _bucket(gap: int) -> str:
    for bound, name in _DISTANCE_BUCKETS:
        if gap <= bound:
            return name
    return "8+"


# ---------------------------------------------------------------------------
# Logistic regression, from scratch
# ---------------------------------------------------------------------------


def sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def loss_and_gradient(X: np.ndarray, y: np.ndarray, sample_weight: np.ndarray,
                      weights: np.ndarray, bias: float, l2: float
                      ) -> tuple[float, np.ndarray, float]:
    """Weighted mean logistic loss with L2 on the weights (bias excluded),
    and its analytic gradient."""
    z = X @ weights + bias
    # log(1 + exp(-y*z)) computed stably via logaddexp.
    signed = np.where(y > 0.5, z, -z)
    losses = np.logaddexp(0.0, -signed)
    n = len(y)
    loss = float(np.sum(sample_weight * losses) / n + 0.5 * l2 * np.dot(weights, weights))
    p = 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))
    err = sample_weight * (p - y) / n
    grad_w = X.T @ err + l2 * weights
    grad_b = float(np.sum(err))
    return loss, grad_w, grad_b


class RelationClassifier(BaseEstimator, ClassifierMixin):
    """L2-regularized logistic regression over sparse feature dicts.

    Deterministic: zero-initialized weights, full-batch gradient descent
    with a fixed learning rate, stopping at max_epochs or when the gradient
    norm drops below tol. Identical inputs produce identical weights.
    """

    def __init__(self, learning_rate: float = 0.1, l2: float = 1e-4,
                 max_epochs: int = 500, tol: float = 1e-6,
                 threshold: float = 0.5, balance_classes: bool = False,
                 random_state: int = 42):
        self.learning_rate = learning_rate
        self.l2 = l2
        self.max_epochs = max_epochs
        self.tol = tol
        self.threshold = threshold
        self.balance_classes = balance_classes
        self.random_state = random_state

    def fit(self, X: Sequence[Mapping[str, float]], y: Sequence[int]) -> "RelationClassifier":
        require(len(X) == len(y) > 0, "need at least one labeled example")
        labels = np.asarray([int(v) for v in y], dtype=np.float64)
        if len(set(labels.tolist())) < 2:
            raise ValueError("degenerate labels: training data must contain both classes")
        feature_ids = sorted({f for fv in X for f in fv})
        index = {f: i for i, f in enumerate(feature_ids)}
        dense = np.zeros((len(X), len(feature_ids)), dtype=np.float64)
        for row, fv in enumerate(X):
            for f, v in fv.items():
                dense[row, index[f]] = float(v)
        if self.balance_classes:
            n, n_pos = len(labels), float(labels.sum())
            w_pos, w_neg = n / (2.0 * n_pos), n / (2.0 * (n - n_pos))
            sample_weight = np.where(labels > 0.5, w_pos, w_neg)
        else:
            sample_weight = np.ones(len(labels))
        weights = np.zeros(len(feature_ids), dtype=np.float64)
        bias = 0.0
        n_iter = 0
        for n_iter in range(1, self.max_epochs + 1):
            loss, grad_w, grad_b = loss_and_gradient(
                dense, labels, sample_weight, weights, bias, self.l2)
            grad_norm = math.sqrt(float(np.dot(grad_w, grad_w)) + grad_b * grad_b)
            if grad_norm < self.tol:
                break
            weights -= self.learning_rate * grad_w
            bias -= self.learning_rate * grad_b
        self.classes_ = np.array([0, 1])
        self.feature_index_ = index
        self.weights_ = {f: float(weights[i]) for f, i in index.items()}
        self.bias_ = float(bias)
        self.n_iter_ = n_iter
        return self

    def decision_function(self, X: Sequence[Mapping[str, float]]) -> np.ndarray:
        check_fitted(self, "weights_", "bias_")
        scores = []
        for fv in X:
            z = self.bias_
            for f, v in fv.items():
                w = self.weights_.get(f)
                if w is not None:  # unseen features are ignored
                    z += w * float(v)
            scores.append(z)
        return np.asarray(scores)

    def predict_proba(self, X: Sequence[Mapping[str, float]]) -> np.ndarray:
        p = np.array([sigmoid(z) for z in self.decision_function(X)])
        return np.column_stack([1.0 - p, p])

    def predict(self, X: Sequence[Mapping[str, float]]) -> np.ndarray:
        return (self.predict_proba(X)[:, 1] >= self.threshold).astype(int)


# ---------------------------------------------------------------------------
# Versioned models
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrainingConfig:
    learning_rate: float = 0.1
    l2: float = 1e-4
    max_epochs: int = 500
    tol: float = 1e-6
    threshold: float = 0.5
    balance_classes: bool = False
    seed: int = 42

    def to_dict(self) -> dict:
        return {
            "learning_rate": self.learning_rate, "l2": self.l2,
            "max_epochs": self.max_epochs, "tol": self.tol,
            "threshold": self.threshold, "balance_classes": self.balance_classes,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class RelationModel:
    model_version: int
    weights: dict[str, float]
    bias: float
    threshold: float
    manifest: str
    config: TrainingConfig = field(default_factory=TrainingConfig)
    # Retained in memory so judgments can be folded into a retrain; the
    # flat model file stores only the weights.
    training_examples: tuple[LabeledExample, ...] = ()

    def score(self, features: Mapping[str, float]) -> float:
        z = self.bias
        for f, v in features.items():
            w = self.weights.get(f)
            if w is not None:
                z += w * float(v)
        return sigmoid(z)


def _example_fingerprint(example: LabeledExample) -> dict:
    pair = example.pair
    return {
        "pair_id": pair.pair_id,
        "snippet": pair.snippet,
        "company": [pair.company.token_start, pair.company.token_end, pair.entity_id],
        "risk": [pair.risk.token_start, pair.risk.token_end, pair.risk_type_id],
        "label": example.label,
    }


def training_manifest(examples: Sequence[LabeledExample], config: TrainingConfig) -> str:
    payload = {
        "examples": sorted((json.dumps(_example_fingerprint(e), sort_keys=True)
                            for e in examples)),
        "config": config.to_dict(),
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode("utf-8")).hexdigest()


def dedupe_examples(examples: Iterable[LabeledExample]) -> list[LabeledExample]:
    """Keep one example per pair_id; later entries win, so a fresh analyst
    judgment replaces an older label for the same pair."""
    by_pair: dict[str, LabeledExample] = {}
    for example in examples:
        by_pair[example.pair.pair_id] = example
    return [by_pair[pid] for pid in sorted(by_pair)]


def train(examples: Sequence[LabeledExample], config: TrainingConfig | None = None,
          taxonomy: TaxonomyGraph | None = None,
          previous: RelationModel | None = None) -> RelationModel:
    """Fit a new model version on the deduplicated examples."""
    config = config or TrainingConfig()
    deduped = dedupe_examples(examples)
    require(len(deduped) >= 1, "need at least one labeled example")
    clf = RelationClassifier(
        learning_rate=config.learning_rate, l2=config.l2,
        max_epochs=config.max_epochs, tol=config.tol,
        threshold=config.threshold, balance_classes=config.balance_classes,
        random_state=config.seed)
    X = [featurize(e.pair, taxonomy) for e in deduped]
    y = [1 if e.label == LABEL_POSITIVE else 0 for e in deduped]
    clf.fit(X, y)
    return RelationModel(
        model_version=(previous.model_version + 1) if previous else 1,
        weights=clf.weights_,
        bias=clf.bias_,
        threshold=config.threshold,
        manifest=training_manifest(deduped, config),
        config=config,
        training_examples=tuple(deduped),
    )


def classify(model: RelationModel, pair: CandidatePair,
             taxonomy: TaxonomyGraph | None = None) -> RiskMention:
    score = model.score(featurize(pair, taxonomy))
    verdict = VERDICT_ACCEPTED if score >= model.threshold else VERDICT_REJECTED
    return RiskMention(pair=pair, score=score, verdict=verdict)


def incorporate_judgments(model: RelationModel, judgments: Sequence[LabeledExample],
                          taxonomy: TaxonomyGraph | None = None) -> RelationModel:
    """Retrain on the original examples plus the judged ones; the returned
    model carries the next version number. The input model is untouched."""
    require(len(judgments) > 0, "judgments must be non-empty")
    merged = list(model.training_examples) + list(judgments)
    return train(merged, config=model.config, taxonomy=taxonomy, previous=model)


# ---------------------------------------------------------------------------
# Interchange formats
# ---------------------------------------------------------------------------


def save_model(model: RelationModel, path: str | Path) -> None:
    """Flat versioned format: header lines, `feature TAB weight` body, bias
    last. Feature ids always contain '=' or are bare indicator names, and
    never collide with the header keys."""
    lines = [
        f"version\t{model.model_version}",
        f"threshold\t{model.threshold!r}",
        f"manifest\t{model.manifest}",
    ]
    for feature in sorted(model.weights):
        lines.append(f"{feature}\t{model.weights[feature]!r}")
    lines.append(f"bias\t{model.bias!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> RelationModel:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    header: dict[str, str] = {}
    weights: dict[str, float] = {}
    bias = 0.0
    for line in lines:
        if not line.strip():
            continue
        key, value = line.split("\t", maxsplit=1)
        if key in ("version", "threshold", "manifest") and key not in header:
            header[key] = value
        elif key == "bias":
            bias = float(value)
        else:
            weights[key] = float(value)
    for needed in ("version", "threshold", "manifest"):
        require(needed in header, f"model file missing {needed!r} header")
    return RelationModel(
        model_version=int(header["version"]),
        weights=weights,
        bias=bias,
        threshold=float(header["threshold"]),
        manifest=header["manifest"],
    )


def example_to_dict(example: LabeledExample) -> dict:
    return {
        "pair": pair_to_dict(example.pair),
        "label": example.label,
        "annotator": example.annotator,
        "labeled_at": example.labeled_at.isoformat(),
    }


def example_from_dict(record: dict) -> LabeledExample:
    return LabeledExample(
        pair=pair_from_dict(record["pair"]),
        label=record["label"],
        annotator=record["annotator"],
        labeled_at=parse_timestamp(record["labeled_at"]),
    )


def dump_examples(examples: Iterable[LabeledExample]) -> Iterator[str]:
    for example in examples:
        yield json.dumps(example_to_dict(example), ensure_ascii=False)


def load_examples(lines: Iterable[str]) -> list[LabeledExample]:
    examples = []
    for line in lines:
        if line.strip():
            examples.append(example_from_dict(json.loads(line)))
    return examples


def mention_to_dict(mention: RiskMention) -> dict:
    return {
        "pair": pair_to_dict(mention.pair),
        "score": mention.score,
        "verdict": mention.verdict,
        "judgment": mention.judgment,
    }


def mention_from_dict(record: dict) -> RiskMention:
    return RiskMention(
        pair=pair_from_dict(record["pair"]),
        score=float(record["score"]),
        verdict=record["verdict"],
        judgment=record.get("judgment", JUDGMENT_UNREVIEWED),
    )
