from __future__ import annotations

import random
from dataclasses import replace
from datetime import datetime, timezone

import numpy as np
import pytest

from riskmine import fixtures
from riskmine.relation import (JUDGMENT_UNREVIEWED, LABEL_NEGATIVE,
                               LABEL_POSITIVE, LabeledExample,
                               RelationClassifier, RelationModel, RiskMention,
                               classify, dedupe_examples,
                               featurize, incorporate_judgments,
                               load_model, loss_and_gradient, save_model,
                               sigmoid, train)

UTC = timezone.utc
LABELED_AT = datetime(2015, 6, 1, tzinfo=UTC)


def example_from(pair, label):
    return LabeledExample(pair=pair, label=label, annotator="t", labeled_at=LABELED_AT)


class TestFeaturize:
    def test_sentence_a_hand_derived(self, paper_pairs, demo_taxonomy):
        a, _b = paper_pairs
        features = featurize(a, demo_taxonomy)
        assert features["between=are"] == 1.0
        assert features["between=facing"] == 1.0
        assert features["between=a"] == 1.0
        assert features["order=company-first"] == 1.0
        assert features["dist=1-3"] == 1.0
        assert features["right1=,"] == 1.0
        assert features["right2=said"] == 1.0
        assert features["risk=fine"] == 1.0
        assert features["riskparent=legal risk"] == 1.0
        assert "possessive" not in features
        assert not any(k.startswith("left") for k in features)

    def test_sentence_b_hand_derived(self, paper_pairs, demo_taxonomy):
        _a, b = paper_pairs
        features = featurize(b, demo_taxonomy)
        assert features["order=risk-first"] == 1.0
        assert features["between=,"] == 1.0
        assert features["between=said"] == 1.0
        assert features["possessive"] == 1.0
        assert features["left1=feel"] == 1.0
        assert features["left2=i"] == 1.0
        assert features["right1='s"] == 1.0
        assert features["right2=bill"] == 1.0
        assert features["dist=1-3"] == 1.0

    def test_adjacent_spans_bucket_zero_empty_between(self, paper_pairs):
        a, _b = paper_pairs
        shifted = replace(a, company=replace(a.company, token_start=3, token_end=4))
        features = featurize(shifted)
        assert features["dist=0"] == 1.0
        assert not any(k.startswith("between=") for k in features)

    def test_distance_buckets(self, paper_pairs):
        a, _b = paper_pairs  # company [0,1), risk [4,5): gap 3
        assert featurize(a)["dist=1-3"] == 1.0
        wide = replace(a, risk=replace(a.risk, token_start=8, token_end=9))
        assert featurize(wide)["dist=4-7"] == 1.0

    def test_dangling_span_is_an_error(self, paper_pairs):
        a, _b = paper_pairs
        broken = replace(a, risk=replace(a.risk, token_start=40, token_end=41))
        with pytest.raises(ValueError, match="dangles"):
            featurize(broken)

    def test_without_taxonomy_no_parent_features(self, paper_pairs):
        a, _b = paper_pairs
        assert not any(k.startswith("riskparent=") for k in featurize(a))


def separable_examples(n=200, seed=1):
    """One feature decides the label; everything else is noise."""
    rng = random.Random(seed)
    rows, labels = [], []
    for i in range(n):
        label = i % 2
        fv = {"signal": 1.0} if label else {}
        fv[f"noise={rng.randrange(8)}"] = 1.0
        rows.append(fv)
        labels.append(label)
    return rows, labels


class TestRelationClassifier:
    def test_learns_separable_signal(self):
        rows, labels = separable_examples()
        clf = RelationClassifier(max_epochs=2000, tol=1e-9).fit(rows, labels)
        assert clf.weights_["signal"] > 0
        held_rows, held_labels = separable_examples(n=50, seed=2)
        assert list(clf.predict(held_rows)) == held_labels

    def test_degenerate_labels_rejected(self):
        with pytest.raises(ValueError, match="degenerate labels"):
            RelationClassifier().fit([{"a": 1.0}, {"b": 1.0}], [1, 1])

    def test_deterministic_bitwise(self):
        rows, labels = separable_examples()
        w1 = RelationClassifier().fit(rows, labels).weights_
        w2 = RelationClassifier().fit(rows, labels).weights_
        assert w1 == w2

    def test_unseen_features_ignored(self):
        rows, labels = separable_examples()
        clf = RelationClassifier().fit(rows, labels)
        base = clf.decision_function([{"signal": 1.0}])[0]
        with_unseen = clf.decision_function([{"signal": 1.0, "never-seen": 5.0}])[0]
        assert base == with_unseen

    def test_sklearn_param_protocol(self):
        clf = RelationClassifier(learning_rate=0.2)
        params = clf.get_params()
        assert params["learning_rate"] == 0.2
        clf.set_params(l2=0.5)
        assert clf.l2 == 0.5

    def test_probability_bounds_and_monotonicity(self):
        rows, labels = separable_examples()
        clf = RelationClassifier().fit(rows, labels)
        rng = random.Random(3)
        scores = []
        for _ in range(100):
            fv = {f: rng.uniform(0, 2) for f in rng.sample(sorted(clf.weights_), 3)}
            scores.append((clf.decision_function([fv])[0], clf.predict_proba([fv])[0, 1]))
        for z, p in scores:
            assert 0.0 <= p <= 1.0
        ordered = sorted(scores)
        for (z1, p1), (z2, p2) in zip(ordered, ordered[1:]):
            assert p1 <= p2 + 1e-15


class TestGradient:
    def test_analytic_matches_central_differences(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            n, d = rng.integers(2, 10), rng.integers(1, 6)
            X = rng.normal(size=(n, d))
            y = rng.integers(0, 2, size=n).astype(float)
            sw = np.ones(n)
            w = rng.normal(size=d)
            b = float(rng.normal())
            l2 = float(rng.uniform(0, 0.1))
            _loss, grad_w, grad_b = loss_and_gradient(X, y, sw, w, b, l2)
            h = 1e-5
            for j in range(d):
                e = np.zeros(d)
                e[j] = h
                lp, _, _ = loss_and_gradient(X, y, sw, w + e, b, l2)
                lm, _, _ = loss_and_gradient(X, y, sw, w - e, b, l2)
                numeric = (lp - lm) / (2 * h)
                rel = abs(grad_w[j] - numeric) / max(abs(grad_w[j]), abs(numeric), 1e-8)
                assert rel < 1e-5
            lp, _, _ = loss_and_gradient(X, y, sw, w, b + h, l2)
            lm, _, _ = loss_and_gradient(X, y, sw, w, b - h, l2)
            numeric_b = (lp - lm) / (2 * h)
            assert abs(grad_b - numeric_b) / max(abs(grad_b), abs(numeric_b), 1e-8) < 1e-5

    def test_small_instance_matches_grid_search_oracle(self):
        # Exhaustive grid over (weight, bias) for single-feature problems:
        # gradient descent must reach the same loss as the best grid point.
        rng = np.random.default_rng(7)
        for trial in range(6):
            n = int(rng.integers(4, 13))
            x = rng.normal(size=n)
            y = (x + rng.normal(scale=0.5, size=n) > 0).astype(float)
            if len(set(y.tolist())) < 2:
                y[0] = 1.0 - y[0]
            l2 = 1e-2
            # dense grid, vectorized
            ws = np.linspace(-8, 8, 1601)
            bs = np.linspace(-8, 8, 1601)
            W, B = np.meshgrid(ws, bs, indexing="ij")
            Z = W[..., None] * x[None, None, :] + B[..., None]
            losses = np.mean(np.logaddexp(0.0, np.where(y > 0.5, -Z, Z)), axis=-1) \
                + 0.5 * l2 * W ** 2
            best_grid = float(losses.min())

            rows = [{"x": float(v)} for v in x]
            clf = RelationClassifier(learning_rate=0.5, l2=l2,
                                     max_epochs=20000, tol=1e-10).fit(rows, y.astype(int))
            w_fit = np.array([clf.weights_["x"]])
            z = x * w_fit[0] + clf.bias_
            fit_loss = float(np.mean(np.logaddexp(0.0, np.where(y > 0.5, -z, z)))
                             + 0.5 * l2 * w_fit[0] ** 2)
            assert abs(fit_loss - best_grid) < 1e-3


class TestTrain:
    def test_train_on_fixture_is_deterministic(self, fixture_examples, demo_taxonomy):
        m1 = train(fixture_examples, taxonomy=demo_taxonomy)
        m2 = train(fixture_examples, taxonomy=demo_taxonomy)
        assert m1.weights == m2.weights
        assert m1.bias == m2.bias
        assert m1.manifest == m2.manifest

    def test_single_class_rejected(self, fixture_examples):
        positives = [e for e in fixture_examples if e.label == LABEL_POSITIVE]
        with pytest.raises(ValueError, match="degenerate labels"):
            train(positives[:10])

    def test_version_increments_with_previous(self, fixture_examples, demo_taxonomy):
        base = train(fixture_examples[:50], taxonomy=demo_taxonomy)
        nxt = train(fixture_examples[:60], taxonomy=demo_taxonomy, previous=base)
        assert (base.model_version, nxt.model_version) == (1, 2)


class TestClassify:
    def test_paper_sentences_discriminated(self, trained_model, paper_pairs, demo_taxonomy):
        a, b = paper_pairs
        assert classify(trained_model, a, demo_taxonomy).verdict == "ACCEPTED"
        assert classify(trained_model, b, demo_taxonomy).verdict == "REJECTED"

    def test_zero_weight_model_scores_half_and_accepts(self, paper_pairs):
        a, _b = paper_pairs
        model = RelationModel(model_version=1, weights={}, bias=0.0,
                              threshold=0.5, manifest="empty")
        mention = classify(model, a)
        assert mention.score == 0.5
        assert mention.verdict == "ACCEPTED"  # score >= threshold
        assert mention.judgment == JUDGMENT_UNREVIEWED

    def test_verdict_threshold_consistency_random_models(self, paper_pairs):
        a, _b = paper_pairs
        rng = random.Random(5)
        features = sorted(featurize(a))
        for _ in range(100):
            weights = {f: rng.uniform(-3, 3) for f in features}
            model = RelationModel(model_version=1, weights=weights,
                                  bias=rng.uniform(-2, 2),
                                  threshold=rng.uniform(0.05, 0.95), manifest="r")
            mention = classify(model, a)
            assert 0.0 <= mention.score <= 1.0
            assert (mention.verdict == "ACCEPTED") == (mention.score >= model.threshold)


class TestIncorporateJudgments:
    def test_systematic_false_positives_score_lower_after(self, demo_taxonomy,
                                                          fixture_examples):
        # Train WITHOUT the "elsewhere was no concern" negatives, then feed
        # ten of them back as judgments: their scores must strictly drop.
        pattern = "elsewhere was no concern"
        held_out = [e for e in fixture_examples if pattern in e.pair.snippet][:10]
        assert len(held_out) == 10
        rest = [e for e in fixture_examples if pattern not in e.pair.snippet]
        base = train(rest, taxonomy=demo_taxonomy)
        judged = [replace(e, annotator="analyst") for e in held_out]
        retrained = incorporate_judgments(base, judged, taxonomy=demo_taxonomy)
        assert retrained.model_version == base.model_version + 1
        for example in held_out:
            before = classify(base, example.pair, demo_taxonomy).score
            after = classify(retrained, example.pair, demo_taxonomy).score
            assert after < before

    def test_empty_judgments_rejected(self, trained_model):
        with pytest.raises(ValueError, match="non-empty"):
            incorporate_judgments(trained_model, [])

    def test_duplicate_judgment_dedupes_but_increments_version(
            self, fixture_examples, demo_taxonomy):
        base = train(fixture_examples[:80], taxonomy=demo_taxonomy)
        duplicate = base.training_examples[0]
        retrained = incorporate_judgments(base, [duplicate], taxonomy=demo_taxonomy)
        assert retrained.model_version == base.model_version + 1
        assert len(retrained.training_examples) == len(base.training_examples)
        assert retrained.weights == base.weights  # identical data, identical fit

    def test_judgment_overrides_old_label_for_same_pair(self, fixture_examples,
                                                        demo_taxonomy):
        base = train(fixture_examples[:80], taxonomy=demo_taxonomy)
        flipped_label = (LABEL_NEGATIVE
                         if base.training_examples[0].label == LABEL_POSITIVE
                         else LABEL_POSITIVE)
        flipped = replace(base.training_examples[0], label=flipped_label)
        merged = dedupe_examples(list(base.training_examples) + [flipped])
        by_id = {e.pair.pair_id: e for e in merged}
        assert by_id[flipped.pair.pair_id].label == flipped_label


class TestModelFile:
    def test_round_trip(self, trained_model, tmp_path, paper_pairs, demo_taxonomy):
        path = tmp_path / "model.tsv"
        save_model(trained_model, path)
        loaded = load_model(path)
        assert loaded.model_version == trained_model.model_version
        assert loaded.threshold == trained_model.threshold
        assert loaded.manifest == trained_model.manifest
        assert loaded.weights == trained_model.weights
        assert loaded.bias == trained_model.bias
        a, b = paper_pairs
        assert classify(loaded, a, demo_taxonomy).score \
            == classify(trained_model, a, demo_taxonomy).score

    def test_layout_header_then_weights_then_bias(self, trained_model, tmp_path):
        path = tmp_path / "model.tsv"
        save_model(trained_model, path)
        lines = path.read_text().splitlines()
        assert lines[0].startswith("version\t")
        assert lines[1].startswith("threshold\t")
        assert lines[2].startswith("manifest\t")
        assert lines[-1].startswith("bias\t")
        assert len(lines) == 3 + len(trained_model.weights) + 1

    def test_missing_header_rejected(self, tmp_path):
        path = tmp_path / "model.tsv"
        path.write_text("version\t1\nbias\t0.0\n")
        with pytest.raises(ValueError, match="missing"):
            load_model(path)


def test_sigmoid_stability():
    assert sigmoid(0.0) == 0.5
    assert sigmoid(1000.0) == 1.0
    assert sigmoid(-1000.0) == pytest.approx(0.0)
    assert 0.0 < sigmoid(-30) < sigmoid(30) < 1.0


def test_mention_score_bounds_validated(paper_pairs):
    a, _b = paper_pairs
    with pytest.raises(ValueError):
        RiskMention(pair=a, score=1.5, verdict="ACCEPTED")


def test_fixture_examples_shape(fixture_examples):
    assert len(fixture_examples) == 400
    labels = [e.label for e in fixture_examples]
    assert labels.count(LABEL_POSITIVE) == 200
    assert labels.count(LABEL_NEGATIVE) == 200
    snippets = {e.pair.snippet for e in fixture_examples}
    assert fixtures.PAPER_SENTENCE_A not in snippets
    a, b = fixtures.paper_pairs()
    assert a.snippet not in snippets
    assert b.snippet not in snippets
