import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import cooccurrence_oracle, npmi_oracle, precision_oracle, tu_oracle
from wlda import metrics
from wlda.corpus import BowDocument, Corpus, Vocabulary


def corpus_from_sets(word_sets, vocab_size):
    docs = [BowDocument({w: 1 for w in s}) for s in word_sets]
    return Corpus(docs, Vocabulary([f"w{i}" for i in range(vocab_size)]))


def random_topics(rng, k, top, vocab):
    return [sorted(rng.choice(vocab, size=top, replace=False).tolist()) for _ in range(k)]


class TestTopicUniqueness:
    def test_all_distinct_words(self):
        per, mean = metrics.topic_uniqueness([[0, 1], [2, 3], [4, 5]])
        assert per == [1.0, 1.0, 1.0] and mean == 1.0

    def test_fully_repetitive(self):
        per, mean = metrics.topic_uniqueness([[0, 1, 2]] * 4)
        np.testing.assert_allclose(per, 0.25)
        assert mean == pytest.approx(0.25)

    def test_two_topic_hand_case(self):
        per, mean = metrics.topic_uniqueness([[10, 11], [11, 12]])
        np.testing.assert_allclose(per, [0.75, 0.75])
        assert mean == pytest.approx(0.75)

    def test_matches_oracle_on_random_instances(self, rng):
        for _ in range(200):
            k = int(rng.integers(2, 6))
            top = int(rng.integers(1, 6))
            topics = random_topics(rng, k, top, 12)
            per, mean = metrics.topic_uniqueness(topics)
            oper, omean = tu_oracle(topics)
            np.testing.assert_allclose(per, oper, atol=1e-14)
            assert mean == pytest.approx(omean, abs=1e-14)

    def test_bounds(self, rng):
        for _ in range(100):
            k = int(rng.integers(2, 7))
            topics = random_topics(rng, k, 4, 10)
            per, mean = metrics.topic_uniqueness(topics)
            assert all(1.0 / k - 1e-12 <= t <= 1.0 + 1e-12 for t in per)
            assert 1.0 / k - 1e-12 <= mean <= 1.0 + 1e-12

    @given(st.data())
    @settings(max_examples=40)
    def test_invariant_under_permutations(self, data):
        k = data.draw(st.integers(2, 5))
        top = data.draw(st.integers(1, 4))
        pool = list(range(50))
        topics = [
            data.draw(st.lists(st.sampled_from(pool), min_size=top, max_size=top, unique=True))
            for _ in range(k)
        ]
        _, mean = metrics.topic_uniqueness(topics)
        topic_perm = data.draw(st.permutations(range(k)))
        shuffled = [list(reversed(topics[i])) for i in topic_perm]
        _, mean_shuffled = metrics.topic_uniqueness(shuffled)
        assert mean == pytest.approx(mean_shuffled, abs=1e-14)

    def test_rejects_duplicate_words_within_topic(self):
        with pytest.raises(ValueError):
            metrics.topic_uniqueness([[1, 1]])

    def test_rejects_ragged_topics(self):
        with pytest.raises(ValueError):
            metrics.topic_uniqueness([[1, 2], [3]])


class TestCooccurrenceIndex:
    def test_single_doc_pair(self):
        corpus = corpus_from_sets([{2, 5}], 6)
        index = metrics.build_cooccurrence_index(corpus, [2, 5])
        assert index.df(2) == index.df(5) == 1
        assert index.joint(2, 5) == index.joint(5, 2) == 1
        assert index.num_docs == 1

    def test_counts_match_quadratic_oracle(self, rng):
        sets = [set(rng.choice(15, size=rng.integers(1, 8), replace=False).tolist()) for _ in range(20)]
        corpus = corpus_from_sets(sets, 15)
        words = list(range(10))
        index = metrics.build_cooccurrence_index(corpus, words)
        odf, ojoint, od = cooccurrence_oracle(sets, words)
        assert od == index.num_docs
        for w in words:
            assert index.df(w) == odf.get(w, 0)
        for a in words:
            for b in words:
                if a < b:
                    assert index.joint(a, b) == ojoint.get((a, b), 0)

    def test_joint_bounded_by_marginals(self, rng):
        sets = [set(rng.choice(8, size=3, replace=False).tolist()) for _ in range(30)]
        corpus = corpus_from_sets(sets, 8)
        index = metrics.build_cooccurrence_index(corpus, range(8))
        for (a, b), j in index.joint_freq.items():
            assert j <= min(index.df(a), index.df(b))

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            metrics.build_cooccurrence_index(Corpus([], Vocabulary(["w0"])), [0])


class TestNpmi:
    def test_perfect_association(self):
        # the pair always co-occurs, but not in every document
        corpus = corpus_from_sets([{0, 1}, {0, 1}, {2}, {3}], 4)
        index = metrics.build_cooccurrence_index(corpus, [0, 1])
        assert metrics.npmi_pair(index, 0, 1) == pytest.approx(1.0)

    def test_zero_joint_scores_minus_one(self):
        corpus = corpus_from_sets([{0}, {1}], 2)
        index = metrics.build_cooccurrence_index(corpus, [0, 1])
        assert metrics.npmi_pair(index, 0, 1) == -1.0

    def test_pair_in_every_document_scores_zero(self):
        corpus = corpus_from_sets([{0, 1}, {0, 1}], 2)
        index = metrics.build_cooccurrence_index(corpus, [0, 1])
        assert metrics.npmi_pair(index, 0, 1) == 0.0

    @pytest.mark.filterwarnings("ignore:.*absent from the co-occurrence index")
    def test_matches_counting_oracle_on_toy_corpus(self, rng):
        for _ in range(50):
            sets = [set(rng.choice(10, size=rng.integers(2, 6), replace=False).tolist()) for _ in range(12)]
            corpus = corpus_from_sets(sets, 10)
            topics = [sorted(rng.choice(10, size=3, replace=False).tolist()) for _ in range(3)]
            words = sorted({w for t in topics for w in t})
            index = metrics.build_cooccurrence_index(corpus, words)
            per, mean = metrics.npmi(topics, index)
            oper, omean = npmi_oracle(topics, sets)
            np.testing.assert_allclose(per, oper, atol=1e-12)
            assert mean == pytest.approx(omean, abs=1e-12)

    def test_values_in_range_and_symmetric(self, rng):
        sets = [set(rng.choice(8, size=4, replace=False).tolist()) for _ in range(25)]
        corpus = corpus_from_sets(sets, 8)
        index = metrics.build_cooccurrence_index(corpus, range(8))
        for a in range(8):
            for b in range(a + 1, 8):
                v = metrics.npmi_pair(index, a, b)
                assert -1.0 - 1e-12 <= v <= 1.0 + 1e-12
                assert v == metrics.npmi_pair(index, b, a)

    def test_missing_words_warn_and_score_minus_one(self):
        corpus = corpus_from_sets([{0, 1}], 5)
        index = metrics.build_cooccurrence_index(corpus, [0, 1])
        with pytest.warns(UserWarning, match="absent"):
            per, _ = metrics.npmi([[3, 4]], index)
        assert per == [-1.0]


class TestRecoveryPrecision:
    def test_identity(self, rng):
        topics = random_topics(rng, 5, 10, 100)
        assert metrics.recovery_precision(topics, topics) == 1.0

    def test_permuted_truth_still_perfect(self, rng):
        topics = random_topics(rng, 5, 10, 100)
        permuted = [topics[i] for i in [3, 0, 4, 1, 2]]
        assert metrics.recovery_precision(topics, permuted) == 1.0

    def test_three_false_positives_over_five_topics(self, rng):
        truth = [list(range(10 * k, 10 * k + 10)) for k in range(5)]
        predicted = [list(t) for t in truth]
        # plant three words that are not in the matching truth topics
        predicted[0][9] = 73
        predicted[2][5] = 88
        predicted[4][0] = 91
        assert metrics.recovery_precision(predicted, truth) == pytest.approx(0.94)

    def test_matches_permutation_oracle(self, rng):
        for _ in range(100):
            k = int(rng.integers(2, 6))
            top = int(rng.integers(2, 6))
            pred = random_topics(rng, k, top, 20)
            truth = random_topics(rng, k, top, 20)
            assert metrics.recovery_precision(pred, truth) == pytest.approx(
                precision_oracle(pred, truth), abs=1e-14
            )

    def test_exhaustive_equals_assignment_on_k5(self, rng):
        for _ in range(100):
            pred = random_topics(rng, 5, 4, 25)
            truth = random_topics(rng, 5, 4, 25)
            overlap = metrics._overlap_matrix(pred, truth)
            assert metrics._best_total_overlap_exhaustive(overlap) == pytest.approx(
                metrics._best_total_overlap_assignment(overlap)
            )

    def test_assignment_path_used_for_large_k(self, rng):
        pred = random_topics(rng, 9, 3, 40)
        truth = random_topics(rng, 9, 3, 40)
        value = metrics.recovery_precision(pred, truth)
        overlap = metrics._overlap_matrix(pred, truth)
        assert value == pytest.approx(metrics._best_total_overlap_exhaustive(overlap) / 27)

    def test_shape_mismatch_rejected(self, rng):
        with pytest.raises(ValueError):
            metrics.recovery_precision(random_topics(rng, 3, 4, 20), random_topics(rng, 3, 5, 20))
        with pytest.raises(ValueError):
            metrics.recovery_precision(random_topics(rng, 3, 4, 20), random_topics(rng, 4, 4, 20))


class TestClassificationProbe:
    def test_one_hot_features_are_separable(self):
        labels = np.array([0, 1, 2, 0, 1, 2, 1, 0])
        feats = np.eye(3)[labels]
        assert metrics.classification_probe(feats, labels, feats, labels) == 1.0

    def test_shuffled_labels_score_at_chance(self, rng):
        n_train, n_test = 2000, 1000
        feats = rng.standard_normal((n_train + n_test, 5))
        labels = rng.integers(0, 2, size=n_train + n_test)
        acc = metrics.classification_probe(
            feats[:n_train], labels[:n_train], feats[n_train:], labels[n_train:]
        )
        assert abs(acc - 0.5) < 0.05

    def test_true_mixtures_predict_their_argmax(self, rng):
        from wlda.simplex import sample_dirichlet

        thetas = sample_dirichlet(np.full(4, 0.1), rng, size=1200)
        labels = thetas.argmax(axis=1)
        acc = metrics.classification_probe(thetas[:1000], labels[:1000], thetas[1000:], labels[1000:])
        assert acc > 0.9
        # brute-force nearest-vertex classifier as a sanity oracle
        vertex_acc = np.mean(thetas[1000:].argmax(axis=1) == labels[1000:])
        assert vertex_acc == 1.0

    def test_deterministic(self, rng):
        feats = rng.standard_normal((40, 3))
        labels = rng.integers(0, 3, size=40)
        a = metrics.classification_probe(feats[:30], labels[:30], feats[30:], labels[30:])
        b = metrics.classification_probe(feats[:30], labels[:30], feats[30:], labels[30:])
        assert a == b

    def test_label_validation(self, rng):
        feats = rng.standard_normal((4, 2))
        with pytest.raises(ValueError):
            metrics.classification_probe(feats, [0, 1, 0, -1], feats, [0, 1, 0, 1])
        with pytest.raises(ValueError):
            metrics.classification_probe(feats, [0, 1], feats, [0, 1, 0, 1])


class TestMetricsReport:
    def test_formats_carry_identical_numbers(self):
        report = metrics.MetricsReport(
            per_topic_tu=[0.9, 0.8],
            mean_tu=0.8500000000000001,
            per_topic_npmi=[0.1, -0.2],
            mean_npmi=-0.04999999999999999,
            precision=0.94,
        )
        payload = json.loads(report.to_json())
        csv_lines = report.to_csv().strip().splitlines()
        csv_row = dict(zip(csv_lines[0].split(","), csv_lines[1].split(",")))
        text = report.to_text()
        for name in ("mean_tu", "mean_npmi", "precision"):
            value = payload[name]
            assert float(csv_row[name]) == value
            assert repr(value) in text

    def test_optional_fields_render_empty(self):
        report = metrics.MetricsReport(per_topic_tu=[1.0], mean_tu=1.0)
        row = report.to_csv().strip().splitlines()[1]
        assert row.split(",")[1:] == ["", "", ""]
        assert json.loads(report.to_json())["mean_npmi"] is None

    def test_unknown_format_rejected(self):
        report = metrics.MetricsReport(per_topic_tu=[1.0], mean_tu=1.0)
        with pytest.raises(ValueError):
            report.render("yaml")
