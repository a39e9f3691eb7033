import numpy as np
import pytest

from wlda.corpus import (
    BowDocument,
    Corpus,
    CorpusFormatError,
    SyntheticSpec,
    Vocabulary,
    generate_synthetic,
    load_corpus,
    load_text,
    mean_topic_overlap,
    save_corpus,
)


class TestBowDocument:
    def test_totals_and_dense(self):
        doc = BowDocument({0: 2, 3: 1})
        assert doc.total == 3
        np.testing.assert_array_equal(doc.dense(5), [2, 0, 0, 1, 0])

    def test_rejects_bad_entries(self):
        with pytest.raises(ValueError):
            BowDocument({0: 0})
        with pytest.raises(ValueError):
            BowDocument({-1: 2})

    def test_dense_range_check(self):
        with pytest.raises(ValueError):
            BowDocument({7: 1}).dense(5)

    def test_from_tokens(self):
        doc = BowDocument.from_tokens([3, 1, 3, 3])
        assert doc.counts == {1: 1, 3: 3}


def test_vocabulary_rejects_duplicates():
    with pytest.raises(ValueError):
        Vocabulary(["a", "b", "a"])


class TestGenerateSynthetic:
    def test_degenerate_length_law_single_doc(self):
        spec = SyntheticSpec(vocab_size=10, num_topics=2, num_docs=1, mean_doc_length=0.0, seed=1)
        corpus = generate_synthetic(spec)
        assert len(corpus.docs) == 1
        assert corpus.docs[0].total == 1

    def test_documents_are_nonempty_and_in_range(self):
        spec = SyntheticSpec(vocab_size=20, num_topics=3, num_docs=200, mean_doc_length=5.0, seed=2)
        corpus = generate_synthetic(spec)
        assert len(corpus.docs) == 200
        for doc in corpus.docs:
            assert doc.total >= 1
            assert all(0 <= w < 20 for w in doc.counts)

    def test_ground_truth_is_valid(self):
        corpus = generate_synthetic(SyntheticSpec(vocab_size=25, num_topics=4, num_docs=50, seed=3))
        truth = corpus.truth
        np.testing.assert_allclose(truth.topic_word.sum(axis=1), 1.0, atol=1e-9)
        np.testing.assert_allclose(truth.doc_topic.sum(axis=1), 1.0, atol=1e-9)
        assert np.all(truth.topic_word >= 0) and np.all(truth.doc_topic >= 0)

    def test_deterministic_given_seed(self):
        spec = SyntheticSpec(vocab_size=15, num_topics=2, num_docs=30, seed=11)
        a = generate_synthetic(spec)
        b = generate_synthetic(spec)
        assert [d.counts for d in a.docs] == [d.counts for d in b.docs]
        np.testing.assert_array_equal(a.truth.topic_word, b.truth.topic_word)

    def test_default_spec_topics_are_separated(self):
        corpus = generate_synthetic(SyntheticSpec(seed=0))
        assert mean_topic_overlap(corpus.truth.topic_word, top=10) < 3.0

    def test_word_marginal_matches_topic_mixture(self):
        # Symmetric doc prior makes E[theta] uniform, so corpus frequencies
        # approach the equal-weight mixture of the topic rows.
        spec = SyntheticSpec(vocab_size=100, num_topics=5, num_docs=10000, seed=5)
        corpus = generate_synthetic(spec)
        counts = np.zeros(100)
        for doc in corpus.docs:
            for w, c in doc.counts.items():
                counts[w] += c
        empirical = counts / counts.sum()
        expected = corpus.truth.topic_word.mean(axis=0)
        assert np.abs(empirical - expected).sum() < 0.05

    def test_invalid_specs_rejected(self):
        with pytest.raises(ValueError):
            generate_synthetic(SyntheticSpec(num_docs=0))
        with pytest.raises(ValueError):
            generate_synthetic(SyntheticSpec(vocab_size=3, num_topics=4))
        with pytest.raises(ValueError):
            generate_synthetic(SyntheticSpec(doc_topic_alpha=0.0))


class TestCorpusRoundTrip:
    def test_synthetic_round_trip_is_exact(self, tmp_path):
        corpus = generate_synthetic(SyntheticSpec(vocab_size=12, num_topics=3, num_docs=20, seed=9))
        path = tmp_path / "c.txt"
        save_corpus(corpus, path)
        loaded = load_corpus(path)
        assert [d.counts for d in loaded.docs] == [d.counts for d in corpus.docs]
        assert loaded.vocab.words == corpus.vocab.words
        np.testing.assert_array_equal(loaded.truth.topic_word, corpus.truth.topic_word)
        np.testing.assert_array_equal(loaded.truth.doc_topic, corpus.truth.doc_topic)

    def test_round_trip_without_truth(self, tmp_path, tiny_corpus):
        path = tmp_path / "c.txt"
        save_corpus(tiny_corpus, path)
        loaded = load_corpus(path)
        assert loaded.truth is None
        assert [d.counts for d in loaded.docs] == [d.counts for d in tiny_corpus.docs]

    def test_version_mismatch_rejected(self, tmp_path, tiny_corpus):
        path = tmp_path / "c.txt"
        save_corpus(tiny_corpus, path)
        text = path.read_text().replace("wlda-corpus v1", "wlda-corpus v9", 1)
        path.write_text(text)
        with pytest.raises(CorpusFormatError, match="version"):
            load_corpus(path)

    def test_truncation_rejected(self, tmp_path, tiny_corpus):
        path = tmp_path / "c.txt"
        save_corpus(tiny_corpus, path)
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-2]) + "\n")
        with pytest.raises(CorpusFormatError):
            load_corpus(path)

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "c.txt"
        path.write_text("something else\n")
        with pytest.raises(CorpusFormatError, match="magic"):
            load_corpus(path)

    def test_document_order_preserved(self, tmp_path, tiny_corpus):
        path = tmp_path / "c.txt"
        save_corpus(tiny_corpus, path)
        loaded = load_corpus(path)
        assert loaded.docs[2].counts == {3: 2}


class TestLoadText:
    def test_basic_tokenization(self, tmp_path):
        path = tmp_path / "t.txt"
        path.write_text("a b A\n")
        corpus = load_text(path)
        assert corpus.vocab.words == ["a", "b"]
        assert corpus.docs[0].counts == {0: 2, 1: 1}

    def test_stopwords_removed(self, tmp_path):
        path = tmp_path / "t.txt"
        path.write_text("a b a\n")
        corpus = load_text(path, stopwords={"a"})
        assert corpus.vocab.words == ["b"]
        assert corpus.docs[0].counts == {0: 1}

    def test_min_count_prunes_singletons(self, tmp_path):
        path = tmp_path / "t.txt"
        path.write_text("cat dog\ncat bird\ncat dog\n")
        corpus = load_text(path, min_count=2)
        assert corpus.vocab.words == ["cat", "dog"]

    def test_empty_docs_dropped_with_warning(self, tmp_path):
        path = tmp_path / "t.txt"
        path.write_text("a a\nb b\na b\n")
        with pytest.warns(UserWarning, match="dropped 1"):
            corpus = load_text(path, stopwords={"b"})
        assert len(corpus.docs) == 2

    def test_everything_pruned_is_an_error(self, tmp_path):
        path = tmp_path / "t.txt"
        path.write_text("a\nb\n")
        with pytest.raises(CorpusFormatError):
            load_text(path, min_count=5)
