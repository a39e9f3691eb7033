"""Bag-of-words corpora: synthetic generation with retained ground truth,
plain-text ingestion, and a line-oriented corpus file format.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .simplex import sample_dirichlet

Array = np.ndarray

CORPUS_MAGIC = "wlda-corpus"
CORPUS_VERSION = 1


class CorpusFormatError(ValueError):
    """Raised when a corpus file cannot be parsed."""


@dataclass
class Vocabulary:
    words: list[str]

    def __post_init__(self) -> None:
        self._index = {w: i for i, w in enumerate(self.words)}
        if len(self._index) != len(self.words):
            raise ValueError("vocabulary contains duplicate words")

    def __len__(self) -> int:
        return len(self.words)

    def id_of(self, word: str) -> int:
        return self._index[word]

    def __contains__(self, word: str) -> bool:
        return word in self._index


@dataclass
class BowDocument:
    """Sparse word-id -> count map with the cached total token count."""

    counts: dict[int, int]
    total: int = field(init=False)

    def __post_init__(self) -> None:
        for wid, c in self.counts.items():
            if wid < 0 or c < 1:
                raise ValueError(f"invalid bag entry {wid}:{c}")
        self.total = sum(self.counts.values())

    @classmethod
    def from_tokens(cls, token_ids) -> "BowDocument":
        ids, cnt = np.unique(np.asarray(token_ids, dtype=np.int64), return_counts=True)
        return cls({int(w): int(c) for w, c in zip(ids, cnt)})

    def dense(self, vocab_size: int) -> Array:
        x = np.zeros(vocab_size)
        for wid, c in self.counts.items():
            if wid >= vocab_size:
                raise ValueError(f"word id {wid} out of range for vocabulary of {vocab_size}")
            x[wid] = float(c)
        return x


@dataclass
class SyntheticGroundTruth:
    topic_word: Array  # (K, V), each row a distribution over the vocabulary
    doc_topic: Array   # (N, K), the theta that generated each document


@dataclass
class Corpus:
    docs: list[BowDocument]
    vocab: Vocabulary
    truth: SyntheticGroundTruth | None = None

    def __len__(self) -> int:
        return len(self.docs)

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    def dense_rows(self, indices) -> Array:
        """Stack the selected documents as a dense (len(indices), V) count matrix."""
        v = self.vocab_size
        out = np.zeros((len(indices), v))
        for r, i in enumerate(indices):
            for wid, c in self.docs[i].counts.items():
                out[r, wid] = float(c)
        return out


@dataclass
class SyntheticSpec:
    """Settings for the LDA-process generator.

    ``doc_topic_alpha`` is the symmetric concentration of the per-document
    topic mixture; ``topic_word_alpha`` the concentration used to draw the
    ground-truth topics themselves (small values give sparse, well-separated
    topics).  Document lengths are Poisson(``mean_doc_length``) clipped below
    at 1.
    """

    vocab_size: int = 100
    num_topics: int = 5
    doc_topic_alpha: float = 0.1
    num_docs: int = 10000
    mean_doc_length: float = 30.0
    topic_word_alpha: float = 0.05
    seed: int = 0

    def validate(self) -> None:
        if not (self.vocab_size >= self.num_topics >= 2):
            raise ValueError("need vocab_size >= num_topics >= 2")
        if self.num_docs < 1:
            raise ValueError("num_docs must be >= 1")
        # The effective length law max(1, Poisson(mean)) has mean >= 1 for any
        # non-negative Poisson mean; 0 gives the degenerate always-1 law.
        if self.mean_doc_length < 0:
            raise ValueError("mean document length must be non-negative")
        if self.doc_topic_alpha <= 0 or self.topic_word_alpha <= 0:
            raise ValueError("concentration parameters must be positive")


def _top_word_sets(topic_word: Array, top: int) -> list[set[int]]:
    return [set(np.argsort(-row, kind="stable")[:top].tolist()) for row in topic_word]


def mean_topic_overlap(topic_word: Array, top: int = 10) -> float:
    """Mean pairwise intersection size between the topics' top-``top`` word sets."""
    sets = _top_word_sets(topic_word, top)
    k = len(sets)
    if k < 2:
        return 0.0
    pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
    return float(np.mean([len(sets[i] & sets[j]) for i, j in pairs]))


def generate_synthetic(
    spec: SyntheticSpec,
    rng: np.random.Generator | None = None,
    max_separation_attempts: int = 20,
) -> Corpus:
    """Sample a corpus from the LDA generative process, keeping the ground truth.

    Topic rows are redrawn (from the same stream) if their top-10 word sets
    overlap too much on average, so that recovery against the truth is a
    meaningful test.  Deterministic given ``spec.seed`` (or the passed rng).
    """
    spec.validate()
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    v, k, n = spec.vocab_size, spec.num_topics, spec.num_docs

    # Disjoint top-10 sets are only possible with vocabulary to spare; for
    # cramped toy corpora the separation precondition is skipped.
    check_separation = v >= 2 * k * 10
    for attempt in range(max_separation_attempts):
        topic_word = sample_dirichlet(np.full(v, spec.topic_word_alpha), rng, size=k)
        if not check_separation or mean_topic_overlap(topic_word, top=10) < 3.0:
            break
    else:
        raise RuntimeError("could not draw sufficiently separated topics; lower topic_word_alpha")

    doc_topic = sample_dirichlet(np.full(k, spec.doc_topic_alpha), rng, size=n)
    lengths = np.maximum(1, rng.poisson(spec.mean_doc_length, size=n))
    topic_cum = np.cumsum(topic_word, axis=1)
    theta_cum = np.cumsum(doc_topic, axis=1)

    docs = []
    for d in range(n):
        length = int(lengths[d])
        z = np.searchsorted(theta_cum[d], rng.random(length), side="right")
        z = np.minimum(z, k - 1)
        w = (topic_cum[z] <= rng.random(length)[:, None]).sum(axis=1)
        w = np.minimum(w, v - 1)
        docs.append(BowDocument.from_tokens(w))

    vocab = Vocabulary([f"w{i}" for i in range(v)])
    return Corpus(docs, vocab, SyntheticGroundTruth(topic_word, doc_topic))


def load_text(path, stopwords: set[str] | None = None, min_count: int = 1) -> Corpus:
    """Read one document per line: lowercased, whitespace-tokenized.

    Words in ``stopwords`` are removed, then words occurring fewer than
    ``min_count`` times corpus-wide are pruned.  The vocabulary is ordered by
    first occurrence among surviving words.  Documents left empty are dropped
    with a warning.
    """
    stopwords = stopwords or set()
    with open(path, encoding="utf-8") as fh:
        raw_docs = [line.lower().split() for line in fh]
    raw_docs = [toks for toks in raw_docs if toks]  # blank lines are not documents
    filtered = [[t for t in toks if t not in stopwords] for toks in raw_docs]

    freq: dict[str, int] = {}
    for tokens in filtered:
        for t in tokens:
            freq[t] = freq.get(t, 0) + 1
    keep = {w for w, c in freq.items() if c >= min_count}

    words: list[str] = []
    index: dict[str, int] = {}
    docs: list[BowDocument] = []
    dropped = 0
    for tokens in filtered:
        ids = []
        for t in tokens:
            if t not in keep:
                continue
            if t not in index:
                index[t] = len(words)
                words.append(t)
            ids.append(index[t])
        if ids:
            docs.append(BowDocument.from_tokens(ids))
        else:
            dropped += 1
    if not docs:
        raise CorpusFormatError(f"no documents left after pruning: {path}")
    if dropped:
        warnings.warn(f"dropped {dropped} documents emptied by stopword/min-count pruning")
    return Corpus(docs, Vocabulary(words))


def load_stopwords(path) -> set[str]:
    with open(path, encoding="utf-8") as fh:
        return {line.strip().lower() for line in fh if line.strip()}


def _format_float_row(row: Array) -> str:
    return " ".join(float(x).hex() for x in row)


def _parse_float_row(line: str, expect: int, where: str) -> Array:
    parts = line.split()
    if len(parts) != expect:
        raise CorpusFormatError(f"{where}: expected {expect} values, got {len(parts)}")
    try:
        return np.array([float.fromhex(p) for p in parts])
    except ValueError as exc:
        raise CorpusFormatError(f"{where}: {exc}") from exc


def save_corpus(corpus: Corpus, path) -> None:
    """Write the line-oriented corpus format (see README for the layout).

    Ground-truth rows are serialized as hex floats so the round trip is
    bit-exact.
    """
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{CORPUS_MAGIC} v{CORPUS_VERSION}\n")
        fh.write(f"vocab {len(corpus.vocab)}\n")
        for w in corpus.vocab.words:
            fh.write(w + "\n")
        fh.write(f"docs {len(corpus.docs)}\n")
        for doc in corpus.docs:
            fh.write(" ".join(f"{wid}:{c}" for wid, c in sorted(doc.counts.items())) + "\n")
        if corpus.truth is not None:
            t = corpus.truth
            fh.write(f"truth {t.topic_word.shape[0]}\n")
            for row in t.topic_word:
                fh.write(_format_float_row(row) + "\n")
            fh.write(f"thetas {t.doc_topic.shape[0]}\n")
            for row in t.doc_topic:
                fh.write(_format_float_row(row) + "\n")


def _expect_header(line: str, key: str) -> int:
    parts = line.split()
    if len(parts) != 2 or parts[0] != key:
        raise CorpusFormatError(f"expected '{key} <count>' header, got {line!r}")
    try:
        return int(parts[1])
    except ValueError as exc:
        raise CorpusFormatError(f"bad {key} count in {line!r}") from exc


def load_corpus(path) -> Corpus:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        text = fh.read().splitlines()
    it = iter(enumerate(text, start=1))

    def next_line(what: str) -> tuple[int, str]:
        try:
            return next(it)
        except StopIteration:
            raise CorpusFormatError(f"truncated corpus file: missing {what}") from None

    _, first = next_line("magic header")
    parts = first.split()
    if len(parts) != 2 or parts[0] != CORPUS_MAGIC:
        raise CorpusFormatError(f"not a corpus file: bad magic {first!r}")
    if parts[1] != f"v{CORPUS_VERSION}":
        raise CorpusFormatError(f"unsupported corpus version {parts[1]} (expected v{CORPUS_VERSION})")

    _, vline = next_line("vocab header")
    v = _expect_header(vline, "vocab")
    words = []
    for _ in range(v):
        _, w = next_line("vocabulary word")
        words.append(w)
    vocab = Vocabulary(words)

    _, dline = next_line("docs header")
    n = _expect_header(dline, "docs")
    docs = []
    for _ in range(n):
        lineno, raw = next_line("document line")
        counts: dict[int, int] = {}
        if not raw.strip():
            raise CorpusFormatError(f"line {lineno}: empty document")
        for entry in raw.split():
            try:
                wid_s, c_s = entry.split(":")
                wid, c = int(wid_s), int(c_s)
            except ValueError as exc:
                raise CorpusFormatError(f"line {lineno}: bad entry {entry!r}") from exc
            if wid < 0 or wid >= v:
                raise CorpusFormatError(f"line {lineno}: word id {wid} out of range")
            if c < 1 or wid in counts:
                raise CorpusFormatError(f"line {lineno}: invalid count for word {wid}")
            counts[wid] = c
        docs.append(BowDocument(counts))

    truth = None
    nxt = next(it, None)
    if nxt is not None:
        lineno, raw = nxt
        k = _expect_header(raw, "truth")
        topic_word = np.empty((k, v))
        for r in range(k):
            lineno, raw = next_line("truth row")
            topic_word[r] = _parse_float_row(raw, v, f"line {lineno}")
        _, tline = next_line("thetas header")
        tn = _expect_header(tline, "thetas")
        if tn != n:
            raise CorpusFormatError(f"theta count {tn} does not match {n} documents")
        doc_topic = np.empty((tn, k))
        for r in range(tn):
            lineno, raw = next_line("theta row")
            doc_topic[r] = _parse_float_row(raw, k, f"line {lineno}")
        truth = SyntheticGroundTruth(topic_word, doc_topic)

    return Corpus(docs, vocab, truth)
