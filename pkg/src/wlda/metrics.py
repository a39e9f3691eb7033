"""Topic-quality metrics: uniqueness, NPMI coherence, permutation-aligned
recovery precision, and a linear document-classification probe.
"""

from __future__ import annotations

import itertools
import json
import math
import warnings
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import nn

Array = np.ndarray

# Exhaustive permutation search is cheap up to this many topics; beyond it
# the optimal-assignment route takes over.
_EXHAUSTIVE_TOPIC_LIMIT = 8

TopicSet = list[list[int]]


def validate_topic_set(topics: TopicSet) -> int:
    """Check distinct ids within each topic and a shared list length; returns L."""
    if not topics:
        raise ValueError("empty topic set")
    top = len(topics[0])
    if top < 1:
        raise ValueError("topics must contain at least one word")
    for k, words in enumerate(topics):
        if len(words) != top:
            raise ValueError(f"topic {k} has {len(words)} words, expected {top}")
        if len(set(words)) != len(words):
            raise ValueError(f"topic {k} repeats a word id")
    return top


def topic_uniqueness(topics: TopicSet) -> tuple[list[float], float]:
    """Per-topic mean inverse repetition count of top words, plus the average.

    1 means every top word is unique to its topic; 1/K means all topics list
    the same words.
    """
    top = validate_topic_set(topics)
    cnt = Counter(w for words in topics for w in words)
    per_topic = [sum(1.0 / cnt[w] for w in words) / top for words in topics]
    return per_topic, float(np.mean(per_topic))


@dataclass
class CooccurrenceIndex:
    """Document frequencies and document-level joint frequencies for a word set."""

    doc_freq: dict[int, int]
    joint_freq: dict[tuple[int, int], int]
    num_docs: int

    def df(self, w: int) -> int:
        return self.doc_freq.get(w, 0)

    def joint(self, a: int, b: int) -> int:
        return self.joint_freq.get((min(a, b), max(a, b)), 0)


def build_cooccurrence_index(corpus, words) -> CooccurrenceIndex:
    """Binary document co-occurrence counts restricted to ``words``."""
    if len(corpus.docs) == 0:
        raise ValueError("empty corpus")
    wanted = set(words)
    doc_freq: dict[int, int] = {}
    joint_freq: dict[tuple[int, int], int] = {}
    for doc in corpus.docs:
        present = sorted(wanted.intersection(doc.counts.keys()))
        for w in present:
            doc_freq[w] = doc_freq.get(w, 0) + 1
        for a, b in itertools.combinations(present, 2):
            joint_freq[(a, b)] = joint_freq.get((a, b), 0) + 1
    return CooccurrenceIndex(doc_freq, joint_freq, len(corpus.docs))


def npmi_pair(index: CooccurrenceIndex, a: int, b: int) -> float:
    """Normalized PMI of one word pair from document frequencies.

    Zero joint count scores -1 by convention; a pair present in every
    document carries no information and scores 0.
    """
    d = index.num_docs
    if d == 0:
        raise ValueError("co-occurrence index over zero documents")
    joint = index.joint(a, b)
    if joint == 0:
        return -1.0
    if joint == d:
        return 0.0
    p_joint = joint / d
    p_a = index.df(a) / d
    p_b = index.df(b) / d
    return math.log(p_joint / (p_a * p_b)) / (-math.log(p_joint))


def npmi(topics: TopicSet, index: CooccurrenceIndex) -> tuple[list[float], float]:
    """Mean pairwise NPMI per topic and the average over topics.

    Words missing from the index are treated as zero-frequency (their pairs
    score -1) with a warning.
    """
    validate_topic_set(topics)
    missing = {w for words in topics for w in words if index.df(w) == 0}
    if missing:
        warnings.warn(f"{len(missing)} topic words absent from the co-occurrence index")
    per_topic = []
    for words in topics:
        pairs = list(itertools.combinations(words, 2))
        per_topic.append(float(np.mean([npmi_pair(index, a, b) for a, b in pairs])))
    return per_topic, float(np.mean(per_topic))


def _overlap_matrix(predicted: TopicSet, truth: TopicSet) -> Array:
    k = len(predicted)
    out = np.zeros((k, k))
    pred_sets = [set(t) for t in predicted]
    truth_sets = [set(t) for t in truth]
    for i in range(k):
        for j in range(k):
            out[i, j] = len(pred_sets[i] & truth_sets[j])
    return out


def _best_total_overlap_exhaustive(overlap: Array) -> float:
    k = overlap.shape[0]
    return max(
        sum(overlap[i, perm[i]] for i in range(k))
        for perm in itertools.permutations(range(k))
    )


def _best_total_overlap_assignment(overlap: Array) -> float:
    rows, cols = linear_sum_assignment(-overlap)
    return float(overlap[rows, cols].sum())


def recovery_precision(predicted: TopicSet, truth: TopicSet) -> float:
    """Best topic-aligned precision: max over permutations of mean overlap / L.

    Exhaustive search for K <= 8, Hungarian assignment on the overlap matrix
    otherwise (both maximize total overlap, so they agree).
    """
    top = validate_topic_set(predicted)
    if validate_topic_set(truth) != top or len(truth) != len(predicted):
        raise ValueError("predicted and truth topic sets must share K and L")
    overlap = _overlap_matrix(predicted, truth)
    k = len(predicted)
    if k <= _EXHAUSTIVE_TOPIC_LIMIT:
        best = _best_total_overlap_exhaustive(overlap)
    else:
        best = _best_total_overlap_assignment(overlap)
    return float(best) / (k * top)


def classification_probe(
    train_features: Array,
    train_labels,
    test_features: Array,
    test_labels,
    learning_rate: float = 0.01,
    iterations: int = 100,
) -> float:
    """Accuracy of a linear softmax classifier trained by full-batch Adam.

    Weights start at zero, so the result is deterministic.
    """
    x_tr = np.atleast_2d(np.asarray(train_features, dtype=np.float64))
    x_te = np.atleast_2d(np.asarray(test_features, dtype=np.float64))
    y_tr = np.asarray(train_labels, dtype=np.int64)
    y_te = np.asarray(test_labels, dtype=np.int64)
    if len(x_tr) != len(y_tr) or len(x_te) != len(y_te) or len(x_tr) == 0 or len(x_te) == 0:
        raise ValueError("feature/label lengths do not match or are empty")
    num_classes = int(max(y_tr.max(), y_te.max())) + 1
    if y_tr.min() < 0 or y_te.min() < 0:
        raise ValueError("labels must be non-negative integers")

    dim = x_tr.shape[1]
    w = np.zeros((dim, num_classes))
    b = np.zeros(num_classes)
    onehot = np.zeros((len(y_tr), num_classes))
    onehot[np.arange(len(y_tr)), y_tr] = 1.0
    state = nn.adam_init([w, b], lr=learning_rate)
    for _ in range(iterations):
        probs = nn.softmax(x_tr @ w + b)
        g_logits = (probs - onehot) / len(y_tr)
        grads = [x_tr.T @ g_logits, g_logits.sum(axis=0)]
        w, b = nn.adam_step(state, [w, b], grads)
    pred = np.argmax(x_te @ w + b, axis=1)
    return float(np.mean(pred == y_te))


@dataclass
class MetricsReport:
    """Aggregate topic metrics; optional fields stay None when not computed."""

    per_topic_tu: list[float]
    mean_tu: float
    per_topic_npmi: list[float] | None = None
    mean_npmi: float | None = None
    precision: float | None = None
    classifier_accuracy: float | None = None

    _SCALARS = ("mean_tu", "mean_npmi", "precision", "classifier_accuracy")

    def to_json(self) -> str:
        payload = {
            "mean_tu": self.mean_tu,
            "mean_npmi": self.mean_npmi,
            "precision": self.precision,
            "classifier_accuracy": self.classifier_accuracy,
            "per_topic_tu": self.per_topic_tu,
            "per_topic_npmi": self.per_topic_npmi,
        }
        return json.dumps(payload, indent=2)

    def to_csv(self) -> str:
        header = ",".join(self._SCALARS)
        row = ",".join(
            "" if getattr(self, name) is None else repr(getattr(self, name))
            for name in self._SCALARS
        )
        return f"{header}\n{row}\n"

    def to_text(self) -> str:
        lines = [f"mean_tu {self.mean_tu!r}"]
        if self.mean_npmi is not None:
            lines.append(f"mean_npmi {self.mean_npmi!r}")
        if self.precision is not None:
            lines.append(f"precision {self.precision!r}")
        if self.classifier_accuracy is not None:
            lines.append(f"classifier_accuracy {self.classifier_accuracy!r}")
        for k, (tu, np_) in enumerate(
            zip(
                self.per_topic_tu,
                self.per_topic_npmi if self.per_topic_npmi is not None else [None] * len(self.per_topic_tu),
            )
        ):
            extra = "" if np_ is None else f" npmi {np_!r}"
            lines.append(f"topic {k}: tu {tu!r}{extra}")
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return self.to_json()
        if fmt == "csv":
            return self.to_csv()
        if fmt == "text":
            return self.to_text()
        raise ValueError(f"unknown report format {fmt!r}")
