"""Collapsed Gibbs sampling for vanilla LDA.

Topic mixtures and topic-word distributions are integrated out; the sampler
resamples one token's topic at a time from the count-based conditional

    p(z = k | rest)  ~  (n_dk + alpha) * (n_kw + eta) / (n_k + V * eta).

The per-sweep token loop is JIT-compiled with numba when available; the
pure-Python fallback is identical (and much slower).  Randomness enters only
through a per-sweep vector of uniforms drawn from the state's generator, so
trajectories are reproducible bit-for-bit given the seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import Corpus

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

Array = np.ndarray


@dataclass
class GibbsState:
    """Flat token arrays plus the three count tables of the collapsed sampler."""

    doc_of: Array      # (T,) document index per token
    word_of: Array     # (T,) word id per token
    z: Array           # (T,) current topic assignment per token
    doc_offsets: Array  # (D+1,) token range of each document
    n_dk: Array        # (D, K)
    n_kw: Array        # (K, V)
    n_k: Array         # (K,)
    alpha: float
    eta: float
    rng: np.random.Generator

    @property
    def num_topics(self) -> int:
        return self.n_k.shape[0]

    @property
    def vocab_size(self) -> int:
        return self.n_kw.shape[1]

    @property
    def num_docs(self) -> int:
        return self.n_dk.shape[0]

    def check_counts(self) -> None:
        """Assert the count tables agree with the assignments; used by tests."""
        t = self.z.shape[0]
        assert int(self.n_k.sum()) == t
        assert np.array_equal(self.n_kw.sum(axis=1), self.n_k)
        for d in range(self.num_docs):
            length = int(self.doc_offsets[d + 1] - self.doc_offsets[d])
            assert int(self.n_dk[d].sum()) == length


def init_random(corpus: Corpus, num_topics: int, alpha: float, eta: float, rng: np.random.Generator) -> GibbsState:
    """Assign every token a uniform-random topic and build consistent counts."""
    if num_topics < 2:
        raise ValueError("need at least 2 topics")
    if len(corpus.docs) == 0:
        raise ValueError("empty corpus")
    if alpha <= 0 or eta <= 0:
        raise ValueError("hyperparameters must be positive")

    doc_of, word_of = [], []
    offsets = [0]
    for d, doc in enumerate(corpus.docs):
        for wid, c in sorted(doc.counts.items()):
            doc_of.extend([d] * c)
            word_of.extend([wid] * c)
        offsets.append(len(doc_of))
    doc_of = np.asarray(doc_of, dtype=np.int64)
    word_of = np.asarray(word_of, dtype=np.int64)
    z = rng.integers(0, num_topics, size=doc_of.shape[0])

    d_count = len(corpus.docs)
    v = corpus.vocab_size
    n_dk = np.zeros((d_count, num_topics), dtype=np.int64)
    n_kw = np.zeros((num_topics, v), dtype=np.int64)
    np.add.at(n_dk, (doc_of, z), 1)
    np.add.at(n_kw, (z, word_of), 1)
    n_k = n_kw.sum(axis=1)
    return GibbsState(
        doc_of, word_of, z, np.asarray(offsets, dtype=np.int64),
        n_dk, n_kw, n_k, float(alpha), float(eta), rng,
    )


def conditional(state: GibbsState, d: int, position: int) -> Array:
    """Unnormalized topic weights for the token at (d, position).

    The caller must have removed that token from the counts first (the
    collapsed conditional excludes the token being resampled).
    """
    if d < 0 or d >= state.num_docs:
        raise IndexError(f"document {d} out of range")
    start, end = state.doc_offsets[d], state.doc_offsets[d + 1]
    if position < 0 or start + position >= end:
        raise IndexError(f"position {position} out of range for document {d}")
    w = state.word_of[start + position]
    v_eta = state.vocab_size * state.eta
    return (state.n_dk[d] + state.alpha) * (state.n_kw[:, w] + state.eta) / (state.n_k + v_eta)


@njit(cache=True)
def _sweep_kernel(doc_of, word_of, z, n_dk, n_kw, n_k, alpha, eta, uniforms):
    t_total = z.shape[0]
    k_total = n_k.shape[0]
    v_eta = n_kw.shape[1] * eta
    weights = np.empty(k_total)
    for t in range(t_total):
        d = doc_of[t]
        w = word_of[t]
        old = z[t]
        n_dk[d, old] -= 1
        n_kw[old, w] -= 1
        n_k[old] -= 1
        total = 0.0
        for k in range(k_total):
            wt = (n_dk[d, k] + alpha) * (n_kw[k, w] + eta) / (n_k[k] + v_eta)
            weights[k] = wt
            total += wt
        r = uniforms[t] * total
        acc = 0.0
        new = k_total - 1
        for k in range(k_total):
            acc += weights[k]
            if r < acc:
                new = k
                break
        z[t] = new
        n_dk[d, new] += 1
        n_kw[new, w] += 1
        n_k[new] += 1


def sweep(state: GibbsState) -> GibbsState:
    """Resample every token once, in corpus order.  Mutates and returns the state."""
    uniforms = state.rng.random(state.z.shape[0])
    _sweep_kernel(
        state.doc_of, state.word_of, state.z,
        state.n_dk, state.n_kw, state.n_k,
        state.alpha, state.eta, uniforms,
    )
    return state


def run(state: GibbsState, sweeps: int) -> GibbsState:
    for _ in range(sweeps):
        sweep(state)
    return state


def estimate_topics(state: GibbsState, top: int) -> list[list[int]]:
    """Top-``top`` word ids per topic from the smoothed point estimate, ties to lower id."""
    if top < 1 or top > state.vocab_size:
        raise ValueError(f"top must be in 1..{state.vocab_size}")
    rows = state.n_kw + state.eta
    out = []
    for k in range(state.num_topics):
        order = np.argsort(-rows[k], kind="stable")[:top]
        out.append([int(w) for w in order])
    return out


def topic_word_estimate(state: GibbsState) -> Array:
    """Smoothed (n_kw + eta) rows normalized to distributions."""
    rows = state.n_kw + state.eta
    return rows / rows.sum(axis=1, keepdims=True)


def estimate_theta(state: GibbsState, d: int) -> Array:
    """Smoothed document-topic estimate for document ``d``."""
    if d < 0 or d >= state.num_docs:
        raise IndexError(f"document {d} out of range")
    row = state.n_dk[d] + state.alpha
    return row / row.sum()
