"""The autoencoding topic model: a deterministic MLP encoder producing a
document-topic mixture, a linear-softmax decoder over the vocabulary, and a
training objective that pairs a length-normalized reconstruction loss with a
simplex-kernel MMD penalty pulling encoded mixtures toward a Dirichlet prior.
"""

from __future__ import annotations

import struct
import time
from dataclasses import dataclass, field

import numpy as np

from . import nn, simplex
from .corpus import BowDocument, Corpus

Array = np.ndarray

MODEL_MAGIC = b"WLDAMOD1"
MODEL_VERSION = 1

MMD_ON_CHOICES = ("raw-theta", "noised-theta")
_ACTIVATION_CODES = {"softplus": 0, "leaky_relu": 1}
_ACTIVATION_NAMES = {v: k for k, v in _ACTIVATION_CODES.items()}


class ModelFormatError(ValueError):
    """Raised when a model file cannot be parsed."""


@dataclass
class WldaModel:
    """Encoder MLP (V -> ... -> K) plus decoder topic matrix and word offsets.

    Column k of ``topic_word`` holds the unnormalized scores of topic k over
    the vocabulary; its top entries are the topic's representative words.
    """

    encoder: nn.MlpParams
    topic_word: Array  # (V, K)
    offset: Array      # (V,)

    def __post_init__(self) -> None:
        v, k = self.topic_word.shape
        sizes = self.encoder.sizes
        if sizes[0] != v or sizes[-1] != k:
            raise ValueError(
                f"encoder {sizes} does not match a (V={v}, K={k}) topic matrix"
            )
        if self.offset.shape != (v,):
            raise ValueError("offset must have one entry per vocabulary word")

    @property
    def vocab_size(self) -> int:
        return self.topic_word.shape[0]

    @property
    def num_topics(self) -> int:
        return self.topic_word.shape[1]

    def params(self) -> list[Array]:
        """Trainable arrays in fixed order: encoder layers, then decoder."""
        out: list[Array] = []
        for w, b in zip(self.encoder.weights, self.encoder.biases):
            out.extend((w, b))
        out.extend((self.topic_word, self.offset))
        return out

    def set_params(self, params: list[Array]) -> None:
        n_layers = len(self.encoder.weights)
        if len(params) != 2 * n_layers + 2:
            raise ValueError("parameter list does not match the model structure")
        for i in range(n_layers):
            self.encoder.weights[i] = params[2 * i]
            self.encoder.biases[i] = params[2 * i + 1]
        self.topic_word = params[-2]
        self.offset = params[-1]


@dataclass
class TrainConfig:
    num_topics: int
    hidden_sizes: tuple[int, ...] = (100, 100)
    activation: str = "softplus"
    dirichlet_alpha: float = 0.1
    noise_alpha: float = 0.0
    mmd_weight: float = 1.0
    learning_rate: float = 0.002
    beta1: float = 0.99
    epochs: int = 50
    batch_size: int = 64
    seed: int = 0
    mmd_on: str = "raw-theta"

    def validate(self) -> None:
        if self.num_topics < 2:
            raise ValueError("need at least 2 topics")
        if self.batch_size < 2:
            raise ValueError("batch_size must be >= 2 (the MMD estimator needs 2 samples)")
        if not 0.0 <= self.noise_alpha <= 1.0:
            raise ValueError("noise_alpha must lie in [0, 1]")
        if self.mmd_weight < 0:
            raise ValueError("mmd_weight must be non-negative")
        if self.dirichlet_alpha <= 0:
            raise ValueError("dirichlet_alpha must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.mmd_on not in MMD_ON_CHOICES:
            raise ValueError(f"mmd_on must be one of {MMD_ON_CHOICES}")
        if self.activation not in nn.ACTIVATIONS:
            raise ValueError(f"activation must be one of {nn.ACTIVATIONS}")


@dataclass
class EpochRecord:
    epoch: int
    recon_loss: float
    mmd: float
    seconds: float


@dataclass
class TrainReport:
    epochs: list[EpochRecord] = field(default_factory=list)


def init_model(
    vocab_size: int,
    num_topics: int,
    hidden_sizes,
    activation: str,
    rng: np.random.Generator,
) -> WldaModel:
    encoder = nn.init_mlp([vocab_size, *hidden_sizes, num_topics], activation, rng)
    bound = np.sqrt(6.0 / (vocab_size + num_topics))
    topic_word = rng.uniform(-bound, bound, size=(vocab_size, num_topics))
    return WldaModel(encoder, topic_word, np.zeros(vocab_size))


def encode_counts(model: WldaModel, counts: Array) -> Array:
    """Document-topic mixtures for a dense count vector or (batch, V) matrix."""
    logits, _ = nn.mlp_forward(model.encoder, counts)
    return nn.softmax(logits)


def encode(model: WldaModel, doc: BowDocument) -> Array:
    """theta = softmax(encoder(w)) on the document's dense count vector."""
    return encode_counts(model, doc.dense(model.vocab_size))


def decode(model: WldaModel, theta: Array) -> Array:
    """Word distribution(s) softmax(topic_word @ theta + offset)."""
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape[-1] != model.num_topics:
        raise ValueError(f"theta length {theta.shape[-1]} != K={model.num_topics}")
    return nn.softmax(theta @ model.topic_word.T + model.offset)


def recon_loss(doc: BowDocument, w_hat: Array, vocab_size: int) -> float:
    """Cross-entropy between the bag and the decoded word distribution,
    scaled by 1/(s log V) so a uniform decoder scores exactly 1."""
    if doc.total < 1:
        raise ValueError("empty document")
    w_hat = np.asarray(w_hat, dtype=np.float64)
    if w_hat.shape != (vocab_size,):
        raise ValueError("decoded distribution does not match the vocabulary")
    ce = -sum(c * np.log(w_hat[wid]) for wid, c in doc.counts.items())
    return float(ce) / (doc.total * np.log(vocab_size))


def mix_noise(theta: Array, noise: Array, alpha: float) -> Array:
    """Convex combination (1-alpha)*theta + alpha*noise; stays on the simplex."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    theta = np.asarray(theta, dtype=np.float64)
    noise = np.asarray(noise, dtype=np.float64)
    if theta.shape != noise.shape:
        raise ValueError(f"shape mismatch: {theta.shape} vs {noise.shape}")
    return (1.0 - alpha) * theta + alpha * noise


@dataclass
class ObjectiveParts:
    recon: float
    mmd: float


def batch_objective(
    model: WldaModel,
    counts: Array,
    prior_draws: Array,
    config: TrainConfig,
    noise_draws: Array | None = None,
) -> tuple[float, list[Array], ObjectiveParts]:
    """Loss and gradients for one minibatch.

    ``counts`` is the dense (m, V) count matrix.  The loss is the batch mean
    of the scaled reconstruction loss plus ``mmd_weight`` times the unbiased
    MMD between encoded mixtures and ``prior_draws``; gradients cover every
    model parameter, with prior and noise draws held constant.
    """
    counts = np.atleast_2d(np.asarray(counts, dtype=np.float64))
    m, v = counts.shape
    if m < 2:
        raise ValueError("batches must contain at least 2 documents")
    if v != model.vocab_size:
        raise ValueError("count matrix does not match the vocabulary")
    alpha = config.noise_alpha
    if alpha > 0.0 and noise_draws is None:
        raise ValueError("noise_alpha > 0 requires noise draws")

    totals = counts.sum(axis=1)
    if np.any(totals < 1):
        raise ValueError("batch contains an empty document")
    scale = totals * np.log(v)  # (m,)

    enc_logits, cache = nn.mlp_forward(model.encoder, counts)
    theta = nn.softmax(enc_logits)
    theta_plus = mix_noise(theta, noise_draws, alpha) if alpha > 0.0 else theta

    dec_logits = theta_plus @ model.topic_word.T + model.offset
    log_w_hat = nn.log_softmax(dec_logits)
    recon = float(np.mean(-(counts * log_w_hat).sum(axis=1) / scale))

    w_hat = np.exp(log_w_hat)
    grad_dec_logits = (w_hat * totals[:, None] - counts) / (scale[:, None] * m)
    grad_topic_word = grad_dec_logits.T @ theta_plus
    grad_offset = grad_dec_logits.sum(axis=0)
    grad_theta = (1.0 - alpha) * (grad_dec_logits @ model.topic_word)

    mmd_samples = theta_plus if config.mmd_on == "noised-theta" else theta
    mmd_val = simplex.mmd_unbiased(mmd_samples, prior_draws)
    if config.mmd_weight > 0.0:
        grad_mmd = config.mmd_weight * simplex.mmd_grad_q(mmd_samples, prior_draws)
        if config.mmd_on == "noised-theta":
            grad_mmd = (1.0 - alpha) * grad_mmd
        grad_theta = grad_theta + grad_mmd

    # Softmax Jacobian-vector product back to the encoder logits.
    grad_enc_logits = theta * (grad_theta - (grad_theta * theta).sum(axis=1, keepdims=True))
    grad_w, grad_b, _ = nn.mlp_backward(model.encoder, cache, grad_enc_logits)

    grads: list[Array] = []
    for dw, db in zip(grad_w, grad_b):
        grads.extend((dw, db))
    grads.extend((grad_topic_word, grad_offset))

    loss = recon + config.mmd_weight * mmd_val
    return loss, grads, ObjectiveParts(recon, mmd_val)


def train(
    corpus: Corpus,
    config: TrainConfig,
    rng: np.random.Generator | None = None,
    checkpoint=None,
) -> tuple[WldaModel, TrainReport]:
    """Minibatch Adam on the combined objective.

    Data are reshuffled and prior/noise draws are redrawn fresh every step
    from the single seeded generator, so training is deterministic given the
    seed.  ``checkpoint(epoch, model, report)``, when given, is invoked after
    every epoch with the report accumulated so far; it must not mutate either.
    """
    config.validate()
    if len(corpus.docs) == 0:
        raise ValueError("empty corpus")
    if rng is None:
        rng = np.random.default_rng(config.seed)

    v = corpus.vocab_size
    k = config.num_topics
    model = init_model(v, k, config.hidden_sizes, config.activation, rng)
    params = model.params()
    adam = nn.adam_init(params, lr=config.learning_rate, beta1=config.beta1)
    prior_alpha = np.full(k, config.dirichlet_alpha)
    n = len(corpus.docs)
    report = TrainReport()

    for epoch in range(1, config.epochs + 1):
        t0 = time.perf_counter()
        order = rng.permutation(n)
        recon_sum = mmd_sum = 0.0
        steps = 0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            if idx.size < 2:
                continue  # a 1-document tail cannot feed the MMD estimator
            counts = corpus.dense_rows(idx)
            prior = simplex.sample_dirichlet(prior_alpha, rng, size=idx.size)
            noise = (
                simplex.sample_dirichlet(prior_alpha, rng, size=idx.size)
                if config.noise_alpha > 0.0
                else None
            )
            _, grads, parts = batch_objective(model, counts, prior, config, noise)
            params = nn.adam_step(adam, params, grads)
            model.set_params(params)
            recon_sum += parts.recon
            mmd_sum += parts.mmd
            steps += 1
        report.epochs.append(
            EpochRecord(epoch, recon_sum / max(steps, 1), mmd_sum / max(steps, 1), time.perf_counter() - t0)
        )
        if checkpoint is not None:
            checkpoint(epoch, model, report)
    return model, report


def extract_topics(model: WldaModel, top: int) -> list[list[int]]:
    """Per topic, the ``top`` word ids with the largest scores, descending;
    ties broken toward the lower word id."""
    if top < 1 or top > model.vocab_size:
        raise ValueError(f"top must be in 1..{model.vocab_size}")
    out = []
    for k in range(model.num_topics):
        order = np.argsort(-model.topic_word[:, k], kind="stable")[:top]
        out.append([int(w) for w in order])
    return out


def save_model(model: WldaModel, path) -> None:
    """Binary layout: magic, version, V, K, activation code, hidden sizes,
    then all parameters as little-endian float64 in ``params()`` order."""
    hidden = model.encoder.sizes[1:-1]
    with open(path, "wb") as fh:
        fh.write(MODEL_MAGIC)
        fh.write(struct.pack("<5I", MODEL_VERSION, model.vocab_size, model.num_topics,
                             _ACTIVATION_CODES[model.encoder.activation], len(hidden)))
        fh.write(struct.pack(f"<{len(hidden)}I", *hidden))
        for arr in model.params():
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_model(path) -> WldaModel:
    with open(path, "rb") as fh:
        blob = fh.read()

    def take(n: int, what: str) -> bytes:
        nonlocal pos
        if pos + n > len(blob):
            raise ModelFormatError(f"truncated model file: missing {what}")
        out = blob[pos : pos + n]
        pos += n
        return out

    pos = 0
    if take(8, "magic") != MODEL_MAGIC:
        raise ModelFormatError("not a model file (bad magic)")
    version, v, k, act_code, n_hidden = struct.unpack("<5I", take(20, "header"))
    if version != MODEL_VERSION:
        raise ModelFormatError(f"unsupported model version {version} (expected {MODEL_VERSION})")
    if act_code not in _ACTIVATION_NAMES:
        raise ModelFormatError(f"unknown activation code {act_code}")
    hidden = struct.unpack(f"<{n_hidden}I", take(4 * n_hidden, "hidden sizes"))
    sizes = [v, *hidden, k]

    def take_array(shape: tuple[int, ...], what: str) -> Array:
        count = int(np.prod(shape))
        raw = take(8 * count, what)
        return np.frombuffer(raw, dtype="<f8").reshape(shape).astype(np.float64)

    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(take_array((fan_in, fan_out), "encoder weight"))
        biases.append(take_array((fan_out,), "encoder bias"))
    topic_word = take_array((v, k), "topic matrix")
    offset = take_array((v,), "offset")
    if pos != len(blob):
        raise ModelFormatError(f"{len(blob) - pos} trailing bytes after model payload")
    encoder = nn.MlpParams(weights, biases, _ACTIVATION_NAMES[act_code])
    return WldaModel(encoder, topic_word, offset)
