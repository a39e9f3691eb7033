"""Dense MLP forward/backward passes, Adam, and a finite-difference gradient oracle.

Everything here is plain float64 numpy.  Weights use the row-vector
convention (``x @ W + b``), so a weight matrix is shaped
``(fan_in, fan_out)``.  All functions are deterministic given their inputs
and an explicit ``numpy.random.Generator``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

Array = np.ndarray

ACTIVATIONS = ("softplus", "leaky_relu")
LEAKY_SLOPE = 0.01


def softmax(logits: Array) -> Array:
    """Exp-normalize along the last axis, stabilized by subtracting the max logit."""
    logits = np.asarray(logits, dtype=np.float64)
    if logits.size == 0 or logits.shape[-1] == 0:
        raise ValueError("softmax requires a non-empty logit vector")
    if not np.all(np.isfinite(logits)):
        raise FloatingPointError("softmax received non-finite logits")
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(logits: Array) -> Array:
    """log(softmax(logits)) computed directly from the logits (no exp/log round trip)."""
    logits = np.asarray(logits, dtype=np.float64)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def _sigmoid(z: Array) -> Array:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _activate(z: Array, kind: str) -> Array:
    if kind == "softplus":
        return np.logaddexp(0.0, z)
    if kind == "leaky_relu":
        return np.where(z > 0.0, z, LEAKY_SLOPE * z)
    raise ValueError(f"unknown activation {kind!r}")


def _activate_grad(z: Array, kind: str) -> Array:
    if kind == "softplus":
        return _sigmoid(z)
    if kind == "leaky_relu":
        return np.where(z > 0.0, 1.0, LEAKY_SLOPE)
    raise ValueError(f"unknown activation {kind!r}")


@dataclass
class MlpParams:
    """Fully connected net: hidden layers with a nonlinearity, linear output layer.

    ``weights[i]`` has shape ``(sizes[i], sizes[i+1])``; the final layer
    produces pre-softmax logits.
    """

    weights: list[Array]
    biases: list[Array]
    activation: str = "softplus"

    def __post_init__(self) -> None:
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}")
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ValueError("weights and biases must be equal-length, non-empty lists")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.ndim != 1 or w.shape[1] != b.shape[0]:
                raise ValueError(f"layer {i}: weight {w.shape} and bias {b.shape} do not match")
            if i + 1 < len(self.weights) and w.shape[1] != self.weights[i + 1].shape[0]:
                raise ValueError(f"layer {i} output dim does not chain into layer {i + 1}")

    @property
    def sizes(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    def copy(self) -> "MlpParams":
        return MlpParams(
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            self.activation,
        )


def init_mlp(sizes: Sequence[int], activation: str, rng: np.random.Generator) -> MlpParams:
    """Glorot-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases."""
    if len(sizes) < 2:
        raise ValueError("need at least an input and an output size")
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpParams(weights, biases, activation)


@dataclass
class MlpCache:
    """Per-layer values saved by the forward pass for the backward pass."""

    inputs: list[Array]   # input to each layer, batch-major
    pre_acts: list[Array]  # pre-activation of each hidden layer
    single: bool           # True when the forward input was a 1-D vector


def mlp_forward(params: MlpParams, x: Array) -> tuple[Array, MlpCache]:
    """Forward pass; ``x`` may be one input vector or a ``(batch, dim)`` matrix.

    Returns the pre-softmax logits and a cache for :func:`mlp_backward`.
    """
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    h = np.atleast_2d(x)
    if h.shape[1] != params.weights[0].shape[0]:
        raise ValueError(
            f"input dim {h.shape[1]} does not match first layer ({params.weights[0].shape[0]})"
        )
    inputs, pre_acts = [h], []
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = h @ w + b
        if i == last:
            logits = z
        else:
            pre_acts.append(z)
            h = _activate(z, params.activation)
            inputs.append(h)
    cache = MlpCache(inputs, pre_acts, single)
    return (logits[0] if single else logits), cache


def mlp_backward(
    params: MlpParams, cache: MlpCache, grad_logits: Array
) -> tuple[list[Array], list[Array], Array]:
    """Backprop from d(loss)/d(logits) to per-layer gradients and d(loss)/d(input)."""
    g = np.atleast_2d(np.asarray(grad_logits, dtype=np.float64))
    if g.shape != (cache.inputs[0].shape[0], params.weights[-1].shape[1]):
        raise ValueError(f"grad_logits shape {g.shape} does not match the forward cache")
    grad_w: list[Array] = [np.empty(0)] * len(params.weights)
    grad_b: list[Array] = [np.empty(0)] * len(params.biases)
    for i in range(len(params.weights) - 1, -1, -1):
        grad_w[i] = cache.inputs[i].T @ g
        grad_b[i] = g.sum(axis=0)
        g = g @ params.weights[i].T
        if i > 0:
            g = g * _activate_grad(cache.pre_acts[i - 1], params.activation)
    grad_in = g[0] if cache.single else g
    return grad_w, grad_b, grad_in


@dataclass
class AdamState:
    """First/second-moment accumulators shaped like the tracked parameter list."""

    m: list[Array]
    v: list[Array]
    t: int
    lr: float
    beta1: float
    beta2: float
    epsilon: float


def adam_init(
    params: Sequence[Array],
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    epsilon: float = 1e-8,
) -> AdamState:
    return AdamState(
        m=[np.zeros_like(p) for p in params],
        v=[np.zeros_like(p) for p in params],
        t=0,
        lr=lr,
        beta1=beta1,
        beta2=beta2,
        epsilon=epsilon,
    )


def adam_step(state: AdamState, params: Sequence[Array], grads: Sequence[Array]) -> list[Array]:
    """One bias-corrected Adam update.  Returns fresh parameter arrays; advances ``state``."""
    if len(params) != len(state.m) or len(grads) != len(params):
        raise ValueError("params/grads do not match the Adam state")
    state.t += 1
    b1c = 1.0 - state.beta1 ** state.t
    b2c = 1.0 - state.beta2 ** state.t
    out = []
    for i, (p, g) in enumerate(zip(params, grads)):
        if p.shape != g.shape or p.shape != state.m[i].shape:
            raise ValueError(f"parameter {i}: shape mismatch {p.shape} vs {g.shape}")
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * (g * g)
        m_hat = state.m[i] / b1c
        v_hat = state.v[i] / b2c
        out.append(p - state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon))
    return out


def finite_diff_grad(
    loss_fn: Callable[[Sequence[Array]], float],
    params: Sequence[Array],
    h: float = 1e-6,
) -> list[Array]:
    """Central-difference gradient of ``loss_fn`` at ``params``, one coordinate at a time.

    ``loss_fn`` must be pure and deterministic; intended as a test oracle,
    not for training.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    work = [np.array(p, dtype=np.float64, copy=True) for p in params]
    grads = [np.zeros_like(p) for p in work]
    for i, p in enumerate(work):
        flat = p.reshape(-1)
        gflat = grads[i].reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + h
            up = loss_fn(work)
            flat[j] = orig - h
            down = loss_fn(work)
            flat[j] = orig
            gflat[j] = (up - down) / (2.0 * h)
    return grads


def relative_error(analytic: Sequence[Array], numeric: Sequence[Array], floor: float = 1e-8) -> float:
    """Max over all coordinates of |a-n| / max(|a|, |n|, floor)."""
    worst = 0.0
    for a, n in zip(analytic, numeric):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
        worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst
