"""Dirichlet sampling and kernel statistics on the probability simplex.

The kernel is the information diffusion kernel
``k(a, b) = exp(-arccos^2(sum_k sqrt(a_k b_k)))``, which measures
similarity along the sphere the simplex maps to under ``x -> sqrt(x)``.
"""

from __future__ import annotations

import numpy as np

Array = np.ndarray

# Floating point can push the Bhattacharyya inner product a hair past 1
# even though Cauchy-Schwarz bounds it by 1 exactly; clamp before arccos.
_INNER_CLIP = (0.0, 1.0)
# Below this distance from 1, the arccos-derivative ratio is replaced by its
# analytic limit to dodge the 1/sqrt(1-s^2) singularity at coincident points.
_COINCIDENT_EPS = 1e-12
# Floor inside sqrt(b/a) in the gradient; softmax outputs can underflow to 0.
_GRAD_FLOOR = 1e-24


def check_simplex(v: Array, tol: float = 1e-9) -> Array:
    """Validate one simplex point or a stack of them; returns the float64 view."""
    v = np.asarray(v, dtype=np.float64)
    if v.size == 0:
        raise ValueError("empty simplex vector")
    if np.any(v < 0):
        raise ValueError("simplex entries must be non-negative")
    sums = v.sum(axis=-1)
    if np.any(np.abs(sums - 1.0) > tol):
        raise ValueError(f"simplex entries must sum to 1 within {tol}")
    return v


def _gamma_marsaglia_tsang(shape: Array, rng: np.random.Generator) -> Array:
    """Standard Gamma draws for shape >= 1 via squeeze-free Marsaglia-Tsang rejection."""
    d = shape - 1.0 / 3.0
    c = 1.0 / np.sqrt(9.0 * d)
    out = np.empty_like(shape)
    todo = np.arange(shape.size)
    while todo.size:
        x = rng.standard_normal(todo.size)
        v = (1.0 + c.flat[todo] * x) ** 3
        u = rng.random(todo.size)
        dd = d.flat[todo]
        with np.errstate(divide="ignore", invalid="ignore"):
            accept = (v > 0) & (np.log(u) < 0.5 * x * x + dd - dd * v + dd * np.log(np.where(v > 0, v, 1.0)))
        out.flat[todo[accept]] = dd[accept] * v[accept]
        todo = todo[~accept]
    return out


def standard_gamma(shape, size: int | tuple[int, ...] | None, rng: np.random.Generator) -> Array:
    """Gamma(shape, 1) draws; ``shape`` broadcasts against ``size``.

    Shapes below 1 use the boost identity Gamma(a) = Gamma(a+1) * U^(1/a) on
    top of the Marsaglia-Tsang sampler, which stays numerically well-behaved
    for concentrations as small as the 0.1 used throughout this package.
    """
    shape_arr = np.atleast_1d(np.asarray(shape, dtype=np.float64))
    if size is not None:
        target = size if isinstance(size, tuple) else (int(size),)
        shape_arr = np.broadcast_to(shape_arr, target)
    if np.any(shape_arr <= 0):
        raise ValueError("gamma shape parameters must be positive")
    small = shape_arr < 1.0
    boosted = np.where(small, shape_arr + 1.0, shape_arr)
    draws = _gamma_marsaglia_tsang(np.ascontiguousarray(boosted, dtype=np.float64), rng)
    if np.any(small):
        u = rng.random(int(small.sum()))
        draws[small] *= u ** (1.0 / shape_arr[small])
    return draws


def sample_dirichlet(alpha, rng: np.random.Generator, size: int | None = None) -> Array:
    """Draw from Dirichlet(alpha) by normalizing per-coordinate Gamma draws.

    Returns shape ``(len(alpha),)`` or ``(size, len(alpha))``.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    if alpha.ndim != 1 or alpha.size == 0:
        raise ValueError("alpha must be a non-empty 1-D array")
    if np.any(alpha <= 0):
        raise ValueError("all Dirichlet concentration parameters must be positive")
    n = 1 if size is None else int(size)
    g = standard_gamma(alpha, (n, alpha.size), rng)
    sums = g.sum(axis=1, keepdims=True)
    # An all-underflow row would normalize to nan; redraw it (vanishingly rare).
    while np.any(sums == 0.0):
        bad = sums[:, 0] == 0.0
        g[bad] = standard_gamma(alpha, (int(bad.sum()), alpha.size), rng)
        sums = g.sum(axis=1, keepdims=True)
    theta = g / sums
    return theta[0] if size is None else theta


def _bhattacharyya(a: Array, b: Array) -> float:
    a = check_simplex(a)
    b = check_simplex(b)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.clip(np.sqrt(a * b).sum(), *_INNER_CLIP))


def geodesic_distance(a: Array, b: Array) -> float:
    """Arc length between simplex points mapped to the sphere: 2*arccos<sqrt a, sqrt b>."""
    return 2.0 * float(np.arccos(_bhattacharyya(a, b)))


def diffusion_kernel(a: Array, b: Array) -> float:
    """Information diffusion kernel value in (0, 1]; equals 1 iff a == b."""
    return float(np.exp(-np.arccos(_bhattacharyya(a, b)) ** 2))


def kernel_matrix(x: Array, y: Array) -> Array:
    """Diffusion-kernel Gram block between rows of ``x`` and rows of ``y``."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    if x.shape[1] != y.shape[1]:
        raise ValueError(f"dimension mismatch: {x.shape[1]} vs {y.shape[1]}")
    inner = np.clip(np.sqrt(x) @ np.sqrt(y).T, *_INNER_CLIP)
    return np.exp(-np.arccos(inner) ** 2)


def mmd_unbiased(q_samples: Array, p_samples: Array) -> float:
    """Unbiased two-sample MMD^2 estimate under the diffusion kernel.

    Off-diagonal within-set averages minus twice the cross average; can be
    negative by construction.  Needs at least 2 samples per set.
    """
    q = np.atleast_2d(np.asarray(q_samples, dtype=np.float64))
    p = np.atleast_2d(np.asarray(p_samples, dtype=np.float64))
    n, m = q.shape[0], p.shape[0]
    if n < 2 or m < 2:
        raise ValueError("the unbiased MMD estimator needs at least 2 samples in each set")
    kqq = kernel_matrix(q, q)
    kpp = kernel_matrix(p, p)
    kqp = kernel_matrix(q, p)
    term_q = (kqq.sum() - np.trace(kqq)) / (n * (n - 1))
    term_p = (kpp.sum() - np.trace(kpp)) / (m * (m - 1))
    return float(term_q + term_p - 2.0 * kqp.sum() / (n * m))


def _arccos_ratio(inner: Array) -> Array:
    """arccos(s)/sqrt(1-s^2), with the limit value 1 substituted near s = 1."""
    near_one = inner >= 1.0 - _COINCIDENT_EPS
    safe = np.where(near_one, 0.0, inner)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.arccos(safe) / np.sqrt(1.0 - safe * safe)
    return np.where(near_one, 1.0, ratio)


def mmd_grad_q(q_samples: Array, p_samples: Array) -> Array:
    """Gradient of :func:`mmd_unbiased` with respect to the q-sample matrix.

    For the diffusion kernel, dk(a,b)/da_t = k * (arccos(s)/sqrt(1-s^2)) *
    sqrt(b_t/a_t) with s the Bhattacharyya inner product.  The p samples are
    treated as constants.
    """
    q = np.atleast_2d(np.asarray(q_samples, dtype=np.float64))
    p = np.atleast_2d(np.asarray(p_samples, dtype=np.float64))
    n, m = q.shape[0], p.shape[0]
    if n < 2 or m < 2:
        raise ValueError("the unbiased MMD estimator needs at least 2 samples in each set")
    sq = np.sqrt(np.maximum(q, _GRAD_FLOOR))
    sp = np.sqrt(p)
    inner_qq = np.clip(sq @ sq.T, *_INNER_CLIP)
    inner_qp = np.clip(sq @ sp.T, *_INNER_CLIP)
    w_qq = np.exp(-np.arccos(inner_qq) ** 2) * _arccos_ratio(inner_qq)
    np.fill_diagonal(w_qq, 0.0)
    w_qp = np.exp(-np.arccos(inner_qp) ** 2) * _arccos_ratio(inner_qp)
    # Each unordered q-q pair appears twice in the double sum.
    grad = (2.0 / (n * (n - 1))) * (w_qq @ sq) - (2.0 / (n * m)) * (w_qp @ sp)
    return grad / sq
