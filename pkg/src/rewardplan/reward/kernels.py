"""Hot numeric kernels for reward-model training and scoring.

Two interchangeable backends implement the same arithmetic: compiled
numba kernels and a pure-numpy fallback. Selection order is the explicit
``backend=`` argument, then the REWARDPLAN_BACKEND environment variable,
then numba when importable. Each backend is bitwise-deterministic with
itself; across backends results agree only to floating-point roundoff
(summation order differs).

CSR convention: row j of a batch is indices[indptr[j]:indptr[j+1]] and
values[indptr[j]:indptr[j+1]], with unique indices within a row.
"""

from __future__ import annotations

import math
import os

import numpy as np

from rewardplan.errors import ConfigError

BACKEND_ENV = "REWARDPLAN_BACKEND"

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    HAS_NUMBA = False


def available_backends() -> tuple[str, ...]:
    return ("numba", "numpy") if HAS_NUMBA else ("numpy",)


def resolve_backend(backend: str | None = None) -> str:
    choice = backend or os.environ.get(BACKEND_ENV) or ("numba" if HAS_NUMBA else "numpy")
    if choice not in ("numba", "numpy"):
        raise ConfigError(f"unknown backend {choice!r}; expected 'numba' or 'numpy'")
    if choice == "numba" and not HAS_NUMBA:
        raise ConfigError("backend 'numba' requested but numba is not installed")
    return choice


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def _softplus(z: float) -> float:
    # log(1 + e^z) without overflow on either tail
    if z > 0:
        return z + math.log1p(math.exp(-z))
    return math.log1p(math.exp(z))


# --- pure-numpy backend -------------------------------------------------------

def _scores_np(w, indptr, indices, values):
    out = np.empty(indptr.size - 1, dtype=np.float64)
    for j in range(out.size):
        s, e = indptr[j], indptr[j + 1]
        out[j] = float(values[s:e] @ w[indices[s:e]])
    return out


def _pairwise_epoch_np(w, indptr, indices, values, order, batch_size, lr):
    total = 0.0
    n = order.size
    coefs = np.empty(batch_size, dtype=np.float64)
    for start in range(0, n, batch_size):
        batch = order[start : start + batch_size]
        for t in range(batch.size):
            s, e = indptr[batch[t]], indptr[batch[t] + 1]
            delta = float(values[s:e] @ w[indices[s:e]])
            total += _softplus(-delta)
            coefs[t] = _sigmoid(delta) - 1.0
        scale = lr / batch.size
        for t in range(batch.size):
            s, e = indptr[batch[t]], indptr[batch[t] + 1]
            w[indices[s:e]] -= (scale * coefs[t]) * values[s:e]
    return total / n


def _classification_epoch_np(w, bias, indptr, indices, values, labels, order, batch_size, lr):
    total = 0.0
    n = order.size
    grads = np.empty(batch_size, dtype=np.float64)
    for start in range(0, n, batch_size):
        batch = order[start : start + batch_size]
        for t in range(batch.size):
            j = batch[t]
            s, e = indptr[j], indptr[j + 1]
            z = float(values[s:e] @ w[indices[s:e]]) + bias
            y = labels[j]
            total += y * _softplus(-z) + (1.0 - y) * _softplus(z)
            grads[t] = _sigmoid(z) - y
        scale = lr / batch.size
        for t in range(batch.size):
            s, e = indptr[batch[t]], indptr[batch[t] + 1]
            w[indices[s:e]] -= (scale * grads[t]) * values[s:e]
            bias -= scale * grads[t]
    return total / n, bias


# --- numba backend ------------------------------------------------------------

if HAS_NUMBA:
    _sigmoid_nb = njit(cache=True)(_sigmoid)
    _softplus_nb = njit(cache=True)(_softplus)

    @njit(cache=True)
    def _scores_nb(w, indptr, indices, values):
        out = np.empty(indptr.size - 1, dtype=np.float64)
        for j in range(out.size):
            acc = 0.0
            for p in range(indptr[j], indptr[j + 1]):
                acc += values[p] * w[indices[p]]
            out[j] = acc
        return out

    @njit(cache=True)
    def _pairwise_epoch_nb(w, indptr, indices, values, order, batch_size, lr):
        total = 0.0
        n = order.size
        coefs = np.empty(batch_size, dtype=np.float64)
        start = 0
        while start < n:
            end = min(start + batch_size, n)
            bs = end - start
            for t in range(bs):
                j = order[start + t]
                acc = 0.0
                for p in range(indptr[j], indptr[j + 1]):
                    acc += values[p] * w[indices[p]]
                total += _softplus_nb(-acc)
                coefs[t] = _sigmoid_nb(acc) - 1.0
            scale = lr / bs
            for t in range(bs):
                j = order[start + t]
                c = scale * coefs[t]
                for p in range(indptr[j], indptr[j + 1]):
                    w[indices[p]] -= c * values[p]
            start = end
        return total / n

    @njit(cache=True)
    def _classification_epoch_nb(w, bias, indptr, indices, values, labels, order, batch_size, lr):
        total = 0.0
        n = order.size
        grads = np.empty(batch_size, dtype=np.float64)
        start = 0
        while start < n:
            end = min(start + batch_size, n)
            bs = end - start
            for t in range(bs):
                j = order[start + t]
                acc = bias
                for p in range(indptr[j], indptr[j + 1]):
                    acc += values[p] * w[indices[p]]
                y = labels[j]
                total += y * _softplus_nb(-acc) + (1.0 - y) * _softplus_nb(acc)
                grads[t] = _sigmoid_nb(acc) - y
            scale = lr / bs
            for t in range(bs):
                j = order[start + t]
                c = scale * grads[t]
                for p in range(indptr[j], indptr[j + 1]):
                    w[indices[p]] -= c * values[p]
                bias -= scale * grads[t]
            start = end
        return total / n, bias


# --- dispatch ------------------------------------------------------------------

def sparse_scores(w, indptr, indices, values, backend: str | None = None) -> np.ndarray:
    """Row-wise sparse dot products (no bias term)."""
    if resolve_backend(backend) == "numba":
        return _scores_nb(w, indptr, indices, values)
    return _scores_np(w, indptr, indices, values)


def dot_sparse(w, indices, values, backend: str | None = None) -> float:
    indptr = np.array([0, indices.size], dtype=np.int64)
    return float(sparse_scores(w, indptr, indices, values, backend)[0])


def pairwise_epoch(
    w, indptr, indices, values, order, batch_size: int, lr: float, backend: str | None = None
) -> float:
    """One seeded-order epoch of mini-batch SGD on the pairwise loss.

    Mutates ``w`` in place and returns the epoch's mean loss. Rows are
    difference vectors (positive minus negative features).
    """
    if resolve_backend(backend) == "numba":
        return float(_pairwise_epoch_nb(w, indptr, indices, values, order, batch_size, lr))
    return float(_pairwise_epoch_np(w, indptr, indices, values, order, batch_size, lr))


def classification_epoch(
    w,
    bias: float,
    indptr,
    indices,
    values,
    labels,
    order,
    batch_size: int,
    lr: float,
    backend: str | None = None,
) -> tuple[float, float]:
    """One epoch of mini-batch SGD on the binary cross-entropy target.

    Mutates ``w`` in place; the (trained) bias is passed and returned by
    value. Returns (mean loss, new bias).
    """
    if resolve_backend(backend) == "numba":
        loss, new_bias = _classification_epoch_nb(
            w, bias, indptr, indices, values, labels, order, batch_size, lr
        )
    else:
        loss, new_bias = _classification_epoch_np(
            w, bias, indptr, indices, values, labels, order, batch_size, lr
        )
    return float(loss), float(new_bias)
