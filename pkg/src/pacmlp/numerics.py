"""Dense float64 kernels with strict shape and finiteness contracts.

``matmul`` is the reference product: it accumulates strictly in index order
(k = 0, 1, ...) with one IEEE rounding per multiply and per add, so its
output is bit-for-bit identical to a naive triple loop at any size. Batched
training paths elsewhere use BLAS for speed; this one is the ground truth.

``logsumexp``/``softmax`` use max-shifting so partition sums stay finite for
activations far beyond exp-overflow range (values near 30 already produce
partition sums around 1e12).
"""
from __future__ import annotations

import numpy as np


def as_matrix(data) -> np.ndarray:
    """Validate and return a 2-D float64 C-order matrix (finite entries)."""
    a = np.ascontiguousarray(data, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite (no NaN/Inf)")
    return a


def as_vector(data) -> np.ndarray:
    """Validate and return a 1-D float64 vector (finite entries)."""
    v = np.ascontiguousarray(data, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got ndim={v.ndim}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite (no NaN/Inf)")
    return v


def matmul(a, b) -> np.ndarray:
    """Reference matrix product, accumulated in fixed k-order.

    Matches a naive triple-loop product bit-for-bit on float64 because each
    partial sum is rounded exactly once per term, in the same order.
    """
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul dimension mismatch: {a.shape} x {b.shape}")
    out = np.zeros((a.shape[0], b.shape[1]))
    for k in range(a.shape[1]):
        out += a[:, k : k + 1] * b[k : k + 1, :]
    return out


def logsumexp(v) -> float:
    """log(sum(exp(v))), max-shifted; finite for any finite input."""
    v = as_vector(v)
    if v.size == 0:
        raise ValueError("logsumexp of an empty vector is undefined")
    m = float(np.max(v))
    return m + float(np.log(np.sum(np.exp(v - m))))


def softmax(v) -> np.ndarray:
    """exp(v - logsumexp(v)); strictly positive, sums to 1."""
    v = as_vector(v)
    if v.size == 0:
        raise ValueError("softmax of an empty vector is undefined")
    return np.exp(v - logsumexp(v))


def logsumexp_rows(a: np.ndarray) -> np.ndarray:
    """Row-wise logsumexp of a 2-D array (batched counterpart of logsumexp)."""
    m = np.max(a, axis=1, keepdims=True)
    return (m + np.log(np.sum(np.exp(a - m), axis=1, keepdims=True)))[:, 0]


def softmax_rows(a: np.ndarray) -> np.ndarray:
    m = np.max(a, axis=1, keepdims=True)
    e = np.exp(a - m)
    return e / np.sum(e, axis=1, keepdims=True)
