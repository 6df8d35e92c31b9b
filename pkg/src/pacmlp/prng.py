"""Deterministic random streams built on splitmix64.

Every random draw in this package (weight init, epoch shuffles, synthetic
data, label corruption, subsampling) comes from here, so that runs are
bit-reproducible across platforms and independent of thread scheduling.

The generator is splitmix64 (Steele, Lea & Flood 2014): output ``i`` of the
stream for ``seed`` is ``mix64(seed + (i + 1) * GAMMA)`` with the standard
two-round multiply/xorshift finalizer. Because each output depends only on
(seed, i), streams are counter-based: any slice can be produced directly,
in vectorized form, without sequential state.

Subkey derivation is fixed as ``derive(seed, tag) = output #tag of the
parent stream``; e.g. the shuffle key for epoch ``e`` is ``derive(seed, e)``.
"""
from __future__ import annotations

import math

import numpy as np

GAMMA = 0x9E3779B97F4A7C15
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MASK = 0xFFFFFFFFFFFFFFFF
_INV_2_53 = 2.0 ** -53


def stream(seed: int, n: int, offset: int = 0) -> np.ndarray:
    """Outputs ``offset .. offset+n-1`` of the splitmix64 stream, as uint64."""
    if n < 0:
        raise ValueError(f"stream length must be nonnegative, got {n}")
    with np.errstate(over="ignore"):
        idx = np.arange(offset + 1, offset + n + 1, dtype=np.uint64)
        z = np.uint64(seed & _MASK) + idx * np.uint64(GAMMA)
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


def derive(seed: int, tag: int) -> int:
    """Subkey for an independent stream: output #tag of the parent stream."""
    return int(stream(seed, 1, offset=tag)[0])


def uniform01(seed: int, n: int, offset: int = 0) -> np.ndarray:
    """n doubles in [0, 1), from the top 53 bits of each output."""
    return (stream(seed, n, offset) >> np.uint64(11)).astype(np.float64) * _INV_2_53


def uniform(seed: int, n: int, lo: float, hi: float) -> np.ndarray:
    return lo + uniform01(seed, n) * (hi - lo)


def normal(seed: int, n: int) -> np.ndarray:
    """n standard-normal draws via Box-Muller.

    Consumes 2*ceil(n/2) stream outputs: the first half feed the radius
    (mapped to (0,1] so the log is finite), the second half the angle.
    """
    m = (n + 1) // 2
    u1 = ((stream(seed, m, 0) >> np.uint64(11)).astype(np.float64) + 1.0) * _INV_2_53
    u2 = uniform01(seed, m, offset=m)
    r = np.sqrt(-2.0 * np.log(u1))
    theta = (2.0 * math.pi) * u2
    out = np.empty(2 * m)
    out[0::2] = r * np.cos(theta)
    out[1::2] = r * np.sin(theta)
    return out[:n]


def permutation(seed: int, n: int) -> np.ndarray:
    """Deterministic permutation of range(n): argsort of n stream outputs."""
    return np.argsort(stream(seed, n), kind="stable")


def randint(seed: int, n: int, bound: int) -> np.ndarray:
    """n integers uniform over [0, bound). Modulo bias is < 2**-59 for the
    bounds used here (class counts), far below any test's resolution."""
    if bound < 1:
        raise ValueError(f"bound must be positive, got {bound}")
    return (stream(seed, n) % np.uint64(bound)).astype(np.int64)
