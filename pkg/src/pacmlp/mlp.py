"""Three-layer perceptron: config, parameters, forward traces, exact backprop.

The network is x -> g1 -> f1 -> g2 -> f2 -> gy -> qy with two ReLU hidden
layers and a softmax head. A forward pass returns the full trace because the
probabilistic layer measures (see gibbs.py) are functions of every
intermediate activation, not just the output.

Loss is cross entropy computed in log space, ``logsumexp(gy) - gy[label]``,
which makes the decomposition into true-label energy plus log partition an
exact floating-point identity rather than an approximation.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import numerics, prng


class Activation(Enum):
    RELU = "relu"
    IDENTITY = "identity"  # linear hidden layers, used by linearization checks


@dataclass(frozen=True)
class MlpConfig:
    """Layer widths: m inputs, t and k hidden neurons, l classes."""

    m: int
    t: int
    k: int
    l: int
    activation: Activation = Activation.RELU

    def __post_init__(self):
        for name in ("m", "t", "k", "l"):
            if getattr(self, name) < 1:
                raise ValueError(f"dimension {name} must be >= 1, got {getattr(self, name)}")


@dataclass(frozen=True)
class MlpParams:
    """All weights and biases. Immutable; updates build a new instance."""

    w1: np.ndarray  # m x t
    b1: np.ndarray  # t
    w2: np.ndarray  # t x k
    b2: np.ndarray  # k
    w3: np.ndarray  # k x l
    by: np.ndarray  # l

    def __post_init__(self):
        object.__setattr__(self, "w1", numerics.as_matrix(self.w1))
        object.__setattr__(self, "b1", numerics.as_vector(self.b1))
        object.__setattr__(self, "w2", numerics.as_matrix(self.w2))
        object.__setattr__(self, "b2", numerics.as_vector(self.b2))
        object.__setattr__(self, "w3", numerics.as_matrix(self.w3))
        object.__setattr__(self, "by", numerics.as_vector(self.by))
        m, t = self.w1.shape
        t2, k = self.w2.shape
        k2, l = self.w3.shape
        if (t2, k2) != (t, k) or self.b1.shape != (t,) or self.b2.shape != (k,) or self.by.shape != (l,):
            raise ValueError(
                "inconsistent parameter shapes: "
                f"w1{self.w1.shape} b1{self.b1.shape} w2{self.w2.shape} "
                f"b2{self.b2.shape} w3{self.w3.shape} by{self.by.shape}"
            )

    @property
    def dims(self) -> tuple[int, int, int, int]:
        return (self.w1.shape[0], self.w1.shape[1], self.w2.shape[1], self.w3.shape[1])


@dataclass(frozen=True)
class ForwardTrace:
    """All intermediates of one forward pass on a single sample."""

    x: np.ndarray
    g1: np.ndarray
    f1: np.ndarray
    g2: np.ndarray
    f2: np.ndarray
    gy: np.ndarray
    qy: np.ndarray


@dataclass(frozen=True)
class BatchTrace:
    """Batched forward intermediates, samples as rows."""

    x: np.ndarray
    g1: np.ndarray
    f1: np.ndarray
    g2: np.ndarray
    f2: np.ndarray
    gy: np.ndarray
    qy: np.ndarray


@dataclass(frozen=True)
class Gradients:
    """Loss gradients, same shapes as MlpParams."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    w3: np.ndarray
    by: np.ndarray


PARAM_FIELDS = ("w1", "b1", "w2", "b2", "w3", "by")


def init_params(config: MlpConfig, seed: int) -> MlpParams:
    """Uniform(-a, a) weights with a = sqrt(6 / (fan_in + fan_out)); zero biases.

    Deterministic: block i draws from the splitmix64 substream derive(seed, i).
    """
    def block(tag: int, fan_in: int, fan_out: int) -> np.ndarray:
        a = np.sqrt(6.0 / (fan_in + fan_out))
        draws = prng.uniform(prng.derive(seed, tag), fan_in * fan_out, -a, a)
        return draws.reshape(fan_in, fan_out)

    return MlpParams(
        w1=block(1, config.m, config.t),
        b1=np.zeros(config.t),
        w2=block(2, config.t, config.k),
        b2=np.zeros(config.k),
        w3=block(3, config.k, config.l),
        by=np.zeros(config.l),
    )


def _act(g: np.ndarray, activation: Activation) -> np.ndarray:
    if activation is Activation.RELU:
        return np.maximum(g, 0.0)
    return g.copy()


def _act_grad(g: np.ndarray, activation: Activation) -> np.ndarray:
    # ReLU subgradient at exactly 0 is defined as 0.
    if activation is Activation.RELU:
        return (g > 0.0).astype(np.float64)
    return np.ones_like(g)


def forward(params: MlpParams, x, activation: Activation = Activation.RELU) -> ForwardTrace:
    """Single-sample forward pass through the reference kernels."""
    x = numerics.as_vector(x)
    m = params.w1.shape[0]
    if x.shape[0] != m:
        raise ValueError(f"input length {x.shape[0]} does not match input dimension {m}")
    g1 = numerics.matmul(x[None, :], params.w1)[0] + params.b1
    f1 = _act(g1, activation)
    g2 = numerics.matmul(f1[None, :], params.w2)[0] + params.b2
    f2 = _act(g2, activation)
    gy = numerics.matmul(f2[None, :], params.w3)[0] + params.by
    qy = numerics.softmax(gy)
    return ForwardTrace(x=x, g1=g1, f1=f1, g2=g2, f2=f2, gy=gy, qy=qy)


def forward_batch(params: MlpParams, x: np.ndarray, activation: Activation = Activation.RELU) -> BatchTrace:
    """Vectorized forward over samples-as-rows (BLAS-backed hot path)."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != params.w1.shape[0]:
        raise ValueError(f"batch shape {x.shape} does not match input dimension {params.w1.shape[0]}")
    g1 = x @ params.w1 + params.b1
    f1 = _act(g1, activation)
    g2 = f1 @ params.w2 + params.b2
    f2 = _act(g2, activation)
    gy = f2 @ params.w3 + params.by
    qy = numerics.softmax_rows(gy)
    return BatchTrace(x=x, g1=g1, f1=f1, g2=g2, f2=f2, gy=gy, qy=qy)


def cross_entropy_loss(trace: ForwardTrace, label: int) -> float:
    """-log qy[label], evaluated stably as logsumexp(gy) - gy[label]."""
    l = trace.gy.shape[0]
    if not 0 <= label < l:
        raise ValueError(f"label {label} out of range for {l} classes")
    return numerics.logsumexp(trace.gy) - float(trace.gy[label])


def backward(
    params: MlpParams, trace: ForwardTrace, label: int, activation: Activation = Activation.RELU
) -> Gradients:
    """Exact analytic gradients of cross_entropy_loss at this trace."""
    l = trace.gy.shape[0]
    if not 0 <= label < l:
        raise ValueError(f"label {label} out of range for {l} classes")
    delta_y = trace.qy.copy()
    delta_y[label] -= 1.0
    dg2 = (params.w3 @ delta_y) * _act_grad(trace.g2, activation)
    dg1 = (params.w2 @ dg2) * _act_grad(trace.g1, activation)
    return Gradients(
        w1=np.outer(trace.x, dg1),
        b1=dg1,
        w2=np.outer(trace.f1, dg2),
        b2=dg2,
        w3=np.outer(trace.f2, delta_y),
        by=delta_y,
    )


def batch_mean_gradients(
    params: MlpParams,
    x: np.ndarray,
    labels: np.ndarray,
    activation: Activation = Activation.RELU,
) -> tuple[Gradients, float]:
    """Mean gradient and mean loss over a minibatch, fully vectorized."""
    bt = forward_batch(params, x, activation)
    n = x.shape[0]
    labels = np.asarray(labels)
    delta = bt.qy.copy()
    delta[np.arange(n), labels] -= 1.0
    delta /= n
    dg2 = (delta @ params.w3.T) * _act_grad(bt.g2, activation)
    dg1 = (dg2 @ params.w2.T) * _act_grad(bt.g1, activation)
    grads = Gradients(
        w1=bt.x.T @ dg1,
        b1=dg1.sum(axis=0),
        w2=bt.f1.T @ dg2,
        b2=dg2.sum(axis=0),
        w3=bt.f2.T @ delta,
        by=delta.sum(axis=0),
    )
    losses = numerics.logsumexp_rows(bt.gy) - bt.gy[np.arange(n), labels]
    return grads, float(np.mean(losses))


def predict(trace: ForwardTrace) -> int:
    """Argmax class; ties break to the lowest index."""
    return int(np.argmax(trace.qy))


CHECKPOINT_MAGIC = b"PACMLP01"


def save_params(params: MlpParams, path) -> None:
    """Self-describing binary checkpoint.

    Layout: 8-byte magic "PACMLP01"; four u32 little-endian dims (M,T,K,L);
    then w1,b1,w2,b2,w3,by as row-major little-endian float64 blocks.
    """
    m, t, k, l = params.dims
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<4I", m, t, k, l))
        for name in PARAM_FIELDS:
            fh.write(np.ascontiguousarray(getattr(params, name)).astype("<f8").tobytes())


def load_params(path) -> MlpParams:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:8] != CHECKPOINT_MAGIC:
        raise ValueError(f"bad checkpoint magic {blob[:8]!r}, expected {CHECKPOINT_MAGIC!r}")
    m, t, k, l = struct.unpack("<4I", blob[8:24])
    shapes = [(m, t), (t,), (t, k), (k,), (k, l), (l,)]
    need = 24 + 8 * sum(int(np.prod(s)) for s in shapes)
    if len(blob) != need:
        raise ValueError(f"checkpoint truncated or oversized: {len(blob)} bytes, expected {need}")
    offset = 24
    blocks = []
    for shape in shapes:
        count = int(np.prod(shape))
        arr = np.frombuffer(blob, dtype="<f8", count=count, offset=offset).reshape(shape)
        blocks.append(arr.astype(np.float64))
        offset += 8 * count
    return MlpParams(*blocks)
