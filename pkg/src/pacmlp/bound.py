"""Generalization-bound arithmetic.

The chain: per-sample cross entropy splits exactly into true-class energy
plus log partition; averaging gives the empirical risk; plugging the
averaged split into the saturating-envelope bound yields a computable
high-probability bound on expected risk, with the mean true-class energy as
its training-time proxy (the log-partition mean acts as a normalizer and is
dropped from the proxy).

Also here: the two directional KL divergences between the model's class
distribution and an epsilon-relaxed one-hot target, whose difference (the
d-gap) vanishes as training drives the loss to zero, and the computable
ELBO terms built from the same relaxed target.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import numerics
from .data import LabeledDataset
from .mlp import Activation, MlpParams, forward_batch


@dataclass(frozen=True)
class BoundParams:
    """delta: failure probability; [a, b]: loss range; log_pyx: assumed
    per-sample log-evidence (None resolves to -log num_classes at use)."""

    delta: float = 0.05
    a: float = 0.0
    b: float = 10.0
    log_pyx: float | None = None

    def __post_init__(self):
        if not 0.0 < self.delta <= 1.0:
            raise ValueError(f"delta must be in (0, 1], got {self.delta}")
        if self.b <= self.a:
            raise ValueError(f"loss range needs b > a, got a={self.a}, b={self.b}")
        if self.log_pyx is not None and self.log_pyx > 0.0:
            raise ValueError(f"log_pyx is a log-probability and must be <= 0, got {self.log_pyx}")


@dataclass(frozen=True)
class DGapParams:
    """epsilon: off-label mass of the relaxed one-hot target (keeps logs finite)."""

    epsilon: float = 1e-3

    def __post_init__(self):
        if self.epsilon <= 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")


@dataclass(frozen=True)
class BoundReport:
    n: int
    empirical_risk: float
    mean_energy: float
    mean_log_z: float
    bound_general: float
    bound_corollary2: float
    bound_proxy: float
    mean_d_gap: float


@dataclass(frozen=True)
class ElboReport:
    neg_n_risk: float
    kl_q_relaxed_posterior: float
    mean_d_gap: float


def _per_sample_stats(
    params: MlpParams, data: LabeledDataset, activation: Activation = Activation.RELU
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(losses, energies, log partitions, class probabilities) per sample."""
    if data.n == 0:
        raise ValueError("dataset is empty")
    m = params.w1.shape[0]
    if data.dim != m:
        raise ValueError(f"feature dimension {data.dim} does not match input dimension {m}")
    bt = forward_batch(params, data.features, activation)
    log_z = numerics.logsumexp_rows(bt.gy)
    energies = -bt.gy[np.arange(data.n), data.labels]
    losses = log_z + energies
    return losses, energies, log_z, bt.qy


def empirical_risk(params: MlpParams, data: LabeledDataset) -> float:
    """Mean cross entropy over the dataset."""
    losses, _, _, _ = _per_sample_stats(params, data)
    return float(np.mean(losses))


def pac_bayes_bound_general(expected_risk: float, kl: float, n: int, p: BoundParams) -> float:
    """Saturating-envelope bound for a loss with range [a, b].

    (b-a)/(1-e^(a-b)) * (1 - exp(-risk - (kl + ln(1/delta))/n + a)).
    """
    if kl < 0.0:
        raise ValueError(f"kl must be nonnegative, got {kl}")
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    envelope = (p.b - p.a) / (1.0 - math.exp(p.a - p.b))
    exponent = -expected_risk - (kl + math.log(1.0 / p.delta)) / n + p.a
    return envelope * (1.0 - math.exp(exponent))


def bound_proxy(params: MlpParams, data: LabeledDataset) -> float:
    """Mean true-class energy: the computable training-time bound surrogate."""
    _, energies, _, _ = _per_sample_stats(params, data)
    return float(np.mean(energies))


def corollary2_bound(
    params: MlpParams,
    data: LabeledDataset,
    p: BoundParams,
    dgap: DGapParams = DGapParams(),
) -> BoundReport:
    """Full bound report for one model/dataset pair (requires a = 0).

    bound_corollary2 = b/(1-e^-b) * (1 - exp(ln(delta)/n + log_pyx - mean(E + logZ))).
    bound_general re-derives the same quantity through the general formula,
    using the evidence term -n*log_pyx as the divergence argument.
    """
    if p.a != 0.0:
        raise ValueError(f"this bound form fixes the loss lower end at 0, got a={p.a}")
    losses, energies, log_z, qy = _per_sample_stats(params, data)
    n = data.n
    log_pyx = p.log_pyx if p.log_pyx is not None else -math.log(data.num_classes)
    risk = float(np.mean(losses))
    mean_e = float(np.mean(energies))
    mean_z = float(np.mean(log_z))
    envelope = p.b / (1.0 - math.exp(-p.b))
    value = envelope * (1.0 - math.exp(math.log(p.delta) / n + log_pyx - (mean_e + mean_z)))
    general = pac_bayes_bound_general(risk, -n * log_pyx, n, p)
    d_vals = d_gap_rows(qy, data.labels, data.num_classes, dgap.epsilon)
    return BoundReport(
        n=n,
        empirical_risk=risk,
        mean_energy=mean_e,
        mean_log_z=mean_z,
        bound_general=general,
        bound_corollary2=value,
        bound_proxy=mean_e,
        mean_d_gap=float(np.mean(d_vals)),
    )


def _relaxed_onehot(num_classes: int, labels: np.ndarray, epsilon: float) -> np.ndarray:
    if epsilon * (num_classes - 1) >= 1.0:
        raise ValueError(f"epsilon {epsilon} too large for {num_classes} classes")
    target = np.full((labels.shape[0], num_classes), epsilon)
    target[np.arange(labels.shape[0]), labels] = 1.0 - (num_classes - 1) * epsilon
    return target


def _xlogx(q: np.ndarray) -> np.ndarray:
    # 0 * log 0 := 0
    out = np.zeros_like(q)
    mask = q > 0.0
    out[mask] = q[mask] * np.log(q[mask])
    return out


def d_gap_rows(qy: np.ndarray, labels: np.ndarray, num_classes: int, epsilon: float) -> np.ndarray:
    """Vectorized d_gap over rows of class probabilities (one label per row)."""
    target = _relaxed_onehot(num_classes, labels, epsilon)
    rows = np.arange(labels.shape[0])
    picked = qy[rows, labels]
    neg_log_q = np.where(picked > 0.0, -np.log(np.maximum(picked, 1e-320)), np.inf)
    cross = np.sum(qy * np.log(target), axis=1)
    entropy = -np.sum(_xlogx(qy), axis=1)
    return neg_log_q + cross + entropy


def d_gap(q, label: int, dp: DGapParams) -> float:
    """Difference of the two KL directions against the relaxed one-hot target.

    d = -log q[label] + sum_l q[l] log target[l] + H(q). Converges to zero
    as q concentrates on the label and epsilon shrinks.
    """
    q = numerics.as_vector(q)
    num_classes = q.shape[0]
    if not 0 <= label < num_classes:
        raise ValueError(f"label {label} out of range for {num_classes} classes")
    if q.min() < 0.0 or abs(float(q.sum()) - 1.0) > 1e-9:
        raise ValueError("q must be a probability vector (nonnegative, summing to 1 within 1e-9)")
    labels = np.array([label])
    return float(d_gap_rows(q[None, :], labels, num_classes, dp.epsilon)[0])


def elbo_report(params: MlpParams, data: LabeledDataset, dp: DGapParams) -> ElboReport:
    """Computable ELBO pieces: -n * risk (likelihood term) and the summed
    KL from the model's class distributions to the relaxed one-hot targets.
    The divergence-to-prior term involves the unknowable true prior and is
    deliberately not estimated."""
    losses, _, _, qy = _per_sample_stats(params, data)
    n = data.n
    target = _relaxed_onehot(data.num_classes, data.labels, dp.epsilon)
    kl_rows = np.sum(_xlogx(qy) - qy * np.log(target), axis=1)
    d_vals = d_gap_rows(qy, data.labels, data.num_classes, dp.epsilon)
    return ElboReport(
        neg_n_risk=-float(n) * float(np.mean(losses)),
        kl_q_relaxed_posterior=float(np.sum(kl_rows)),
        mean_d_gap=float(np.mean(d_vals)),
    )
