"""Layer-level Gibbs measures and the energy/partition view of the network.

Each layer's activation vector induces a Gibbs measure over that layer's
filters: probabilities softmax(activations), per-outcome energies equal to
negative activations, and log partition logsumexp(activations). Hidden
layers use post-ReLU activations; the output layer uses the logits gy, so
that cross entropy splits exactly into true-class energy plus log partition.

Also here: the product-of-experts rewrite of the output head (an algebraic
identity checked in log space) and the first-order (Jacobian) expansion
residual of the hidden stack under a parameter step.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics
from .mlp import Activation, ForwardTrace, MlpParams, _act, _act_grad


@dataclass(frozen=True)
class GibbsMeasure:
    """Normalized measure over one layer's filters."""

    probs: np.ndarray
    log_z: float
    energies: np.ndarray


@dataclass(frozen=True)
class PoeResidual:
    """Per-class |log lhs - log rhs| of the product-of-experts identity."""

    max_abs_log_residual: float
    per_class: np.ndarray


def layer_gibbs(activations) -> GibbsMeasure:
    """Gibbs measure induced by a layer's activation vector."""
    a = numerics.as_vector(activations)
    if a.size == 0:
        raise ValueError("cannot build a Gibbs measure from an empty activation vector")
    return GibbsMeasure(probs=numerics.softmax(a), log_z=numerics.logsumexp(a), energies=-a)


def output_marginal(trace: ForwardTrace) -> GibbsMeasure:
    """Class distribution of the network as a Gibbs measure over logits.

    probs coincides with trace.qy; the measure form adds energies and log Z.
    """
    return layer_gibbs(trace.gy)


def energy(trace: ForwardTrace, label: int) -> float:
    """True-class energy: the negative output logit."""
    l = trace.gy.shape[0]
    if not 0 <= label < l:
        raise ValueError(f"label {label} out of range for {l} classes")
    return -float(trace.gy[label])


def log_partition(trace: ForwardTrace) -> float:
    """Log of the output partition sum, logsumexp(gy)."""
    return numerics.logsumexp(trace.gy)


def poe_check(params: MlpParams, f2) -> PoeResidual:
    """Check the product-of-experts factorization of the output head.

    Left side: log softmax of the logits, gy_l - logsumexp(gy).
    Right side: -log Z'' + sum_k w3[k,l] * (f2_k - logsumexp(f2)), where
    log Z''_l = logsumexp(gy) - by_l - sum_k w3[k,l] * logsumexp(f2).
    Both sides are evaluated independently; exact algebra makes the residual
    pure floating-point noise.
    """
    f2 = numerics.as_vector(f2)
    k = params.w3.shape[0]
    if f2.shape[0] != k:
        raise ValueError(f"f2 length {f2.shape[0]} does not match head input dimension {k}")
    gy = f2 @ params.w3 + params.by
    log_zy = numerics.logsumexp(gy)
    log_z2 = numerics.logsumexp(f2)
    lhs = gy - log_zy
    col_sums = params.w3.sum(axis=0)
    log_zpp = log_zy - params.by - col_sums * log_z2
    rhs = -log_zpp + (f2 - log_z2) @ params.w3
    per_class = np.abs(lhs - rhs)
    return PoeResidual(max_abs_log_residual=float(per_class.max()), per_class=per_class)


def linearization_residual(
    params_before: MlpParams,
    params_after: MlpParams,
    x,
    activation: Activation = Activation.RELU,
) -> float:
    """Deviation of the hidden stack from its first-order expansion.

    Runs layers 1-2 under both parameter sets and subtracts the analytic
    Jacobian-vector product (w.r.t. the hidden layers' own parameters,
    w1,b1,w2,b2, evaluated at `params_before`) applied to the parameter
    difference. Returns ||f2_after - f2_before - J.dtheta||_2 / ||dtheta||_2
    with the denominator floored at 1e-300. Away from ReLU kinks the
    numerator is second order in the step, so the ratio vanishes linearly
    as the step shrinks.
    """
    if params_before.dims != params_after.dims:
        raise ValueError(f"parameter shape mismatch: {params_before.dims} vs {params_after.dims}")
    x = numerics.as_vector(x)
    if x.shape[0] != params_before.w1.shape[0]:
        raise ValueError(
            f"input length {x.shape[0]} does not match input dimension {params_before.w1.shape[0]}"
        )

    g1 = x @ params_before.w1 + params_before.b1
    f1 = _act(g1, activation)
    g2 = f1 @ params_before.w2 + params_before.b2
    f2 = _act(g2, activation)

    g1a = x @ params_after.w1 + params_after.b1
    f1a = _act(g1a, activation)
    g2a = f1a @ params_after.w2 + params_after.b2
    f2a = _act(g2a, activation)

    dw1 = params_after.w1 - params_before.w1
    db1 = params_after.b1 - params_before.b1
    dw2 = params_after.w2 - params_before.w2
    db2 = params_after.b2 - params_before.b2

    m1 = _act_grad(g1, activation)
    m2 = _act_grad(g2, activation)
    df1 = m1 * (x @ dw1 + db1)
    df2 = m2 * (f1 @ dw2 + df1 @ params_before.w2 + db2)

    num = float(np.linalg.norm(f2a - f2 - df2))
    den = float(np.sqrt(sum(float(np.sum(d * d)) for d in (dw1, db1, dw2, db2))))
    return num / max(den, 1e-300)
