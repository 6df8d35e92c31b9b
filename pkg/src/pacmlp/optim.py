"""Parameter update rules (SGD, momentum, Adam) and the training loop.

Updates are pure: step() returns fresh parameter and state values. The loop
is deterministic given its config: epoch e shuffles with the splitmix64
subkey derive(shuffle_seed, e), minibatch gradients are means over the
batch, and end-of-epoch metrics come from one full-dataset forward pass.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from . import numerics, prng
from .data import LabeledDataset
from .mlp import Activation, BatchTrace, Gradients, MlpParams, PARAM_FIELDS, batch_mean_gradients, forward_batch


class OptimizerKind(Enum):
    SGD = "sgd"
    MOMENTUM = "momentum"
    ADAM = "adam"


@dataclass(frozen=True)
class TrainConfig:
    optimizer: OptimizerKind = OptimizerKind.SGD
    lr: float = 0.01
    momentum_coef: float = 0.9
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    epochs: int = 1
    batch_size: int = 64
    shuffle_seed: int = 0

    def __post_init__(self):
        if self.lr <= 0.0:
            raise ValueError(f"learning rate must be positive, got {self.lr}")
        if not 0.0 <= self.momentum_coef < 1.0:
            raise ValueError(f"momentum coefficient must be in [0, 1), got {self.momentum_coef}")
        for name in ("adam_beta1", "adam_beta2"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ValueError(f"{name} must be in [0, 1), got {v}")
        if self.adam_eps <= 0.0:
            raise ValueError(f"adam_eps must be positive, got {self.adam_eps}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be nonnegative, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch size must be >= 1, got {self.batch_size}")


#: Published defaults for the three rules; lr is the only one that differs.
DEFAULT_LR = {OptimizerKind.SGD: 0.01, OptimizerKind.MOMENTUM: 0.01, OptimizerKind.ADAM: 0.001}


def default_train_config(optimizer: OptimizerKind, **overrides) -> TrainConfig:
    overrides.setdefault("lr", DEFAULT_LR[optimizer])
    return TrainConfig(optimizer=optimizer, **overrides)


def _zeros_like_params(params: MlpParams) -> Gradients:
    return Gradients(*(np.zeros_like(getattr(params, f)) for f in PARAM_FIELDS))


@dataclass
class OptimizerState:
    step_count: int = 0
    velocity: Gradients | None = None
    first_moment: Gradients | None = None
    second_moment: Gradients | None = None


def init_state(params: MlpParams, cfg: TrainConfig) -> OptimizerState:
    state = OptimizerState()
    if cfg.optimizer is OptimizerKind.MOMENTUM:
        state.velocity = _zeros_like_params(params)
    elif cfg.optimizer is OptimizerKind.ADAM:
        state.first_moment = _zeros_like_params(params)
        state.second_moment = _zeros_like_params(params)
    return state


def _check_shapes(params: MlpParams, grads: Gradients) -> None:
    for f in PARAM_FIELDS:
        p, g = getattr(params, f), getattr(grads, f)
        if p.shape != g.shape:
            raise ValueError(f"gradient shape mismatch on {f}: {g.shape} vs {p.shape}")


def step(
    params: MlpParams, grads: Gradients, state: OptimizerState, cfg: TrainConfig
) -> tuple[MlpParams, OptimizerState]:
    """One optimizer update; returns new params and advanced state."""
    _check_shapes(params, grads)
    t = state.step_count + 1
    new_params = {}
    new_state = OptimizerState(step_count=t)

    if cfg.optimizer is OptimizerKind.SGD:
        for f in PARAM_FIELDS:
            new_params[f] = getattr(params, f) - cfg.lr * getattr(grads, f)
    elif cfg.optimizer is OptimizerKind.MOMENTUM:
        vel = state.velocity if state.velocity is not None else _zeros_like_params(params)
        new_vel = {}
        for f in PARAM_FIELDS:
            v = cfg.momentum_coef * getattr(vel, f) + getattr(grads, f)
            new_vel[f] = v
            new_params[f] = getattr(params, f) - cfg.lr * v
        new_state.velocity = Gradients(**new_vel)
    elif cfg.optimizer is OptimizerKind.ADAM:
        m_prev = state.first_moment if state.first_moment is not None else _zeros_like_params(params)
        v_prev = state.second_moment if state.second_moment is not None else _zeros_like_params(params)
        bc1 = 1.0 - cfg.adam_beta1**t
        bc2 = 1.0 - cfg.adam_beta2**t
        new_m, new_v = {}, {}
        for f in PARAM_FIELDS:
            g = getattr(grads, f)
            m = cfg.adam_beta1 * getattr(m_prev, f) + (1.0 - cfg.adam_beta1) * g
            v = cfg.adam_beta2 * getattr(v_prev, f) + (1.0 - cfg.adam_beta2) * g * g
            new_m[f] = m
            new_v[f] = v
            new_params[f] = getattr(params, f) - cfg.lr * (m / bc1) / (np.sqrt(v / bc2) + cfg.adam_eps)
        new_state.first_moment = Gradients(**new_m)
        new_state.second_moment = Gradients(**new_v)
    else:  # pragma: no cover
        raise ValueError(f"unknown optimizer {cfg.optimizer}")

    return MlpParams(**new_params), new_state


@dataclass(frozen=True)
class EpochStats:
    """End-of-epoch training metrics (epoch numbers start at 1)."""

    epoch: int
    train_loss: float
    train_error: float
    bound_proxy: float
    mean_log_z: float


def _stats_from_trace(gy: np.ndarray, qy: np.ndarray, labels: np.ndarray) -> tuple[float, float, float, float]:
    log_z = numerics.logsumexp_rows(gy)
    energies = -gy[np.arange(labels.shape[0]), labels]
    losses = log_z + energies
    errors = float(np.mean(np.argmax(qy, axis=1) != labels))
    return float(np.mean(losses)), errors, float(np.mean(energies)), float(np.mean(log_z))


def evaluate(
    params: MlpParams, data: LabeledDataset, activation: Activation = Activation.RELU
) -> tuple[float, float, float, float]:
    """(mean loss, error rate, mean true-class energy, mean log partition)."""
    bt = forward_batch(params, data.features, activation)
    return _stats_from_trace(bt.gy, bt.qy, data.labels)


def train(
    params: MlpParams,
    data: LabeledDataset,
    cfg: TrainConfig,
    callback: Callable[[int, MlpParams, EpochStats, "BatchTrace"], None] | None = None,
    activation: Activation = Activation.RELU,
    stop_at_zero_error: bool = False,
) -> tuple[MlpParams, list[EpochStats]]:
    """Minibatch training loop; returns final params and per-epoch history.

    The callback observes (epoch, params, stats, trace) where trace is the
    end-of-epoch forward pass over the full training set, so observers can
    derive further metrics without re-running it. ``stop_at_zero_error``
    ends training early once the end-of-epoch train error reaches zero.
    """
    if data.n == 0:
        raise ValueError("cannot train on an empty dataset")
    state = init_state(params, cfg)
    history: list[EpochStats] = []
    for epoch in range(1, cfg.epochs + 1):
        perm = prng.permutation(prng.derive(cfg.shuffle_seed, epoch), data.n)
        for start in range(0, data.n, cfg.batch_size):
            idx = perm[start : start + cfg.batch_size]
            grads, _ = batch_mean_gradients(params, data.features[idx], data.labels[idx], activation)
            params, state = step(params, grads, state, cfg)
        bt = forward_batch(params, data.features, activation)
        loss, err, mean_energy, mean_log_z = _stats_from_trace(bt.gy, bt.qy, data.labels)
        stats = EpochStats(
            epoch=epoch, train_loss=loss, train_error=err, bound_proxy=mean_energy, mean_log_z=mean_log_z
        )
        history.append(stats)
        if callback is not None:
            callback(epoch, params, stats, bt)
        if stop_at_zero_error and err == 0.0:
            break
    return params, history
