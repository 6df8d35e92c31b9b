"""Energy-based probabilistic instrumentation for small ReLU MLPs.

A from-scratch three-layer perceptron whose every forward pass is traced
into layer-level Gibbs measures (filter probabilities, energies, partition
functions), with cross entropy decomposed exactly into true-class energy
plus log partition, the corresponding PAC-Bayes style bound and its
mean-energy proxy, ELBO terms, and a reproducible experiment harness.
"""

from .bound import BoundParams, BoundReport, DGapParams, ElboReport
from .data import DatasetMeta, DatasetSource, LabeledDataset, LabelMode
from .gibbs import GibbsMeasure, PoeResidual
from .mlp import Activation, ForwardTrace, Gradients, MlpConfig, MlpParams
from .optim import EpochStats, OptimizerKind, OptimizerState, TrainConfig

__all__ = [
    "Activation",
    "BoundParams",
    "BoundReport",
    "DGapParams",
    "DatasetMeta",
    "DatasetSource",
    "ElboReport",
    "EpochStats",
    "ForwardTrace",
    "GibbsMeasure",
    "Gradients",
    "LabelMode",
    "LabeledDataset",
    "MlpConfig",
    "MlpParams",
    "OptimizerKind",
    "OptimizerState",
    "PoeResidual",
    "TrainConfig",
]

__version__ = "0.1.0"
