import numpy as np
import pytest

from pacmlp import data, mlp, prng


def make_blobs(n=50, dim=4, seed=0, margin=1.5, noise=0.3):
    """Linearly separable two-class point cloud (class along the first axis)."""
    assert n % 2 == 0
    feats = prng.normal(prng.derive(seed, 1), n * dim).reshape(n, dim) * noise
    labels = np.arange(n) % 2
    feats[:, 0] += np.where(labels == 0, -margin, margin)
    return data.LabeledDataset(
        features=feats,
        labels=labels,
        num_classes=2,
        meta=data.DatasetMeta(source=data.DatasetSource.SYNTHETIC),
    )


def random_params(dims, seed):
    """Standard-normal parameters (finite, generic position)."""
    m, t, k, l = dims
    need = [("w1", (m, t)), ("b1", (t,)), ("w2", (t, k)), ("b2", (k,)), ("w3", (k, l)), ("by", (l,))]
    blocks = {}
    for i, (name, shape) in enumerate(need):
        blocks[name] = prng.normal(prng.derive(seed, 10 + i), int(np.prod(shape))).reshape(shape)
    return mlp.MlpParams(**blocks)


def params_away_from_kinks(dims, x, min_margin=5e-2, start_seed=0):
    """Random params whose pre-activations at x stay clear of ReLU kinks."""
    seed = start_seed
    while True:
        params = random_params(dims, seed)
        trace = mlp.forward(params, x)
        if min(np.abs(trace.g1).min(), np.abs(trace.g2).min()) > min_margin:
            return params
        seed += 1


@pytest.fixture
def blob_dataset():
    return make_blobs()
