"""Layer activations as Gibbs measures, demonstrated on the synthetic set.

Trains the 1024-8-6-4 network on 256 diagonal-gradient images, then prints,
for one image per class, the first hidden layer's linear outputs, ReLU
activations, their exponentials, and the normalized filter probabilities.
High activation = low energy = high probability of that filter "occurring"
in the input; the winning filter differs per class.

Run from the repository root:  python demos/01_layer_probability_spaces.py
"""
import numpy as np

from pacmlp import data, mlp, numerics, optim

train = data.synthetic_diagonal(256, 32, seed=11)
params = mlp.init_params(mlp.MlpConfig(1024, 8, 6, 4), seed=0)
cfg = optim.TrainConfig(optimizer=optim.OptimizerKind.ADAM, lr=0.001, epochs=100, batch_size=64)
params, history = optim.train(params, train, cfg)
print(f"trained {len(history)} epochs, final train error {history[-1].train_error:.3f}\n")

bt = mlp.forward_batch(params, train.features)
for cls in range(4):
    i = int(np.flatnonzero(train.labels == cls)[0])
    g1, f1 = bt.g1[i], bt.f1[i]
    q = numerics.softmax(f1)
    print(f"class {cls} (image {i})")
    print("  g1   " + " ".join(f"{v:8.2f}" for v in g1))
    print("  f1   " + " ".join(f"{v:8.2f}" for v in f1))
    print("  exp  " + " ".join(f"{np.exp(v):8.2e}" for v in f1))
    print("  Q    " + " ".join(f"{v:8.3f}" for v in q))
    print(f"  winning filter: {int(np.argmax(q))}, sum(Q) = {q.sum():.12f}\n")
