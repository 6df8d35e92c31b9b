"""Cross entropy = true-class energy + log partition, tracked over training.

The per-sample loss splits exactly (to the last bit) into the true-class
energy -gy[y] and the log partition logsumexp(gy). This demo trains a small
net and prints both averages per epoch: the energy mean falls, the
log-partition mean rises, and their sum (the loss) falls toward zero. The
partition term only normalizes; the energy mean is the quantity that tracks
generalization (see demo 03).

Run from the repository root:  python demos/02_energy_partition_split.py
"""
from pacmlp import data, mlp, optim

train = data.synthetic_diagonal(128, 8, seed=5)
params = mlp.init_params(mlp.MlpConfig(64, 16, 12, 4), seed=1)
cfg = optim.TrainConfig(optimizer=optim.OptimizerKind.ADAM, lr=0.005, epochs=40, batch_size=16)

print(f"{'epoch':>5} {'mean energy':>12} {'mean log Z':>12} {'sum':>10} {'loss':>10} {'|gap|':>9}")
params, history = optim.train(params, train, cfg)
for h in history:
    if h.epoch % 4 == 0 or h.epoch == 1:
        gap = abs(h.bound_proxy + h.mean_log_z - h.train_loss)
        print(
            f"{h.epoch:>5} {h.bound_proxy:>12.4f} {h.mean_log_z:>12.4f} "
            f"{h.bound_proxy + h.mean_log_z:>10.4f} {h.train_loss:>10.4f} {gap:>9.1e}"
        )
