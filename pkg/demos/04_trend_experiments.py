"""Desk-scale trend experiments on the synthetic dataset.

Runs the experiment harness end to end with small synthetic inputs: an
architecture sweep, a random-label comparison, and the d-gap and
energy/partition traces, writing CSVs, a summary with PASS/FAIL assertion
rows, and an SVG chart into demos/out/. The MNIST versions of these runs
are driven by the CLI, e.g.

  pacmlp sweep --kind arch --config sweep.cfg --out out/arch
  pacmlp train --dataset mnist --arch 784-256-128-10 --opt adam \
      --epochs 30 --batch 64 --seed 0 --subset-n 10000 --out out/run

Run from the repository root:  python demos/04_trend_experiments.py
"""
from pathlib import Path

from pacmlp import optim
from pacmlp.experiments import ExperimentKind, ExperimentSpec, emit_plot, run

OUT = Path(__file__).parent / "out"


def spec(kind, sub, **kw):
    base = dict(
        kind=kind,
        out_dir=OUT / sub,
        dataset="synth",
        arch_list=((64, 16, 12, 4),),
        train=optim.TrainConfig(optimizer=optim.OptimizerKind.ADAM, lr=0.005, epochs=25, batch_size=32),
        seeds=(0, 1, 2),
        synth_n=128,
        synth_side=8,
    )
    base.update(kw)
    return ExperimentSpec(**base)


for path in run(spec(ExperimentKind.ARCH_SWEEP, "arch", arch_list=((64, 8, 6, 4), (64, 24, 16, 4)))):
    print(f"wrote {path}")
for path in run(spec(ExperimentKind.RANDOM_LABELS, "random")):
    print(f"wrote {path}")
for path in run(spec(ExperimentKind.D_GAP_TRACE, "dgap", seeds=(0,))):
    print(f"wrote {path}")
for path in run(spec(ExperimentKind.ENERGY_PARTITION_TRACE, "energy", seeds=(0,))):
    print(f"wrote {path}")

chart = emit_plot(OUT / "energy" / "energy_trace.csv",
                  ["train_loss", "bound_proxy", "mean_log_z"], OUT / "energy" / "trace.svg")
print(f"wrote {chart}")
print(f"\nsummaries with PASS/FAIL rows are under {OUT}/*/summary.csv")
