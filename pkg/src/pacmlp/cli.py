"""Command-line harness.

Subcommands: `train` (one model, history CSV + checkpoint), `sweep` (the
experiment families, config-file driven), `bound` (bound report for a
checkpoint on a dataset), `plot` (SVG line chart from a history CSV).
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bound as bound_mod
from . import experiments, optim
from .experiments import ExperimentKind
from .mlp import MlpConfig, init_params, load_params, save_params


def _add_dataset_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dataset", required=True, help="mnist | fashion | synth | idx:<img>,<lbl>[,<img>,<lbl>]")
    p.add_argument("--data-dir", default="data", help="directory holding mnist/ and fashion/ IDX files")
    p.add_argument("--subset-n", type=int, default=None, help="train on a subset of this size")
    p.add_argument("--synth-n", type=int, default=256)
    p.add_argument("--synth-side", type=int, default=32)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pacmlp")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train one MLP and write its history CSV + checkpoint")
    _add_dataset_args(p_train)
    p_train.add_argument("--arch", required=True, help="M-T-K-L, e.g. 784-256-128-10")
    p_train.add_argument("--opt", default="sgd", choices=[k.value for k in optim.OptimizerKind])
    p_train.add_argument("--lr", type=float, default=None, help="default: 0.01 (sgd/momentum), 0.001 (adam)")
    p_train.add_argument("--epochs", type=int, default=100)
    p_train.add_argument("--batch", type=int, default=64)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--epsilon", type=float, default=1e-3)
    p_train.add_argument("--out", required=True)

    p_sweep = sub.add_parser("sweep", help="run one experiment family from a key=value config file")
    p_sweep.add_argument("--kind", required=True, choices=[k.value for k in ExperimentKind])
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--out", required=True)

    p_bound = sub.add_parser("bound", help="bound report for a checkpoint on a dataset")
    _add_dataset_args(p_bound)
    p_bound.add_argument("--ckpt", required=True)
    p_bound.add_argument("--delta", type=float, default=0.05)
    p_bound.add_argument("--b", type=float, default=10.0)
    p_bound.add_argument("--log-pyx", type=float, default=None, help="default: -log(num_classes)")
    p_bound.add_argument("--seed", type=int, default=0, help="seed for synth/subset resolution")

    p_plot = sub.add_parser("plot", help="SVG line chart of CSV columns")
    p_plot.add_argument("--csv", required=True)
    p_plot.add_argument("--cols", required=True, help="comma-separated column names")
    p_plot.add_argument("--out", required=True)

    return parser


def _load_datasets(args, seed):
    return experiments.load_dataset_selector(
        args.dataset, seed,
        data_dir=args.data_dir, subset_n=args.subset_n,
        synth_n=args.synth_n, synth_side=args.synth_side,
    )


def cmd_train(args) -> int:
    arch = experiments.parse_arch(args.arch)
    kwargs = {"epochs": args.epochs, "batch_size": args.batch, "shuffle_seed": args.seed}
    if args.lr is not None:
        kwargs["lr"] = args.lr
    cfg = optim.default_train_config(optim.OptimizerKind(args.opt), **kwargs)

    train_ds, test_ds = _load_datasets(args, args.seed)
    m, t, k, l = arch
    params = init_params(MlpConfig(m=m, t=t, k=k, l=l), args.seed)
    params, records = experiments.run_training(params, train_ds, test_ds, cfg, epsilon=args.epsilon)

    meta = {
        "kind": "train",
        "dataset": args.dataset,
        "arch": args.arch,
        "optimizer": cfg.optimizer.value,
        "lr": repr(cfg.lr),
        "epochs": cfg.epochs,
        "batch_size": cfg.batch_size,
        "seed": args.seed,
        "train_n": train_ds.n,
        "subset_n": args.subset_n,
        "subset_balanced": train_ds.meta.subset_balanced,
        "label_mode": train_ds.meta.label_mode.value,
        "epsilon": repr(args.epsilon),
    }
    out = Path(args.out)
    csv_path = out / "history.csv"
    experiments.write_history_csv(csv_path, meta, records)
    ckpt = out / "final.ckpt"
    save_params(params, ckpt)
    print(f"wrote {csv_path} and {ckpt}")
    if records:
        last = records[-1]
        print(
            f"epoch {last.epoch}: train_loss={last.train_loss:.6f} train_error={last.train_error:.4f} "
            f"test_error={last.test_error:.4f} bound_proxy={last.bound_proxy:.6f}"
        )
    return 0


def cmd_sweep(args) -> int:
    cfg = experiments.parse_config_file(args.config)
    spec = experiments.spec_from_config(ExperimentKind(args.kind), cfg, args.out)
    paths = experiments.run(spec)
    for p in paths:
        print(f"wrote {p}")
    return 0


def cmd_bound(args) -> int:
    params = load_params(args.ckpt)
    train_ds, _ = _load_datasets(args, args.seed)
    p = bound_mod.BoundParams(delta=args.delta, b=args.b, log_pyx=args.log_pyx)
    report = bound_mod.corollary2_bound(params, train_ds, p)
    for field in (
        "n", "empirical_risk", "mean_energy", "mean_log_z",
        "bound_general", "bound_corollary2", "bound_proxy", "mean_d_gap",
    ):
        print(f"{field}={getattr(report, field)!r}")
    return 0


def cmd_plot(args) -> int:
    cols = [c for c in args.cols.split(",") if c]
    out = experiments.emit_plot(args.csv, cols, args.out)
    print(f"wrote {out}")
    return 0


_COMMANDS = {"train": cmd_train, "sweep": cmd_sweep, "bound": cmd_bound, "plot": cmd_plot}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
