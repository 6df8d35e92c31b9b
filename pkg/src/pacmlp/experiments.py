"""Experiment harness: training sweeps, CSV histories, trend summaries.

Every run writes one CSV per trained model with a fixed column schema
(epoch, train_loss, train_error, test_error, bound_proxy, mean_log_z,
mean_d_gap) and a metadata comment block sufficient to reproduce the run
byte-for-byte. Sweep-level conclusions (orderings between architectures,
optimizers, sample sizes, label modes) are written as machine-readable
PASS/FAIL rows in a summary CSV, never only as prose.

Trend assertions are evaluated per seed over spec.seeds and the sweep
verdict is the majority, because individual SGD runs are noisy while the
claims under test are qualitative orderings.
"""
from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

import numpy as np

from . import bound as bound_mod
from . import data as data_mod
from . import numerics, optim, plotting, prng
from .mlp import MlpConfig, MlpParams, forward_batch, init_params, save_params


class ExperimentKind(Enum):
    ARCH_SWEEP = "arch"
    OPTIMIZER_SWEEP = "opt"
    SAMPLE_SIZE_SWEEP = "size"
    RANDOM_LABELS = "random"
    SYNTH_PROBE = "synthprobe"
    D_GAP_TRACE = "dgap"
    ENERGY_PARTITION_TRACE = "energytrace"


DEFAULT_ARCHS = ((784, 64, 32, 10), (784, 256, 128, 10), (784, 1024, 512, 10))
DEFAULT_SIZE_LADDER = (250, 400, 650, 1000, 1600, 2500, 4000, 6300, 10000, 16000, 25000, 40000, 60000)
CSV_COLUMNS = ("epoch", "train_loss", "train_error", "test_error", "bound_proxy", "mean_log_z", "mean_d_gap")

#: Epoch defaults per experiment kind (overridable via config/CLI).
DEFAULT_EPOCHS = {
    ExperimentKind.ARCH_SWEEP: 100,
    ExperimentKind.OPTIMIZER_SWEEP: 200,
    ExperimentKind.SAMPLE_SIZE_SWEEP: 100,
    ExperimentKind.RANDOM_LABELS: 100,
    ExperimentKind.SYNTH_PROBE: 100,
    ExperimentKind.D_GAP_TRACE: 100,
    ExperimentKind.ENERGY_PARTITION_TRACE: 100,
}


@dataclass(frozen=True)
class ExperimentSpec:
    kind: ExperimentKind
    out_dir: Path
    dataset: str = "synth"  # mnist | fashion | synth | idx:<img>,<lbl>[,<img>,<lbl>]
    arch_list: tuple[tuple[int, int, int, int], ...] = ((784, 256, 128, 10),)
    train: optim.TrainConfig = optim.TrainConfig()
    bound: bound_mod.BoundParams = bound_mod.BoundParams()
    seeds: tuple[int, ...] = (0, 1, 2)
    sizes: tuple[int, ...] = DEFAULT_SIZE_LADDER
    subset_n: int | None = None
    epsilon: float = 1e-3
    data_dir: str = "data"
    synth_n: int = 256
    synth_side: int = 32

    def __post_init__(self):
        if not self.arch_list:
            raise ValueError("arch_list must not be empty")
        if len(set(self.sizes)) != len(self.sizes):
            raise ValueError(f"duplicate entries in size ladder {self.sizes}")
        if not self.seeds:
            raise ValueError("seeds must not be empty")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    train_error: float
    test_error: float
    bound_proxy: float
    mean_log_z: float
    mean_d_gap: float

    def __post_init__(self):
        for name in ("train_error", "test_error"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be a fraction in [0, 1], got {v}")


# ---------------------------------------------------------------------------
# dataset resolution


def load_dataset_selector(
    name: str,
    seed: int,
    data_dir: str = "data",
    subset_n: int | None = None,
    synth_n: int = 256,
    synth_side: int = 32,
) -> tuple[data_mod.LabeledDataset, data_mod.LabeledDataset]:
    """Training and test sets for a dataset selector string.

    Selectors: mnist | fashion | synth | idx:<img>,<lbl>[,<img>,<lbl>].
    Subsets are balanced when the requested size divides evenly across
    classes with enough members; synth test sets use a fresh subkey.
    """
    if name == "synth":
        train = data_mod.synthetic_diagonal(synth_n, synth_side, prng.derive(seed, 11))
        test = data_mod.synthetic_diagonal(synth_n, synth_side, prng.derive(seed, 12))
    elif name in ("mnist", "fashion"):
        source = data_mod.DatasetSource.MNIST if name == "mnist" else data_mod.DatasetSource.FASHION_MNIST
        train, test = data_mod.load_idx_dir(Path(data_dir) / name, source)
    elif name.startswith("idx:"):
        paths = name[4:].split(",")
        if len(paths) not in (2, 4):
            raise ValueError(f"idx dataset needs 2 or 4 comma-separated paths, got {len(paths)}")
        train = data_mod.load_idx(paths[0], paths[1])
        test = data_mod.load_idx(paths[2], paths[3]) if len(paths) == 4 else train
    else:
        raise ValueError(f"unknown dataset selector {name!r}")
    if subset_n is not None:
        train = _subset(train, subset_n, seed)  # n == train.n yields a permutation
    return train, test


def resolve_datasets(spec: ExperimentSpec, seed: int) -> tuple[data_mod.LabeledDataset, data_mod.LabeledDataset]:
    return load_dataset_selector(
        spec.dataset, seed,
        data_dir=spec.data_dir, subset_n=spec.subset_n,
        synth_n=spec.synth_n, synth_side=spec.synth_side,
    )


def _subset(ds: data_mod.LabeledDataset, n: int, seed: int) -> data_mod.LabeledDataset:
    balanced = n % ds.num_classes == 0 and all(
        np.sum(ds.labels == c) >= n // ds.num_classes for c in range(ds.num_classes)
    )
    return data_mod.subsample(ds, n, balanced, prng.derive(seed, 101))


# ---------------------------------------------------------------------------
# CSV plumbing


def _fmt_value(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def _metadata_block(meta: dict) -> list[str]:
    body = [f"{k}={meta[k]}" for k in sorted(meta)]
    digest = hashlib.sha256(("\n".join(body)).encode("utf-8")).hexdigest()
    return [f"# spec_hash={digest}"] + [f"# {line}" for line in body]


def _write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_text(text, encoding="utf-8")
        os.replace(tmp, path)
    except OSError as exc:
        raise OSError(f"failed writing {path}: {exc}") from exc


def write_history_csv(path: Path, meta: dict, records: list[EpochRecord]) -> None:
    lines = _metadata_block(meta)
    lines.append(",".join(CSV_COLUMNS))
    for r in records:
        lines.append(",".join(_fmt_value(getattr(r, c)) for c in CSV_COLUMNS))
    _write_atomic(path, "\n".join(lines) + "\n")


def write_summary_csv(path: Path, meta: dict, rows: list[tuple]) -> None:
    lines = _metadata_block(meta)
    lines.append("assertion,detail,value_a,value_b,result")
    for row in rows:
        lines.append(",".join(_fmt_value(v) for v in row))
    _write_atomic(path, "\n".join(lines) + "\n")


def read_csv(path) -> dict[str, list[float]]:
    """Columns of a harness CSV (metadata comments skipped)."""
    rows = []
    header = None
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line or line.startswith("#"):
            continue
        if header is None:
            header = line.split(",")
        else:
            rows.append(line.split(","))
    if header is None:
        raise ValueError(f"{path} has no header row")
    return {name: [float(r[i]) for r in rows] for i, name in enumerate(header)}


# ---------------------------------------------------------------------------
# single training run with full instrumentation


def run_training(
    params: MlpParams,
    train_ds: data_mod.LabeledDataset,
    test_ds: data_mod.LabeledDataset,
    cfg: optim.TrainConfig,
    epsilon: float = 1e-3,
    stop_at_zero_error: bool = False,
) -> tuple[MlpParams, list[EpochRecord]]:
    records: list[EpochRecord] = []

    def observe(epoch: int, p: MlpParams, stats: optim.EpochStats, trace) -> None:
        _, test_err, _, _ = optim.evaluate(p, test_ds)
        d_vals = bound_mod.d_gap_rows(trace.qy, train_ds.labels, train_ds.num_classes, epsilon)
        records.append(
            EpochRecord(
                epoch=epoch,
                train_loss=stats.train_loss,
                train_error=stats.train_error,
                test_error=test_err,
                bound_proxy=stats.bound_proxy,
                mean_log_z=stats.mean_log_z,
                mean_d_gap=float(np.mean(d_vals)),
            )
        )

    params, _ = optim.train(params, train_ds, cfg, callback=observe, stop_at_zero_error=stop_at_zero_error)
    return params, records


def _base_meta(spec: ExperimentSpec, seed: int, arch, train_ds, cfg: optim.TrainConfig) -> dict:
    return {
        "kind": spec.kind.value,
        "dataset": spec.dataset,
        "arch": "-".join(str(d) for d in arch),
        "optimizer": cfg.optimizer.value,
        "lr": repr(cfg.lr),
        "momentum_coef": repr(cfg.momentum_coef),
        "adam_beta1": repr(cfg.adam_beta1),
        "adam_beta2": repr(cfg.adam_beta2),
        "adam_eps": repr(cfg.adam_eps),
        "epochs": cfg.epochs,
        "batch_size": cfg.batch_size,
        "seed": seed,
        "train_n": train_ds.n,
        "subset_n": spec.subset_n,
        "subset_balanced": train_ds.meta.subset_balanced,
        "label_mode": train_ds.meta.label_mode.value,
        "epsilon": repr(spec.epsilon),
        "synth_n": spec.synth_n,
        "synth_side": spec.synth_side,
    }


def _run_one(
    spec: ExperimentSpec,
    arch: tuple[int, int, int, int],
    seed: int,
    csv_name: str,
    label_seed: int | None = None,
    stop_at_zero_error: bool = False,
    cfg: optim.TrainConfig | None = None,
) -> tuple[Path, list[EpochRecord], MlpParams]:
    cfg = replace(cfg if cfg is not None else spec.train, shuffle_seed=seed)
    train_ds, test_ds = resolve_datasets(spec, seed)
    if label_seed is not None:
        train_ds = data_mod.randomize_labels(train_ds, label_seed)
    m, t, k, l = arch
    if train_ds.dim != m:
        raise ValueError(f"arch input width {m} does not match dataset dimension {train_ds.dim}")
    if train_ds.num_classes > l:
        raise ValueError(f"arch has {l} outputs but dataset has {train_ds.num_classes} classes")
    params = init_params(MlpConfig(m=m, t=t, k=k, l=l), seed)
    params, records = run_training(
        params, train_ds, test_ds, cfg, epsilon=spec.epsilon, stop_at_zero_error=stop_at_zero_error
    )
    path = Path(spec.out_dir) / csv_name
    write_history_csv(path, _base_meta(spec, seed, arch, train_ds, cfg), records)
    return path, records, params


def _majority(rows: list[bool]) -> str:
    return "PASS" if sum(rows) * 2 > len(rows) else "FAIL"


# ---------------------------------------------------------------------------
# experiment kinds


def run_arch_sweep(spec: ExperimentSpec) -> list[Path]:
    """Train each architecture with identical config and seed; compare final
    bound_proxy and test_error orderings from narrowest to widest."""
    paths = []
    finals: dict[tuple, dict] = {}
    for seed in spec.seeds:
        for arch in spec.arch_list:
            name = f"arch_{'-'.join(map(str, arch))}_seed{seed}.csv"
            path, records, _ = _run_one(spec, arch, seed, name)
            paths.append(path)
            finals[(arch, seed)] = {"proxy": records[-1].bound_proxy, "test_error": records[-1].test_error}

    rows = []
    proxy_ok, err_ok = [], []
    for seed in spec.seeds:
        for narrow, wide in zip(spec.arch_list, spec.arch_list[1:]):
            p_ok = finals[(wide, seed)]["proxy"] <= finals[(narrow, seed)]["proxy"]
            e_ok = finals[(wide, seed)]["test_error"] <= finals[(narrow, seed)]["test_error"]
            proxy_ok.append(p_ok)
            err_ok.append(e_ok)
            tag = f"{'-'.join(map(str, wide))}<= {'-'.join(map(str, narrow))} seed{seed}"
            rows.append(
                ("final_bound_proxy_wider_le", tag, finals[(wide, seed)]["proxy"],
                 finals[(narrow, seed)]["proxy"], "PASS" if p_ok else "FAIL")
            )
            rows.append(
                ("final_test_error_wider_le", tag, finals[(wide, seed)]["test_error"],
                 finals[(narrow, seed)]["test_error"], "PASS" if e_ok else "FAIL")
            )
    rows.append(("arch_trend_bound_proxy_majority", "all seeds", sum(proxy_ok), len(proxy_ok), _majority(proxy_ok)))
    rows.append(("arch_trend_test_error_majority", "all seeds", sum(err_ok), len(err_ok), _majority(err_ok)))
    summary = Path(spec.out_dir) / "summary.csv"
    write_summary_csv(summary, _sweep_meta(spec), rows)
    return paths + [summary]


def run_optimizer_sweep(spec: ExperimentSpec) -> list[Path]:
    """Same architecture and seed across sgd/momentum/adam.

    Each optimizer runs at its published default learning rate (comparing
    three rules at one shared rate would handicap whichever rule's scale it
    doesn't fit); epochs and batch size come from the spec.
    """
    arch = spec.arch_list[0]
    paths = []
    finals: dict[tuple, dict] = {}
    kinds = (optim.OptimizerKind.SGD, optim.OptimizerKind.MOMENTUM, optim.OptimizerKind.ADAM)
    for seed in spec.seeds:
        for kind in kinds:
            cfg = optim.default_train_config(
                kind,
                epochs=spec.train.epochs,
                batch_size=spec.train.batch_size,
            )
            name = f"opt_{kind.value}_seed{seed}.csv"
            path, records, _ = _run_one(spec, arch, seed, name, cfg=cfg)
            paths.append(path)
            finals[(kind, seed)] = {
                "proxy": records[-1].bound_proxy,
                "test_error": records[-1].test_error,
                "train_loss": records[-1].train_loss,
            }
    rows = []
    agree = []
    for seed in spec.seeds:
        by_err = sorted(kinds, key=lambda k: finals[(k, seed)]["test_error"])
        by_proxy = sorted(kinds, key=lambda k: finals[(k, seed)]["proxy"])
        same = by_err[0] == by_proxy[0]
        agree.append(same)
        rows.append(
            ("optimizer_ranking", f"seed{seed}",
             "err:" + ">".join(k.value for k in by_err),
             "proxy:" + ">".join(k.value for k in by_proxy),
             "PASS" if same else "FAIL")
        )
    rows.append(("optimizer_best_agrees_majority", "all seeds", sum(agree), len(agree), _majority(agree)))
    summary = Path(spec.out_dir) / "summary.csv"
    write_summary_csv(summary, _sweep_meta(spec), rows)
    return paths + [summary]


def run_sample_size_sweep(spec: ExperimentSpec) -> list[Path]:
    """Train one architecture per ladder size until zero train error or the
    epoch cap; record final test error and bound proxy per size."""
    arch = spec.arch_list[0]
    paths = []
    decreasing = []
    summary_rows = []
    for seed in spec.seeds:
        rows = []
        for n in spec.sizes:
            sub_spec = replace(spec, subset_n=n)
            name = f"size_{n}_seed{seed}.csv"
            path, records, _ = _run_one(sub_spec, arch, seed, name, stop_at_zero_error=True)
            paths.append(path)
            rows.append((n, records[-1].test_error, records[-1].bound_proxy))
        lines = _metadata_block(_sweep_meta(spec) | {"seed": seed})
        lines.append("n,final_test_error,final_bound_proxy")
        for n, te, bp in rows:
            lines.append(f"{n},{_fmt_value(te)},{_fmt_value(bp)}")
        per_seed = Path(spec.out_dir) / f"sizes_seed{seed}.csv"
        _write_atomic(per_seed, "\n".join(lines) + "\n")
        paths.append(per_seed)
        dec = rows[-1][2] < rows[0][2]
        decreasing.append(dec)
        summary_rows.append(
            ("bound_proxy_decreases_with_n", f"n={rows[0][0]} vs n={rows[-1][0]} seed{seed}",
             rows[0][2], rows[-1][2], "PASS" if dec else "FAIL")
        )
    summary_rows.append(
        ("size_trend_majority", "all seeds", sum(decreasing), len(decreasing), _majority(decreasing))
    )
    summary = Path(spec.out_dir) / "summary.csv"
    write_summary_csv(summary, _sweep_meta(spec), summary_rows)
    return paths + [summary]


def run_random_labels(spec: ExperimentSpec) -> list[Path]:
    """Two runs per seed differing only in label mode; the corrupted run
    must end with strictly larger bound proxy and test error."""
    arch = spec.arch_list[0]
    paths = []
    rows = []
    proxy_ok, err_ok = [], []
    for seed in spec.seeds:
        real_path, real_recs, _ = _run_one(spec, arch, seed, f"labels_real_seed{seed}.csv")
        rand_path, rand_recs, _ = _run_one(
            spec, arch, seed, f"labels_random_seed{seed}.csv", label_seed=prng.derive(seed, 21)
        )
        paths += [real_path, rand_path]
        p_ok = rand_recs[-1].bound_proxy > real_recs[-1].bound_proxy
        e_ok = rand_recs[-1].test_error > real_recs[-1].test_error
        proxy_ok.append(p_ok)
        err_ok.append(e_ok)
        rows.append(
            ("random_bound_proxy_gt_real", f"seed{seed}", rand_recs[-1].bound_proxy,
             real_recs[-1].bound_proxy, "PASS" if p_ok else "FAIL")
        )
        rows.append(
            ("random_test_error_gt_real", f"seed{seed}", rand_recs[-1].test_error,
             real_recs[-1].test_error, "PASS" if e_ok else "FAIL")
        )
    rows.append(("random_labels_proxy_majority", "all seeds", sum(proxy_ok), len(proxy_ok), _majority(proxy_ok)))
    rows.append(("random_labels_error_majority", "all seeds", sum(err_ok), len(err_ok), _majority(err_ok)))
    summary = Path(spec.out_dir) / "summary.csv"
    write_summary_csv(summary, _sweep_meta(spec), rows)
    return paths + [summary]


def run_synth_probe(spec: ExperimentSpec) -> list[Path]:
    """Train on the synthetic diagonal set to 100% train accuracy, then for
    one representative image per class report the hidden-layer-1 rows
    (linear output, activation, its exponential, and the resulting filter
    probabilities), plus the learned first-layer filters as PGM grids."""
    arch = spec.arch_list[0]
    seed = spec.seeds[0]
    cfg = replace(spec.train, shuffle_seed=seed)
    train_ds, _ = resolve_datasets(spec, seed)
    m, t, k, l = arch
    if train_ds.dim != m:
        raise ValueError(f"arch input width {m} does not match dataset dimension {train_ds.dim}")
    if m != spec.synth_side**2:
        raise ValueError(f"probe filters are {spec.synth_side}x{spec.synth_side} grids; input width {m} does not match")
    params = init_params(MlpConfig(m=m, t=t, k=k, l=l), seed)
    # Full epoch budget: filters keep sharpening long after error first hits zero.
    params, history = optim.train(params, train_ds, cfg)
    if history[-1].train_error != 0.0:
        raise RuntimeError(
            f"probe training did not reach 100% train accuracy within {cfg.epochs} epochs "
            f"(final error {history[-1].train_error:.4f})"
        )
    first_zero = next((h.epoch for h in history if h.train_error == 0.0), None)

    bt = forward_batch(params, train_ds.features)
    rows = []
    argmaxes = []
    sums_ok = True
    for cls in range(train_ds.num_classes):
        i = int(np.flatnonzero(train_ds.labels == cls)[0])
        g1, f1 = bt.g1[i], bt.f1[i]
        q = numerics.softmax(f1)
        sums_ok = sums_ok and abs(float(q.sum()) - 1.0) <= 1e-9
        argmaxes.append(int(np.argmax(q)))
        for j in range(t):
            rows.append((cls, j, g1[j], f1[j], math.exp(f1[j]), q[j]))

    out_dir = Path(spec.out_dir)
    lines = _metadata_block(_base_meta(spec, seed, arch, train_ds, cfg))
    lines.append("class,filter,g1,f1,exp_f1,q")
    for r in rows:
        lines.append(",".join(_fmt_value(v) for v in r))
    probe_path = out_dir / "probe.csv"
    _write_atomic(probe_path, "\n".join(lines) + "\n")

    paths = [probe_path]
    side = spec.synth_side
    out_dir.mkdir(parents=True, exist_ok=True)
    for j in range(t):
        pgm = out_dir / f"filter_{j}.pgm"
        plotting.write_pgm(pgm, params.w1[:, j].reshape(side, side))
        paths.append(pgm)

    distinct = len(set(argmaxes)) == len(argmaxes)
    summary = out_dir / "summary.csv"
    write_summary_csv(
        summary,
        _sweep_meta(spec),
        [
            ("probe_q_rows_normalized", "all classes", int(sums_ok), 1, "PASS" if sums_ok else "FAIL"),
            ("probe_argmax_filters_distinct", "-".join(map(str, argmaxes)), len(set(argmaxes)),
             len(argmaxes), "PASS" if distinct else "FAIL"),
            ("probe_train_accuracy_100", f"first_zero_error_epoch={first_zero}", 1.0 - history[-1].train_error,
             1.0, "PASS" if history[-1].train_error == 0.0 else "FAIL"),
        ],
    )
    ckpt = out_dir / "probe.ckpt"
    save_params(params, ckpt)
    return paths + [summary, ckpt]


def run_d_gap_trace(spec: ExperimentSpec) -> list[Path]:
    arch = spec.arch_list[0]
    seed = spec.seeds[0]
    path, records, _ = _run_one(spec, arch, seed, "dgap_trace.csv")
    final, first = records[-1], records[0]
    shrank = abs(final.mean_d_gap) < abs(first.mean_d_gap)
    near_zero = abs(final.mean_d_gap) < 0.1 if final.train_loss < 0.01 else True
    summary = Path(spec.out_dir) / "summary.csv"
    write_summary_csv(
        summary,
        _sweep_meta(spec),
        [
            ("dgap_final_lt_first", f"seed{seed}", abs(final.mean_d_gap), abs(first.mean_d_gap),
             "PASS" if shrank else "FAIL"),
            ("dgap_final_small_when_converged", f"loss={final.train_loss!r}", abs(final.mean_d_gap), 0.1,
             "PASS" if near_zero else "FAIL"),
        ],
    )
    return [path, summary]


def run_energy_partition_trace(spec: ExperimentSpec) -> list[Path]:
    arch = spec.arch_list[0]
    seed = spec.seeds[0]
    path, records, _ = _run_one(spec, arch, seed, "energy_trace.csv")
    identity_ok = all(
        abs(r.bound_proxy + r.mean_log_z - r.train_loss) < 1e-10 for r in records
    )
    sum_decreased = (records[-1].bound_proxy + records[-1].mean_log_z) < (
        records[0].bound_proxy + records[0].mean_log_z
    )
    log_z_increased = records[-1].mean_log_z > records[0].mean_log_z
    worst = max(abs(r.bound_proxy + r.mean_log_z - r.train_loss) for r in records)
    summary = Path(spec.out_dir) / "summary.csv"
    write_summary_csv(
        summary,
        _sweep_meta(spec),
        [
            ("energy_plus_log_z_equals_loss", "every epoch", worst, 1e-10,
             "PASS" if identity_ok else "FAIL"),
            ("energy_plus_log_z_decreases", f"seed{seed}",
             records[-1].bound_proxy + records[-1].mean_log_z,
             records[0].bound_proxy + records[0].mean_log_z,
             "PASS" if sum_decreased else "FAIL"),
            ("mean_log_z_increases", f"seed{seed}", records[-1].mean_log_z, records[0].mean_log_z,
             "PASS" if log_z_increased else "FAIL"),
        ],
    )
    return [path, summary]


def _sweep_meta(spec: ExperimentSpec) -> dict:
    return {
        "kind": spec.kind.value,
        "dataset": spec.dataset,
        "arch_list": ";".join("-".join(map(str, a)) for a in spec.arch_list),
        "optimizer": spec.train.optimizer.value,
        "lr": repr(spec.train.lr),
        "epochs": spec.train.epochs,
        "batch_size": spec.train.batch_size,
        "seeds": ",".join(map(str, spec.seeds)),
        "sizes": ",".join(map(str, spec.sizes)),
        "subset_n": spec.subset_n,
        "epsilon": repr(spec.epsilon),
        "synth_n": spec.synth_n,
        "synth_side": spec.synth_side,
    }


_RUNNERS = {
    ExperimentKind.ARCH_SWEEP: run_arch_sweep,
    ExperimentKind.OPTIMIZER_SWEEP: run_optimizer_sweep,
    ExperimentKind.SAMPLE_SIZE_SWEEP: run_sample_size_sweep,
    ExperimentKind.RANDOM_LABELS: run_random_labels,
    ExperimentKind.SYNTH_PROBE: run_synth_probe,
    ExperimentKind.D_GAP_TRACE: run_d_gap_trace,
    ExperimentKind.ENERGY_PARTITION_TRACE: run_energy_partition_trace,
}


def run(spec: ExperimentSpec) -> list[Path]:
    return _RUNNERS[spec.kind](spec)


# ---------------------------------------------------------------------------
# plots and config files


def emit_plot(csv_path, columns: list[str], out_path) -> Path:
    """Line chart of selected CSV columns against the first column."""
    if not columns:
        raise ValueError("no columns selected")
    table = read_csv(csv_path)
    names = list(table)
    x_name = names[0]
    for c in columns:
        if c not in table:
            raise ValueError(f"column {c!r} not in {csv_path} (has {', '.join(names)})")
    svg = plotting.svg_line_chart(table[x_name], {c: table[c] for c in columns}, x_name)
    out_path = Path(out_path)
    _write_atomic(out_path, svg)
    return out_path


def parse_config_file(path) -> dict[str, str]:
    """Flat key=value config; blank lines and # comments are ignored."""
    out: dict[str, str] = {}
    for ln, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{ln}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if key in out:
            raise ValueError(f"{path}:{ln}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


_CONFIG_KEYS = {
    "dataset", "data_dir", "arch_list", "optimizer", "lr", "momentum_coef",
    "adam_beta1", "adam_beta2", "adam_eps", "epochs", "batch_size", "seeds",
    "subset_n", "sizes", "delta", "b", "log_pyx", "epsilon", "synth_n", "synth_side",
}


def parse_arch(text: str) -> tuple[int, int, int, int]:
    parts = text.split("-")
    if len(parts) != 4:
        raise ValueError(f"architecture must be M-T-K-L, got {text!r}")
    return tuple(int(p) for p in parts)  # type: ignore[return-value]


def spec_from_config(kind: ExperimentKind, cfg: dict[str, str], out_dir) -> ExperimentSpec:
    unknown = set(cfg) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")

    opt_kind = optim.OptimizerKind(cfg.get("optimizer", "sgd"))
    train_kwargs = {"epochs": int(cfg.get("epochs", DEFAULT_EPOCHS[kind]))}
    if "lr" in cfg:
        train_kwargs["lr"] = float(cfg["lr"])
    for key in ("momentum_coef", "adam_beta1", "adam_beta2", "adam_eps"):
        if key in cfg:
            train_kwargs[key] = float(cfg[key])
    if "batch_size" in cfg:
        train_kwargs["batch_size"] = int(cfg["batch_size"])
    train = optim.default_train_config(opt_kind, **train_kwargs)

    bound_kwargs = {}
    if "delta" in cfg:
        bound_kwargs["delta"] = float(cfg["delta"])
    if "b" in cfg:
        bound_kwargs["b"] = float(cfg["b"])
    if "log_pyx" in cfg:
        bound_kwargs["log_pyx"] = float(cfg["log_pyx"])

    kwargs = {}
    if "arch_list" in cfg:
        kwargs["arch_list"] = tuple(parse_arch(a) for a in cfg["arch_list"].split(";"))
    elif kind is ExperimentKind.ARCH_SWEEP:
        kwargs["arch_list"] = DEFAULT_ARCHS
    elif kind is ExperimentKind.SYNTH_PROBE:
        kwargs["arch_list"] = ((1024, 8, 6, 4),)
    if "seeds" in cfg:
        kwargs["seeds"] = tuple(int(s) for s in cfg["seeds"].split(","))
    if "sizes" in cfg:
        kwargs["sizes"] = tuple(int(s) for s in cfg["sizes"].split(","))
    if "subset_n" in cfg:
        kwargs["subset_n"] = int(cfg["subset_n"])
    for key in ("dataset", "data_dir"):
        if key in cfg:
            kwargs[key] = cfg[key]
    if "epsilon" in cfg:
        kwargs["epsilon"] = float(cfg["epsilon"])
    for key in ("synth_n", "synth_side"):
        if key in cfg:
            kwargs[key] = int(cfg[key])

    return ExperimentSpec(
        kind=kind,
        out_dir=Path(out_dir),
        train=train,
        bound=bound_mod.BoundParams(**bound_kwargs),
        **kwargs,
    )
