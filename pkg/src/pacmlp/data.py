"""Dataset construction and IDX-format I/O.

Sources: the big-endian IDX container used by the MNIST family (gzip
transparently supported, since that is how the files are distributed), a
synthetic diagonal-gradient image set with four classes, uniform label
corruption, and deterministic (optionally class-balanced) subsampling.
"""
from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

import numpy as np

from . import prng

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801


class IdxFormatError(ValueError):
    """Base class for IDX parse failures."""


class IdxBadMagic(IdxFormatError):
    pass


class IdxTruncated(IdxFormatError):
    pass


class IdxCountMismatch(IdxFormatError):
    pass


class DatasetSource(Enum):
    MNIST = "mnist"
    FASHION_MNIST = "fashion"
    SYNTHETIC = "synthetic"
    FILE = "file"


class LabelMode(Enum):
    REAL = "real"
    RANDOM = "random"


# Sources whose features are rescaled uint8 pixels, hence constrained to [0,1].
_UNIT_RANGE_SOURCES = (DatasetSource.MNIST, DatasetSource.FASHION_MNIST, DatasetSource.FILE)


@dataclass(frozen=True)
class DatasetMeta:
    source: DatasetSource
    label_mode: LabelMode = LabelMode.REAL
    subset_seed: int | None = None
    subset_balanced: bool | None = None


@dataclass(frozen=True)
class LabeledDataset:
    """Sample matrix (rows are samples), integer labels, provenance."""

    features: np.ndarray
    labels: np.ndarray
    num_classes: int
    meta: DatasetMeta

    def __post_init__(self):
        feats = np.ascontiguousarray(self.features, dtype=np.float64)
        labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels)
        if feats.ndim != 2:
            raise ValueError(f"features must be 2-D, got ndim={feats.ndim}")
        if labels.shape != (feats.shape[0],):
            raise ValueError(f"{labels.shape[0]} labels for {feats.shape[0]} samples")
        if not np.all(np.isfinite(feats)):
            raise ValueError("features must be finite")
        if labels.size and (labels.min() < 0 or labels.max() >= self.num_classes):
            raise ValueError(f"labels must lie in [0, {self.num_classes})")
        if self.meta.source in _UNIT_RANGE_SOURCES and feats.size:
            if feats.min() < 0.0 or feats.max() > 1.0:
                raise ValueError("image features must lie in [0, 1]")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


def _read_maybe_gzip(path) -> bytes:
    raw = Path(path).read_bytes()
    if raw[:2] == b"\x1f\x8b":
        return gzip.decompress(raw)
    return raw


def load_idx(images_path, labels_path, source: DatasetSource = DatasetSource.FILE) -> LabeledDataset:
    """Parse an IDX image/label file pair into a dataset with [0,1] features."""
    img_blob = _read_maybe_gzip(images_path)
    lbl_blob = _read_maybe_gzip(labels_path)

    if len(img_blob) < 16:
        raise IdxTruncated(f"image file {images_path} too short for its header")
    magic, n, rows, cols = struct.unpack(">4i", img_blob[:16])
    if magic != IDX_IMAGE_MAGIC:
        raise IdxBadMagic(f"image file {images_path}: magic {magic:#010x}, expected {IDX_IMAGE_MAGIC:#010x}")
    if len(img_blob) != 16 + n * rows * cols:
        raise IdxTruncated(
            f"image file {images_path}: {len(img_blob)} bytes, expected {16 + n * rows * cols}"
        )

    if len(lbl_blob) < 8:
        raise IdxTruncated(f"label file {labels_path} too short for its header")
    lmagic, ln = struct.unpack(">2i", lbl_blob[:8])
    if lmagic != IDX_LABEL_MAGIC:
        raise IdxBadMagic(f"label file {labels_path}: magic {lmagic:#010x}, expected {IDX_LABEL_MAGIC:#010x}")
    if len(lbl_blob) != 8 + ln:
        raise IdxTruncated(f"label file {labels_path}: {len(lbl_blob)} bytes, expected {8 + ln}")
    if ln != n:
        raise IdxCountMismatch(f"{n} images but {ln} labels ({images_path}, {labels_path})")

    pixels = np.frombuffer(img_blob, dtype=np.uint8, offset=16).reshape(n, rows * cols)
    labels = np.frombuffer(lbl_blob, dtype=np.uint8, offset=8).astype(np.int64)
    num_classes = int(labels.max()) + 1 if n else 1
    return LabeledDataset(
        features=pixels.astype(np.float64) / 255.0,
        labels=labels,
        num_classes=num_classes,
        meta=DatasetMeta(source=source),
    )


def save_idx(data: LabeledDataset, images_path, labels_path, rows: int, cols: int) -> None:
    """Write a dataset back to an IDX pair. Features must sit on the k/255 grid."""
    if rows * cols != data.dim:
        raise ValueError(f"rows*cols = {rows * cols} does not match feature dimension {data.dim}")
    scaled = data.features * 255.0
    pixels = np.rint(scaled)
    if not np.allclose(scaled, pixels, atol=1e-9) or scaled.min() < 0 or scaled.max() > 255:
        raise ValueError("features are not exact uint8 pixels; refusing lossy IDX export")
    with open(images_path, "wb") as fh:
        fh.write(struct.pack(">4i", IDX_IMAGE_MAGIC, data.n, rows, cols))
        fh.write(pixels.astype(np.uint8).tobytes())
    with open(labels_path, "wb") as fh:
        fh.write(struct.pack(">2i", IDX_LABEL_MAGIC, data.n))
        fh.write(data.labels.astype(np.uint8).tobytes())


def _traversal(side: int, secondary: bool) -> np.ndarray:
    """Cell order for the diagonal-major fill.

    Primary direction: anti-diagonals (constant i+j) from the top-left
    corner to the bottom-right one. Secondary direction: diagonals
    (constant i-j) from the top-right corner to the bottom-left one.
    Within a diagonal, rows ascend.
    """
    cells = [(i, j) for i in range(side) for j in range(side)]
    if secondary:
        cells.sort(key=lambda c: (c[0] - c[1], c[0]))
    else:
        cells.sort(key=lambda c: (c[0] + c[1], c[0]))
    return np.array([i * side + j for i, j in cells], dtype=np.int64)


def diagonal_image(sorted_values: np.ndarray, class_id: int, side: int) -> np.ndarray:
    """Place an ascending-sorted draw into a side x side grid for one class.

    Classes: 0 = primary/ascending, 1 = primary/descending,
    2 = secondary/ascending, 3 = secondary/descending. Descending classes
    reuse the same traversal with the value order reversed.
    """
    if class_id not in (0, 1, 2, 3):
        raise ValueError(f"class_id must be 0..3, got {class_id}")
    values = np.asarray(sorted_values, dtype=np.float64)
    if values.shape != (side * side,):
        raise ValueError(f"need {side * side} values for a {side}x{side} grid, got {values.shape}")
    order = _traversal(side, secondary=class_id >= 2)
    flat = np.empty(side * side)
    flat[order] = values if class_id % 2 == 0 else values[::-1]
    return flat.reshape(side, side)


def synthetic_diagonal(n: int, side: int, seed: int) -> LabeledDataset:
    """n gradient images of side x side, four interleaved classes.

    Each image is side*side standard-normal draws, sorted, then laid out so
    values increase (or decrease) along the primary or secondary diagonal
    direction. Image i uses the substream derive(seed, i) and class i % 4.
    """
    if n % 4 != 0:
        raise ValueError(f"sample count must be divisible by 4, got {n}")
    if side < 2:
        raise ValueError(f"side must be >= 2, got {side}")
    features = np.empty((n, side * side))
    labels = np.empty(n, dtype=np.int64)
    for i in range(n):
        draw = np.sort(prng.normal(prng.derive(seed, i), side * side))
        cls = i % 4
        features[i] = diagonal_image(draw, cls, side).reshape(-1)
        labels[i] = cls
    return LabeledDataset(
        features=features,
        labels=labels,
        num_classes=4,
        meta=DatasetMeta(source=DatasetSource.SYNTHETIC),
    )


def randomize_labels(data: LabeledDataset, seed: int) -> LabeledDataset:
    """Replace labels with uniform draws; features are untouched."""
    labels = prng.randint(seed, data.n, data.num_classes)
    return LabeledDataset(
        features=data.features,
        labels=labels,
        num_classes=data.num_classes,
        meta=replace(data.meta, label_mode=LabelMode.RANDOM),
    )


def subsample(data: LabeledDataset, n: int, balanced: bool, seed: int) -> LabeledDataset:
    """Deterministic subset of n samples; balanced mode takes n/num_classes per class."""
    if n > data.n:
        raise ValueError(f"cannot take {n} samples from a dataset of {data.n}")
    if balanced:
        if n % data.num_classes != 0:
            raise ValueError(f"balanced subset size {n} not divisible by {data.num_classes} classes")
        per_class = n // data.num_classes
        picks = []
        for c in range(data.num_classes):
            members = np.flatnonzero(data.labels == c)
            if members.size < per_class:
                raise ValueError(
                    f"class {c} has {members.size} members, need {per_class} for a balanced subset"
                )
            order = prng.permutation(prng.derive(seed, c), members.size)
            picks.append(members[order[:per_class]])
        idx = np.concatenate(picks)
    else:
        idx = prng.permutation(seed, data.n)[:n]
    return LabeledDataset(
        features=data.features[idx],
        labels=data.labels[idx],
        num_classes=data.num_classes,
        meta=replace(data.meta, subset_seed=seed, subset_balanced=balanced),
    )


MNIST_FILES = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "test_images": "t10k-images-idx3-ubyte",
    "test_labels": "t10k-labels-idx1-ubyte",
}


def _find_idx_file(directory: Path, stem: str) -> Path:
    for candidate in (directory / stem, directory / (stem + ".gz")):
        if candidate.exists():
            return candidate
    raise FileNotFoundError(f"missing {stem}[.gz] under {directory}")


def load_idx_dir(directory, source: DatasetSource) -> tuple[LabeledDataset, LabeledDataset]:
    """Load the standard train/test IDX pairs from one directory."""
    directory = Path(directory)
    train = load_idx(
        _find_idx_file(directory, MNIST_FILES["train_images"]),
        _find_idx_file(directory, MNIST_FILES["train_labels"]),
        source=source,
    )
    test = load_idx(
        _find_idx_file(directory, MNIST_FILES["test_images"]),
        _find_idx_file(directory, MNIST_FILES["test_labels"]),
        source=source,
    )
    return train, test
