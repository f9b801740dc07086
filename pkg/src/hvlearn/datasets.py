"""Loaders for the standard MNIST (IDX) and CIFAR-10 (binary batch)
distributions.

Both loaders produce flat float32 feature vectors scaled by 1/255 into
[0, 1], in file order, with int64 labels. No other preprocessing is
applied, so the canonical HDC pipeline and the dense-network pipeline
see identical inputs. Files may be present either raw or gzipped
(``<name>.gz``).
"""

from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MNIST_IMAGES_MAGIC = 0x00000803
MNIST_LABELS_MAGIC = 0x00000801
MNIST_SIDE = 28
MNIST_FILES = {
    "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    "test": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}
CIFAR_TRAIN_FILES = tuple(f"data_batch_{i}.bin" for i in range(1, 6))
CIFAR_TEST_FILES = ("test_batch.bin",)
CIFAR_RECORD_BYTES = 3073  # 1 label byte + 3 x 1024 plane bytes
CIFAR_PLANE = 1024

__all__ = [
    "SplitData",
    "DatasetError",
    "MissingDatasetFile",
    "BadMagicError",
    "TruncatedFileError",
    "CountMismatchError",
    "RecordSizeError",
    "LabelRangeError",
    "load_mnist",
    "load_cifar10",
    "holdout_tail",
    "take_head",
]


class DatasetError(Exception):
    """Base class for dataset-format failures; message names the file."""


class MissingDatasetFile(DatasetError, FileNotFoundError):
    pass


class BadMagicError(DatasetError):
    pass


class TruncatedFileError(DatasetError):
    pass


class CountMismatchError(DatasetError):
    pass


class RecordSizeError(DatasetError):
    pass


class LabelRangeError(DatasetError):
    pass


@dataclass
class SplitData:
    """One dataset split: features in [0, 1], labels, and plane layout."""

    X: np.ndarray  # (n, n_features) float32
    y: np.ndarray  # (n,) int64
    layout: str = "single"  # "single" | "rgb_planes"

    def __len__(self) -> int:
        return self.X.shape[0]


def _read_bytes(path: Path) -> bytes:
    if path.exists():
        return path.read_bytes()
    gz = path.with_name(path.name + ".gz")
    if gz.exists():
        with gzip.open(gz, "rb") as fh:
            return fh.read()
    raise MissingDatasetFile(f"{path}: file not found (nor {gz.name})")


def _parse_idx_images(buf: bytes, path: Path) -> np.ndarray:
    if len(buf) < 16:
        raise TruncatedFileError(f"{path}: IDX image header needs 16 bytes, file has {len(buf)}")
    magic, count, rows, cols = struct.unpack(">iiii", buf[:16])
    if magic != MNIST_IMAGES_MAGIC:
        raise BadMagicError(f"{path}: bad magic 0x{magic:08x}, expected 0x{MNIST_IMAGES_MAGIC:08x}")
    if rows != MNIST_SIDE or cols != MNIST_SIDE:
        raise CountMismatchError(f"{path}: image dims {rows}x{cols}, expected 28x28")
    expected = count * rows * cols
    payload = buf[16:]
    if len(payload) < expected:
        raise TruncatedFileError(f"{path}: payload {len(payload)} bytes, header promises {expected}")
    return np.frombuffer(payload, dtype=np.uint8, count=expected).reshape(count, rows * cols)


def _parse_idx_labels(buf: bytes, path: Path) -> np.ndarray:
    if len(buf) < 8:
        raise TruncatedFileError(f"{path}: IDX label header needs 8 bytes, file has {len(buf)}")
    magic, count = struct.unpack(">ii", buf[:8])
    if magic != MNIST_LABELS_MAGIC:
        raise BadMagicError(f"{path}: bad magic 0x{magic:08x}, expected 0x{MNIST_LABELS_MAGIC:08x}")
    payload = buf[8:]
    if len(payload) < count:
        raise TruncatedFileError(f"{path}: payload {len(payload)} bytes, header promises {count}")
    return np.frombuffer(payload, dtype=np.uint8, count=count)


def _load_mnist_split(data_dir: Path, split: str, expected: int | None) -> SplitData:
    image_name, label_name = MNIST_FILES[split]
    images = _parse_idx_images(_read_bytes(data_dir / image_name), data_dir / image_name)
    labels = _parse_idx_labels(_read_bytes(data_dir / label_name), data_dir / label_name)
    if images.shape[0] != labels.shape[0]:
        raise CountMismatchError(
            f"{data_dir / image_name}: {images.shape[0]} images but {labels.shape[0]} labels"
        )
    if expected is not None and images.shape[0] != expected:
        raise CountMismatchError(
            f"{data_dir / image_name}: {images.shape[0]} samples, expected {expected}"
        )
    X = images.astype(np.float32) / np.float32(255.0)
    return SplitData(X=X, y=labels.astype(np.int64), layout="single")


def load_mnist(
    data_dir: str | Path,
    expected_counts: tuple[int, int] | None = (60_000, 10_000),
) -> tuple[SplitData, SplitData]:
    """Load MNIST train and test splits from IDX files in ``data_dir``.

    ``expected_counts`` guards against partial copies of the standard
    distribution; pass None to accept files of any size (for subsets or
    synthetic fixtures in the same format).
    """
    data_dir = Path(data_dir)
    exp_train, exp_test = expected_counts if expected_counts is not None else (None, None)
    return (
        _load_mnist_split(data_dir, "train", exp_train),
        _load_mnist_split(data_dir, "test", exp_test),
    )


def _load_cifar_files(data_dir: Path, names: tuple[str, ...]) -> tuple[np.ndarray, np.ndarray]:
    all_X, all_y = [], []
    for name in names:
        path = data_dir / name
        buf = _read_bytes(path)
        if len(buf) % CIFAR_RECORD_BYTES != 0:
            raise RecordSizeError(
                f"{path}: {len(buf)} bytes is not a multiple of the {CIFAR_RECORD_BYTES}-byte record"
            )
        records = np.frombuffer(buf, dtype=np.uint8).reshape(-1, CIFAR_RECORD_BYTES)
        labels = records[:, 0]
        if labels.size and labels.max() > 9:
            raise LabelRangeError(f"{path}: label byte {int(labels.max())} exceeds 9")
        all_X.append(records[:, 1:])
        all_y.append(labels)
    X = np.concatenate(all_X, axis=0)
    y = np.concatenate(all_y, axis=0)
    return X, y


def load_cifar10(
    data_dir: str | Path,
    expected_counts: tuple[int, int] | None = (50_000, 10_000),
) -> tuple[SplitData, SplitData]:
    """Load CIFAR-10 train and test splits from binary batches.

    Each 3073-byte record is one label byte followed by the 1024-byte R,
    G, and B planes; features keep that plane-major layout.
    """
    data_dir = Path(data_dir)
    splits = []
    expected = expected_counts if expected_counts is not None else (None, None)
    for names, exp in zip((CIFAR_TRAIN_FILES, CIFAR_TEST_FILES), expected):
        Xu8, y = _load_cifar_files(data_dir, names)
        if exp is not None and Xu8.shape[0] != exp:
            raise CountMismatchError(f"{data_dir / names[0]}: {Xu8.shape[0]} samples, expected {exp}")
        X = Xu8.astype(np.float32) / np.float32(255.0)
        splits.append(SplitData(X=X, y=y.astype(np.int64), layout="rgb_planes"))
    return splits[0], splits[1]


def holdout_tail(split: SplitData, n_holdout: int) -> tuple[SplitData, SplitData]:
    """Carve the last ``n_holdout`` samples off as a validation split."""
    if not 0 < n_holdout < len(split):
        raise ValueError(f"n_holdout must be in (0, {len(split)}), got {n_holdout}")
    cut = len(split) - n_holdout
    head = SplitData(X=split.X[:cut], y=split.y[:cut], layout=split.layout)
    tail = SplitData(X=split.X[cut:], y=split.y[cut:], layout=split.layout)
    return head, tail


def take_head(split: SplitData, n: int | None) -> SplitData:
    """First ``n`` samples in file order (None keeps everything)."""
    if n is None or n >= len(split):
        return split
    if n < 1:
        raise ValueError(f"subset size must be >= 1, got {n}")
    return SplitData(X=split.X[:n], y=split.y[:n], layout=split.layout)
