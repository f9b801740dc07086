"""Shared fixtures: synthetic datasets written in the real binary formats.

The synthetic images are class templates plus noise, so the pipelines
reach well-above-chance accuracy on them; they exercise the loaders,
encoders, and runners end to end without the full-size datasets.
"""

from __future__ import annotations

import gzip
import struct
from pathlib import Path

import numpy as np
import pytest


def make_blob_images(
    n: int,
    templates: np.ndarray,
    rng: np.random.Generator,
):
    """uint8 images drawn from shared per-class templates plus noise."""
    n_classes = templates.shape[0]
    y = rng.integers(0, n_classes, size=n)
    noise = rng.normal(0.0, 40.0, size=(n, templates.shape[1]))
    X = np.clip(templates[y] + noise, 0, 255).astype(np.uint8)
    return X, y.astype(np.uint8)


def write_mnist_idx(
    data_dir: Path,
    n_train: int = 256,
    n_test: int = 64,
    seed: int = 7,
    gzipped: bool = False,
) -> Path:
    """Write synthetic IDX files with the standard names and magics."""
    rng = np.random.default_rng(seed)
    data_dir.mkdir(parents=True, exist_ok=True)
    templates = rng.integers(0, 256, size=(10, 28 * 28))
    for split, n in (("train", n_train), ("t10k", n_test)):
        X, y = make_blob_images(n, templates, rng)
        images = struct.pack(">iiii", 0x00000803, n, 28, 28) + X.tobytes()
        labels = struct.pack(">ii", 0x00000801, n) + y.tobytes()
        pairs = (
            (f"{split}-images-idx3-ubyte", images),
            (f"{split}-labels-idx1-ubyte", labels),
        )
        for name, blob in pairs:
            if gzipped:
                with gzip.open(data_dir / (name + ".gz"), "wb") as fh:
                    fh.write(blob)
            else:
                (data_dir / name).write_bytes(blob)
    return data_dir


def write_cifar_bin(
    data_dir: Path,
    n_per_batch: int = 40,
    n_test: int = 50,
    seed: int = 11,
) -> Path:
    """Write synthetic CIFAR-10 binary batches (3073-byte records)."""
    rng = np.random.default_rng(seed)
    data_dir.mkdir(parents=True, exist_ok=True)
    templates = rng.integers(0, 256, size=(10, 3 * 32 * 32))

    def write_batch(path: Path, n: int) -> None:
        X, y = make_blob_images(n, templates, rng)
        records = np.concatenate([y[:, None], X], axis=1).astype(np.uint8)
        path.write_bytes(records.tobytes())

    for i in range(1, 6):
        write_batch(data_dir / f"data_batch_{i}.bin", n_per_batch)
    write_batch(data_dir / "test_batch.bin", n_test)
    return data_dir


@pytest.fixture(scope="session")
def mnist_like_dir(tmp_path_factory) -> Path:
    return write_mnist_idx(tmp_path_factory.mktemp("mnist_like"))


@pytest.fixture(scope="session")
def cifar_like_dir(tmp_path_factory) -> Path:
    return write_cifar_bin(tmp_path_factory.mktemp("cifar_like"))


def real_data_dir() -> Path | None:
    """Directory with the real MNIST/CIFAR files, if the user provided one."""
    import os

    for candidate in (os.environ.get("HVLEARN_DATA_DIR"), "data", "/root/data"):
        if not candidate:
            continue
        path = Path(candidate)
        if path.is_dir():
            return path
    return None


def has_real_mnist() -> bool:
    d = real_data_dir()
    if d is None:
        return False
    return all(
        (d / name).exists() or (d / (name + ".gz")).exists()
        for name in (
            "train-images-idx3-ubyte",
            "train-labels-idx1-ubyte",
            "t10k-images-idx3-ubyte",
            "t10k-labels-idx1-ubyte",
        )
    )


def has_real_cifar() -> bool:
    d = real_data_dir()
    if d is None:
        return False
    names = [f"data_batch_{i}.bin" for i in range(1, 6)] + ["test_batch.bin"]
    return all((d / name).exists() or (d / (name + ".gz")).exists() for name in names)
