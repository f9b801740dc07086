"""Item and associative memories: construction and file persistence.

An item memory holds one hypervector per feature position and doubles as
the input-layer weight matrix of the equivalent dense network. An
associative memory holds one hypervector per class and doubles as the
classifier-layer weight matrix. Both store float32 row-major arrays;
serialization round-trips are bit-exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .container import read_container, write_container

MEMORY_FILE_KIND = "hvlearn-memories"

__all__ = [
    "ItemMemory",
    "AssociativeMemory",
    "random_item_memory",
    "zero_associative_memory",
    "save_memories",
    "load_memories",
]


def _as_float32_matrix(vectors: np.ndarray, what: str) -> np.ndarray:
    arr = np.ascontiguousarray(vectors, dtype=np.float32)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{what} must be a non-empty 2-D array, got shape {np.shape(vectors)}")
    return arr


@dataclass
class ItemMemory:
    """Bank of per-feature-position item hypervectors, one per row.

    ``source`` records whether the rows were randomly initialized
    (``"canonical"``) or extracted from trained network weights
    (``"derived"``).
    """

    vectors: np.ndarray  # (num_items, dims) float32
    dist: str | None = "bipolar"
    seed: int | None = None
    source: str = "canonical"

    def __post_init__(self) -> None:
        self.vectors = _as_float32_matrix(self.vectors, "item memory")

    @property
    def num_items(self) -> int:
        return self.vectors.shape[0]

    @property
    def dims(self) -> int:
        return self.vectors.shape[1]


@dataclass
class AssociativeMemory:
    """Bank of per-class hypervectors, one per row."""

    vectors: np.ndarray  # (num_classes, dims) float32
    source: str = "canonical"

    def __post_init__(self) -> None:
        self.vectors = _as_float32_matrix(self.vectors, "associative memory")

    @property
    def num_classes(self) -> int:
        return self.vectors.shape[0]

    @property
    def dims(self) -> int:
        return self.vectors.shape[1]


def random_item_memory(
    num_items: int,
    dims: int,
    dist: str = "bipolar",
    seed: int = 0,
) -> ItemMemory:
    """Create an item memory with i.i.d. random entries.

    ``dist="bipolar"`` draws uniformly from {-1, +1}; ``dist="gaussian"``
    draws from a standard normal. Deterministic for a fixed seed.
    """
    if num_items < 1 or dims < 1:
        raise ValueError(f"num_items and dims must be >= 1, got {num_items} and {dims}")
    rng = np.random.default_rng(seed)
    if dist == "bipolar":
        vectors = (rng.integers(0, 2, size=(num_items, dims), dtype=np.int8) * 2 - 1).astype(
            np.float32
        )
    elif dist == "gaussian":
        vectors = rng.standard_normal((num_items, dims)).astype(np.float32)
    else:
        raise ValueError(f"unknown distribution {dist!r}; expected 'bipolar' or 'gaussian'")
    return ItemMemory(vectors=vectors, dist=dist, seed=seed)


def zero_associative_memory(num_classes: int, dims: int) -> AssociativeMemory:
    """Create an all-zero associative memory (the untrained state)."""
    if num_classes < 1 or dims < 1:
        raise ValueError(f"num_classes and dims must be >= 1, got {num_classes} and {dims}")
    return AssociativeMemory(vectors=np.zeros((num_classes, dims), dtype=np.float32))


def save_memories(
    item_memories: ItemMemory | list[ItemMemory],
    associative_memory: AssociativeMemory,
    path: str | Path,
    meta: dict | None = None,
) -> None:
    """Persist item memories plus an associative memory to one file.

    Accepts a single item memory or a list of them (one per input
    channel). ``meta`` is free-form and stored verbatim in the manifest;
    the encoder/classifier configuration placed there by the pipelines
    lets a model be reconstructed from the file alone.
    """
    if isinstance(item_memories, ItemMemory):
        item_memories = [item_memories]
    if not item_memories:
        raise ValueError("at least one item memory is required")
    arrays: dict[str, np.ndarray] = {}
    im_entries = []
    for i, im in enumerate(item_memories):
        name = f"item_memory_{i}"
        arrays[name] = im.vectors
        im_entries.append(
            {
                "array": name,
                "dist": im.dist,
                "seed": im.seed,
                "source": im.source,
                "num_items": im.num_items,
                "dims": im.dims,
            }
        )
    arrays["associative_memory"] = associative_memory.vectors
    manifest = {
        "kind": MEMORY_FILE_KIND,
        "item_memories": im_entries,
        "associative_memory": {
            "source": associative_memory.source,
            "num_classes": associative_memory.num_classes,
            "dims": associative_memory.dims,
        },
        "user": dict(meta or {}),
    }
    write_container(path, manifest, arrays)


def load_memories(path: str | Path) -> tuple[list[ItemMemory], AssociativeMemory, dict]:
    """Load a file produced by :func:`save_memories`.

    Returns ``(item_memories, associative_memory, user_meta)``. Arrays
    are bit-identical to what was saved.
    """
    manifest, arrays = read_container(path)
    if manifest.get("kind") != MEMORY_FILE_KIND:
        raise ValueError(f"{path}: not a memories file (kind={manifest.get('kind')!r})")
    item_memories = [
        ItemMemory(
            vectors=arrays[entry["array"]],
            dist=entry["dist"],
            seed=entry["seed"],
            source=entry["source"],
        )
        for entry in manifest["item_memories"]
    ]
    am_info = manifest["associative_memory"]
    am = AssociativeMemory(vectors=arrays["associative_memory"], source=am_info["source"])
    return item_memories, am, manifest.get("user", {})
