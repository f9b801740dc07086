"""Record-based hypervector encoders.

A sample's hypervector is the feature-value-weighted sum of the per
position item hypervectors, which is exactly a matrix product between
the feature vector and the item memory. ``RecordEncoder`` wraps that
product as a scikit-learn transformer; ``RgbRecordEncoder`` encodes
three color planes with independent item memories and mixes the channel
hypervectors pairwise before the output activation.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import ops
from .memory import ItemMemory, random_item_memory

ACTIVATIONS = ("none", "bipolarize", "tanh")

__all__ = [
    "RecordEncoder",
    "RgbRecordEncoder",
    "record_encode",
    "mix_rgb_pairwise",
    "apply_activation",
    "encode_dataset",
]


def record_encode(X: np.ndarray, item_vectors: np.ndarray) -> np.ndarray:
    """Record-based encoding: ``X @ item_vectors``.

    ``X`` is ``(n, num_items)`` or ``(num_items,)`` and ``item_vectors``
    is ``(num_items, dims)``. Linear in ``X``; a one-hot feature vector
    extracts its item hypervector exactly.
    """
    X = np.asarray(X)
    item_vectors = np.asarray(item_vectors)
    if X.shape[-1] != item_vectors.shape[0]:
        raise ValueError(
            f"dimension mismatch: {X.shape[-1]} features but item memory has "
            f"{item_vectors.shape[0]} rows"
        )
    return X @ item_vectors


def mix_rgb_pairwise(vr: np.ndarray, vg: np.ndarray, vb: np.ndarray) -> np.ndarray:
    """Mix three channel hypervectors by summing every channel pair.

    Kept in its literal pairwise form rather than the algebraically
    equal ``2 * (vr + vg + vb)`` so the identity stays testable.
    """
    if not (vr.shape == vg.shape == vb.shape):
        raise ValueError(
            f"dimension mismatch between channel hypervectors: {vr.shape}, {vg.shape}, {vb.shape}"
        )
    v_rg = vr + vg
    v_rb = vr + vb
    v_gb = vg + vb
    return v_rg + v_rb + v_gb


def apply_activation(hv: np.ndarray, activation: str) -> np.ndarray:
    """Post-encoding nonlinearity: ``none``, ``bipolarize``, or ``tanh``.

    Bipolarization is the canonical choice; tanh is the smooth stand-in
    used by the dense-network twin, and sign-wise the two agree.
    """
    if activation == "none":
        return hv
    if activation == "bipolarize":
        return ops.bipolarize(hv)
    if activation == "tanh":
        return np.tanh(hv)
    raise ValueError(f"unknown activation {activation!r}; expected one of {ACTIVATIONS}")


def _as_feature_matrix(X, what: str = "X") -> np.ndarray:
    try:
        arr = np.asarray(X)
        if arr.dtype == object:
            raise ValueError("inhomogeneous")
    except ValueError:
        # ragged input: name the first sample whose length disagrees
        lengths = [len(row) for row in X]
        first = lengths[0] if lengths else 0
        for i, length in enumerate(lengths):
            if length != first:
                raise ValueError(f"sample {i}: feature length {length} != {first}") from None
        raise ValueError(f"{what} could not be converted to a numeric matrix") from None
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValueError(f"{what} must be 2-D (n_samples, n_features), got shape {arr.shape}")
    return np.ascontiguousarray(arr, dtype=np.float32)


class RecordEncoder(TransformerMixin, BaseEstimator):
    """Encode feature vectors as hypervectors via an item memory.

    Parameters
    ----------
    dims : output hypervector dimensionality (ignored when an explicit
        ``item_memory`` is supplied).
    dist : row distribution for a freshly initialized item memory,
        ``"bipolar"`` or ``"gaussian"``.
    activation : output nonlinearity, ``"bipolarize"`` (canonical),
        ``"tanh"`` (network twin), or ``"none"``.
    seed : RNG seed for item-memory initialization.
    item_memory : optional pre-built :class:`ItemMemory` (e.g. extracted
        from trained network weights); ``fit`` then only validates it.
    """

    def __init__(
        self,
        dims: int = 10_000,
        dist: str = "bipolar",
        activation: str = "bipolarize",
        seed: int = 0,
        item_memory: ItemMemory | None = None,
    ):
        self.dims = dims
        self.dist = dist
        self.activation = activation
        self.seed = seed
        self.item_memory = item_memory

    def fit(self, X, y=None):
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}; expected one of {ACTIVATIONS}")
        X = _as_feature_matrix(X)
        if self.item_memory is not None:
            if X.shape[0] > 0 and X.shape[1] != self.item_memory.num_items:
                raise ValueError(
                    f"dimension mismatch: X has {X.shape[1]} features but the item "
                    f"memory has {self.item_memory.num_items} rows"
                )
            self.item_memory_ = self.item_memory
        else:
            self.item_memory_ = random_item_memory(X.shape[1], self.dims, self.dist, self.seed)
        self.n_features_in_ = self.item_memory_.num_items
        self.dims_ = self.item_memory_.dims
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "item_memory_")
        X = _as_feature_matrix(X)
        hv = record_encode(X, self.item_memory_.vectors)
        return apply_activation(hv, self.activation)

    def item_memories(self) -> list[ItemMemory]:
        check_is_fitted(self, "item_memory_")
        return [self.item_memory_]


class RgbRecordEncoder(TransformerMixin, BaseEstimator):
    """Record-based encoder for three-plane (R, G, B) feature vectors.

    Features are laid out as three consecutive planes of equal length.
    Each plane is encoded against its own independently seeded item
    memory (seeds ``seed``, ``seed + 1``, ``seed + 2``); the channel
    hypervectors are mixed pairwise and the activation is applied after
    mixing.
    """

    def __init__(
        self,
        dims: int = 10_000,
        dist: str = "bipolar",
        activation: str = "bipolarize",
        seed: int = 0,
        item_memory_rgb: list[ItemMemory] | None = None,
    ):
        self.dims = dims
        self.dist = dist
        self.activation = activation
        self.seed = seed
        self.item_memory_rgb = item_memory_rgb

    def fit(self, X, y=None):
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}; expected one of {ACTIVATIONS}")
        X = _as_feature_matrix(X)
        if self.item_memory_rgb is not None:
            ims = list(self.item_memory_rgb)
            if len(ims) != 3:
                raise ValueError(f"expected 3 channel item memories, got {len(ims)}")
            plane = ims[0].num_items
            if any(im.num_items != plane for im in ims):
                raise ValueError("channel item memories must have equal num_items")
            if X.shape[0] > 0 and X.shape[1] != 3 * plane:
                raise ValueError(
                    f"dimension mismatch: X has {X.shape[1]} features but the channel "
                    f"memories cover {3 * plane}"
                )
            self.item_memories_ = ims
        else:
            if X.shape[1] % 3 != 0:
                raise ValueError(
                    f"rgb layout requires a feature count divisible by 3, got {X.shape[1]}"
                )
            plane = X.shape[1] // 3
            self.item_memories_ = [
                random_item_memory(plane, self.dims, self.dist, self.seed + c) for c in range(3)
            ]
        self.plane_size_ = self.item_memories_[0].num_items
        self.n_features_in_ = 3 * self.plane_size_
        self.dims_ = self.item_memories_[0].dims
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "item_memories_")
        X = _as_feature_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"dimension mismatch: X has {X.shape[1]} features, expected {self.n_features_in_}"
            )
        p = self.plane_size_
        planes = (X[:, :p], X[:, p : 2 * p], X[:, 2 * p :])
        vr, vg, vb = (
            record_encode(plane, im.vectors) for plane, im in zip(planes, self.item_memories_)
        )
        mixed = mix_rgb_pairwise(vr, vg, vb)
        return apply_activation(mixed, self.activation)

    def item_memories(self) -> list[ItemMemory]:
        check_is_fitted(self, "item_memories_")
        return list(self.item_memories_)


def encode_dataset(encoder, X, chunk_size: int = 4096) -> np.ndarray:
    """Encode a batch of feature vectors in order-preserving chunks.

    Equivalent to ``encoder.transform(X)`` but bounds peak memory by
    filling a preallocated output chunk by chunk, and reports the
    offending sample index for ragged inputs. An empty batch yields an
    empty ``(0, dims)`` array.
    """
    if len(X) == 0:
        return np.zeros((0, encoder.dims_), dtype=np.float32)
    X = _as_feature_matrix(X)
    out = np.empty((X.shape[0], encoder.dims_), dtype=np.float32)
    for i in range(0, X.shape[0], chunk_size):
        out[i : i + chunk_size] = encoder.transform(X[i : i + chunk_size])
    return out
