"""Derive an HDC model from a trained two-layer dense network.

The input-layer weight matrix, transposed so that each column becomes a
row, is the item memory; the classifier-layer weight matrix, row per
class, is the associative memory. The derived model encodes with the
network's own tanh nonlinearity and scores with the raw dot product,
which is the network's logit computation with the softmax dropped.
Since softmax is strictly monotone, the derived model's predictions
match the source network's argmax exactly, not approximately.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classifier import HdcClassifier
from .encoding import RecordEncoder
from .memory import AssociativeMemory, ItemMemory, save_memories
from .network import DenseNet, forward, load_checkpoint

__all__ = [
    "derive",
    "derive_memories",
    "derive_from_checkpoint",
    "DerivedModel",
    "EquivalenceReport",
    "verify_equivalence",
    "weight_fingerprint",
    "save_derived",
]


def weight_fingerprint(net: DenseNet) -> str:
    """sha256 over both weight matrices; identifies the source network."""
    digest = hashlib.sha256()
    digest.update(np.ascontiguousarray(net.w_in).tobytes())
    digest.update(np.ascontiguousarray(net.w_out).tobytes())
    return digest.hexdigest()


def derive_memories(net: DenseNet) -> tuple[ItemMemory, AssociativeMemory]:
    """Extract hypervector memories from network weights.

    The item memory gets one row per input feature and the associative
    memory one row per class; both are tagged ``source="derived"``.
    Memories store float32, so the copies are bit-exact for float32
    networks (the trained configuration).
    """
    im = ItemMemory(vectors=net.w_in.copy(), dist=None, seed=None, source="derived")
    am = AssociativeMemory(vectors=net.w_out.copy(), source="derived")
    return im, am


@dataclass
class DerivedModel:
    """An encoder/classifier pair extracted from a trained network."""

    encoder: RecordEncoder
    classifier: HdcClassifier
    source_hash: str

    @property
    def item_memory(self) -> ItemMemory:
        return self.encoder.item_memory_

    @property
    def associative_memory(self) -> AssociativeMemory:
        return self.classifier.am_

    def decision_function(self, X) -> np.ndarray:
        return self.classifier.decision_function(self.encoder.transform(X))

    def predict(self, X) -> np.ndarray:
        return self.classifier.predict(self.encoder.transform(X))


def derive(net: DenseNet, similarity: str = "dot", activation: str = "tanh") -> DerivedModel:
    """Build the HDC model equivalent to ``net``.

    Defaults keep the network's arithmetic: tanh after encoding and dot
    product scoring (the norm division of full cosine is redundant for
    the argmax). ``activation="bipolarize"`` swaps the smooth
    nonlinearity for hard sign thresholding and ``similarity="cosine"``
    restores the norm division; both are ablations that typically
    perturb accuracy and break exact equivalence with the source
    network.
    """
    im, am = derive_memories(net)
    encoder = RecordEncoder(dims=im.dims, activation=activation, item_memory=im)
    encoder.fit(np.empty((0, im.num_items), dtype=np.float32))
    classifier = HdcClassifier.from_memories(am, similarity=similarity)
    return DerivedModel(encoder=encoder, classifier=classifier, source_hash=weight_fingerprint(net))


def derive_from_checkpoint(path: str | Path, **kwargs) -> tuple[DerivedModel, dict]:
    """Load a network checkpoint and derive its HDC model."""
    net, meta = load_checkpoint(path)
    return derive(net, **kwargs), meta


def save_derived(model: DerivedModel, path: str | Path, meta: dict | None = None) -> None:
    """Persist a derived model in the standard memories format.

    The manifest records the derived provenance, the source-network
    fingerprint, and the encoder/classifier configuration, so the model
    can be reconstructed and evaluated from the file alone.
    """
    user = {
        "source": "derived",
        "source_hash": model.source_hash,
        "activation": model.encoder.activation,
        "similarity": model.classifier.similarity,
        "layout": "single",
    }
    user.update(meta or {})
    save_memories(model.item_memory, model.associative_memory, path, meta=user)


@dataclass
class EquivalenceReport:
    """Outcome of a prediction-equivalence check."""

    n_samples: int
    n_mismatches: int
    mismatch_indices: list[int]

    @property
    def equivalent(self) -> bool:
        return self.n_mismatches == 0


def verify_equivalence(
    net: DenseNet,
    model: DerivedModel,
    X,
    chunk_size: int = 2048,
    max_recorded: int = 32,
) -> EquivalenceReport:
    """Count samples where the derived model disagrees with the network.

    Both paths are evaluated chunk by chunk on the same inputs. With the
    default derivation (tanh + dot) and shared precision the count must
    be zero; a nonzero count means the derivation or the arithmetic
    differs.
    """
    X = np.asarray(X)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    mismatch_indices: list[int] = []
    n_mismatches = 0
    for start in range(0, X.shape[0], chunk_size):
        chunk = X[start : start + chunk_size]
        _, logits, _ = forward(net, chunk)
        net_pred = np.argmax(logits, axis=1)
        derived_pred = model.predict(chunk)
        bad = np.nonzero(net_pred != derived_pred)[0]
        n_mismatches += len(bad)
        for i in bad[: max(0, max_recorded - len(mismatch_indices))]:
            mismatch_indices.append(start + int(i))
    return EquivalenceReport(
        n_samples=int(X.shape[0]),
        n_mismatches=int(n_mismatches),
        mismatch_indices=mismatch_indices,
    )
