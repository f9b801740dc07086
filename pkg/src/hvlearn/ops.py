"""Hypervector algebra and similarity metrics.

Hypervectors are plain 1-D numpy arrays; a bank of hypervectors (an item
or associative memory) is a 2-D array with one hypervector per row. All
operations here are pure, never modify their operands, and preserve the
operand dimensionality:

    ``bundle(a, b)``       element-wise addition, superposing information
                           from the same modality
    ``bind(a, b)``         element-wise multiplication, combining
                           information across modalities
    ``permute(a, k)``      cyclic rotation by ``k`` positions, encoding
                           positional or temporal order
    ``bipolarize(a)``      sign thresholding onto {-1, +1}

Similarity between hypervectors is measured with cosine similarity, the
raw dot product, or (for binary/bipolar vectors) the Hamming distance.
``dot_scores`` and ``cosine_scores`` are the batched forms used for
nearest-centroid inference; they are also the exact arithmetic performed
by a bias-free linear layer, which is what makes dense-network weights
transplantable into hypervector memories.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "bundle",
    "bind",
    "permute",
    "bipolarize",
    "cosine_similarity",
    "dot_similarity",
    "hamming_distance",
    "dot_scores",
    "cosine_scores",
]


def _check_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: operands have shapes {a.shape} and {b.shape}")


def bundle(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Superpose two hypervectors by element-wise addition."""
    a = np.asarray(a)
    b = np.asarray(b)
    _check_same_shape(a, b)
    return a + b


def bind(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Combine two hypervectors by element-wise multiplication.

    For bipolar operands binding is self-inverse: ``bind(bind(a, b), b) == a``.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    _check_same_shape(a, b)
    return a * b


def permute(a: np.ndarray, shift: int = 1) -> np.ndarray:
    """Cyclically rotate a hypervector by ``shift`` positions.

    The element at index ``d`` moves to index ``(d + shift) mod dims``.
    The shift is reduced modulo the dimensionality; negative shifts
    rotate in the opposite direction. The multiset of values and the L2
    norm are preserved exactly.
    """
    return np.roll(np.asarray(a), shift, axis=-1)


def bipolarize(a: np.ndarray) -> np.ndarray:
    """Threshold a hypervector onto {-1, +1} by sign.

    Entries greater than zero map to +1, entries less than zero to -1.
    Exact zeros map to +1 so the result is deterministic. Idempotent on
    vectors that are already bipolar.
    """
    a = np.asarray(a)
    # unsigned dtypes cannot hold -1; everything else keeps its dtype
    dtype = a.dtype if a.dtype.kind in "fi" else np.int8
    return np.where(a >= 0, 1, -1).astype(dtype, copy=False)


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity between two hypervectors, in [-1, 1].

    Computed in float64 regardless of the input dtype. Returns exactly
    0.0 when either operand has zero norm, so inference against an
    untrained (all-zero) class hypervector never divides by zero.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    _check_same_shape(a, b)
    a64 = a.astype(np.float64, copy=False).ravel()
    b64 = b.astype(np.float64, copy=False).ravel()
    na = np.linalg.norm(a64)
    nb = np.linalg.norm(b64)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(a64 @ b64) / float(na * nb)


def dot_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Dot product of two hypervectors.

    Shares its sign with the cosine similarity for nonzero operands, so
    argmax-based classification is unchanged by dropping the norm
    division.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    _check_same_shape(a, b)
    return float(np.dot(a.ravel(), b.ravel()))


def hamming_distance(a: np.ndarray, b: np.ndarray) -> int:
    """Number of positions where two binary or bipolar hypervectors differ.

    Both operands must draw their entries from {0, 1} or both from
    {-1, +1}; anything else raises ``ValueError``.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    _check_same_shape(a, b)
    binary = bool(np.isin(a, (0, 1)).all() and np.isin(b, (0, 1)).all())
    bipolar = bool(np.isin(a, (-1, 1)).all() and np.isin(b, (-1, 1)).all())
    if not (binary or bipolar):
        raise ValueError("hamming_distance requires entries in {0, 1} or {-1, +1} for both operands")
    return int(np.count_nonzero(a != b))


def dot_scores(queries: np.ndarray, class_rows: np.ndarray) -> np.ndarray:
    """Dot-product scores of query hypervectors against a bank of rows.

    ``queries`` is ``(n, dims)`` or ``(dims,)``; ``class_rows`` is
    ``(n_rows, dims)``. Returns ``(n, n_rows)`` (or ``(n_rows,)`` for a
    single query). This is exactly the forward pass of a bias-free
    linear layer whose weight rows are the class hypervectors.
    """
    q = np.asarray(queries)
    rows = np.asarray(class_rows)
    if q.shape[-1] != rows.shape[-1]:
        raise ValueError(
            f"dimension mismatch: queries have {q.shape[-1]} dims, class rows have {rows.shape[-1]}"
        )
    return q @ rows.T


def cosine_scores(queries: np.ndarray, class_rows: np.ndarray) -> np.ndarray:
    """Cosine-similarity scores of query hypervectors against a bank of rows.

    Entries where either operand has zero norm are exactly 0.
    """
    q = np.asarray(queries)
    rows = np.asarray(class_rows)
    scores = dot_scores(q, rows)
    q_norm = np.sqrt(np.einsum("...d,...d->...", q, q))
    row_norm = np.sqrt(np.einsum("cd,cd->c", rows, rows))
    denom = np.multiply.outer(q_norm, row_norm)
    out = np.zeros_like(scores, dtype=scores.dtype)
    np.divide(scores, denom, out=out, where=denom > 0)
    return out
