"""Nearest-centroid classification over hypervectors.

The classifier keeps one class hypervector per label in an associative
memory. One-shot training sums every sample hypervector into its class
row; inference picks the class row with the highest similarity to the
query; retraining iterates the training set and, on each misprediction,
subtracts the sample hypervector from the wrongly predicted class row
and adds it to the correct one, with update coefficient exactly 1. The
item memory used for encoding is never touched by any of this.
"""

from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from . import ops
from .memory import AssociativeMemory, zero_associative_memory

SIMILARITIES = ("cosine", "dot")
UPDATE_MODES = ("online", "batch")

__all__ = ["HdcClassifier"]


def _as_hv_matrix(X) -> np.ndarray:
    arr = np.asarray(X, dtype=np.float32)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValueError(f"expected (n_samples, dims) hypervectors, got shape {arr.shape}")
    return arr


class HdcClassifier(ClassifierMixin, BaseEstimator):
    """Hypervector nearest-centroid classifier with error-driven retraining.

    Parameters
    ----------
    n_classes : number of classes; inferred from the labels when None.
    similarity : ``"cosine"`` or ``"dot"`` scoring against class rows.
    retrain_epochs : maximum retraining passes run by ``fit`` after the
        one-shot accumulation; 0 disables retraining.
    patience : consecutive epochs without a > ``min_delta_pp`` accuracy
        improvement tolerated before retraining stops early. 0 stops
        after a single epoch regardless of improvement.
    min_delta_pp : improvement threshold, in accuracy percentage points.
    shuffle : reshuffle the visiting order each retraining epoch with a
        deterministic, seed-driven permutation.
    update_mode : ``"online"`` applies each correction immediately, so
        later samples in the epoch see the updated memory; ``"batch"``
        accumulates the epoch's corrections and applies them at the end.
    seed : RNG seed for the per-epoch shuffles.

    Attributes (after fit)
    ----------------------
    am_ : the trained :class:`AssociativeMemory`.
    classes_ : ``np.arange(n_classes)``.
    retrain_history_ : per-epoch accuracy trace from the last retraining.
    """

    def __init__(
        self,
        n_classes: int | None = None,
        similarity: str = "cosine",
        retrain_epochs: int = 20,
        patience: int = 5,
        min_delta_pp: float = 0.1,
        shuffle: bool = True,
        update_mode: str = "online",
        seed: int = 0,
    ):
        self.n_classes = n_classes
        self.similarity = similarity
        self.retrain_epochs = retrain_epochs
        self.patience = patience
        self.min_delta_pp = min_delta_pp
        self.shuffle = shuffle
        self.update_mode = update_mode
        self.seed = seed

    # ------------------------------------------------------------------
    # construction helpers
    # ------------------------------------------------------------------

    @classmethod
    def from_memories(cls, associative_memory: AssociativeMemory, similarity: str = "cosine", **params):
        """Build a fitted classifier around an existing associative memory."""
        clf = cls(n_classes=associative_memory.num_classes, similarity=similarity, **params)
        clf._check_params()
        clf.am_ = AssociativeMemory(
            vectors=associative_memory.vectors.copy(), source=associative_memory.source
        )
        clf.classes_ = np.arange(clf.am_.num_classes)
        clf.n_features_in_ = clf.am_.dims
        clf.retrain_history_ = None
        return clf

    def _check_params(self) -> None:
        if self.similarity not in SIMILARITIES:
            raise ValueError(f"unknown similarity {self.similarity!r}; expected one of {SIMILARITIES}")
        if self.update_mode not in UPDATE_MODES:
            raise ValueError(f"unknown update_mode {self.update_mode!r}; expected one of {UPDATE_MODES}")
        if self.retrain_epochs < 0 or self.patience < 0:
            raise ValueError("retrain_epochs and patience must be >= 0")

    def _validate_labels(self, y, n_classes: int) -> np.ndarray:
        y = np.asarray(y)
        if y.size and (y.min() < 0 or y.max() >= n_classes):
            bad = int(y.min()) if y.min() < 0 else int(y.max())
            raise ValueError(f"label {bad} out of range [0, {n_classes})")
        return y.astype(np.int64, copy=False)

    # ------------------------------------------------------------------
    # lifecycle
    # ------------------------------------------------------------------

    def fit(self, X, y):
        """One-shot training followed by retraining (per ``retrain_epochs``)."""
        self._check_params()
        X = _as_hv_matrix(X)
        y = np.asarray(y)
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"X and y disagree on sample count: {X.shape[0]} vs {y.shape[0]}")
        if X.shape[0] == 0 and self.n_classes is None:
            raise ValueError("cannot infer n_classes from an empty training set")
        n_classes = self.n_classes if self.n_classes is not None else int(y.max()) + 1
        y = self._validate_labels(y, n_classes)
        self.am_ = zero_associative_memory(n_classes, X.shape[1])
        self.classes_ = np.arange(n_classes)
        self.n_features_in_ = X.shape[1]
        self.train_once(X, y)
        if self.retrain_epochs > 0:
            self.retrain_history_ = self.retrain(X, y)
        else:
            self.retrain_history_ = None
        return self

    def train_once(self, X, y) -> "HdcClassifier":
        """Add every sample hypervector into its class row (single pass).

        Additive: repeated calls accumulate, and the result does not
        depend on sample order (exactly so for integer-valued
        hypervectors such as bipolarized ones).
        """
        check_is_fitted(self, "am_")
        X = _as_hv_matrix(X)
        y = self._validate_labels(np.asarray(y), self.am_.num_classes)
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"X and y disagree on sample count: {X.shape[0]} vs {y.shape[0]}")
        if X.shape[1] != self.am_.dims:
            raise ValueError(f"dimension mismatch: {X.shape[1]} vs memory dims {self.am_.dims}")
        am = self.am_.vectors
        for c in np.unique(y):
            am[c] += X[y == c].sum(axis=0, dtype=np.float32)
        return self

    def retrain_epoch(self, X, y, order: np.ndarray | None = None) -> float:
        """One error-driven pass over ``(X, y)``; returns visit-time accuracy.

        Samples are visited in ``order`` (default: given order). In
        online mode each misprediction immediately moves the sample
        hypervector from the wrongly predicted row to the correct one,
        so later samples in the same pass see the updated memory; batch
        mode scores every sample against the incoming memory and applies
        the accumulated corrections afterwards. Both conserve the
        element-wise sum of the class rows exactly.
        """
        check_is_fitted(self, "am_")
        self._check_params()
        X = _as_hv_matrix(X)
        y = self._validate_labels(np.asarray(y), self.am_.num_classes)
        if order is None:
            order = np.arange(X.shape[0])
        if X.shape[0] == 0:
            return 0.0
        am = self.am_.vectors
        if self.update_mode == "batch":
            preds = self._predict_from_hvs(X)
            wrong = preds != y
            n_correct = int(X.shape[0] - np.count_nonzero(wrong))
            if np.any(wrong):
                np.add.at(am, y[wrong], X[wrong])
                np.subtract.at(am, preds[wrong], X[wrong])
            return n_correct / X.shape[0]

        use_cosine = self.similarity == "cosine"
        if use_cosine:
            # per-row norms cached; the query norm is a common positive
            # factor and cannot change the argmax
            norms = np.sqrt(np.einsum("cd,cd->c", am, am))
        n_correct = 0
        for i in order:
            x = X[i]
            scores = am @ x
            if use_cosine:
                np.divide(scores, norms, out=scores, where=norms > 0)
            pred = int(np.argmax(scores))
            if pred == y[i]:
                n_correct += 1
            else:
                am[pred] -= x
                am[y[i]] += x
                if use_cosine:
                    norms[pred] = np.sqrt(am[pred] @ am[pred])
                    norms[y[i]] = np.sqrt(am[y[i]] @ am[y[i]])
        return n_correct / X.shape[0]

    def retrain(
        self,
        X,
        y,
        max_epochs: int | None = None,
        patience: int | None = None,
    ) -> dict:
        """Run retraining epochs with early stopping on training accuracy.

        Stops once accuracy has failed to improve by more than
        ``min_delta_pp`` percentage points for ``patience`` consecutive
        epochs, and restores the class rows to their state at the end of
        the best epoch. Returns the history dict (also stored on
        ``retrain_history_`` when called through ``fit``).
        """
        check_is_fitted(self, "am_")
        self._check_params()
        max_epochs = self.retrain_epochs if max_epochs is None else max_epochs
        patience = self.patience if patience is None else patience
        if max_epochs < 1:
            raise ValueError(f"max_epochs must be >= 1, got {max_epochs}")
        X = _as_hv_matrix(X)
        y = self._validate_labels(np.asarray(y), self.am_.num_classes)
        rng = np.random.default_rng(self.seed)
        n = X.shape[0]
        history: dict = {"epoch_accuracy": [], "best_epoch": 0, "stopped_early": False}
        best_acc = -np.inf
        best_am = self.am_.vectors.copy()
        streak = 0
        for epoch in range(max_epochs):
            order = rng.permutation(n) if self.shuffle else np.arange(n)
            acc = self.retrain_epoch(X, y, order)
            history["epoch_accuracy"].append(acc)
            if (acc - best_acc) * 100.0 > self.min_delta_pp:
                best_acc = acc
                best_am = self.am_.vectors.copy()
                history["best_epoch"] = epoch
                streak = 0
            else:
                streak += 1
            if streak >= patience:
                history["stopped_early"] = epoch + 1 < max_epochs
                break
        self.am_.vectors[...] = best_am
        history["best_accuracy"] = float(best_acc)
        return history

    # ------------------------------------------------------------------
    # inference
    # ------------------------------------------------------------------

    def decision_function(self, X) -> np.ndarray:
        """Similarity of each query hypervector to every class row."""
        check_is_fitted(self, "am_")
        self._check_params()
        X = _as_hv_matrix(X)
        if X.shape[1] != self.am_.dims:
            raise ValueError(f"dimension mismatch: {X.shape[1]} vs memory dims {self.am_.dims}")
        if self.similarity == "cosine":
            return ops.cosine_scores(X, self.am_.vectors)
        return ops.dot_scores(X, self.am_.vectors)

    def _predict_from_hvs(self, X: np.ndarray) -> np.ndarray:
        # np.argmax breaks ties toward the lowest class index
        return np.argmax(self.decision_function(X), axis=1).astype(np.int64)

    def predict(self, X) -> np.ndarray:
        return self._predict_from_hvs(_as_hv_matrix(X))

    def infer(self, hv) -> tuple[int, np.ndarray]:
        """Classify a single query hypervector; returns (label, scores)."""
        scores = self.decision_function(np.asarray(hv).reshape(1, -1))[0]
        return int(np.argmax(scores)), scores

    def evaluate(self, X, y) -> float:
        """Fraction of samples predicted correctly; 0.0 (with a warning)
        for an empty sample set."""
        X = _as_hv_matrix(X)
        y = np.asarray(y)
        if X.shape[0] == 0:
            warnings.warn("evaluate() called with an empty sample set; returning 0.0")
            return 0.0
        return float(np.mean(self.predict(X) == y))
