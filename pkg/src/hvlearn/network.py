"""Self-contained two-layer dense network: flatten, bias-free linear,
tanh, bias-free linear, softmax; trained with cross-entropy and Adam.

The weight layout deliberately mirrors the hypervector memories so that
a trained network transplants into an HDC model by plain array copies:
``w_in`` holds one row per input feature (the item-memory layout) and
``w_out`` one row per class (the associative-memory layout). The forward
pass reuses the same encoding and scoring kernels as the HDC pipeline,
which makes the post-transplant prediction equivalence exact rather than
approximate.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .container import read_container, write_container
from .encoding import record_encode
from .ops import dot_scores

CHECKPOINT_FILE_KIND = "hvlearn-dense-net"

__all__ = [
    "DenseNet",
    "AdamState",
    "init_dense_net",
    "forward",
    "loss_and_gradients",
    "adam_step",
    "softmax",
    "DenseNetClassifier",
    "save_checkpoint",
    "load_checkpoint",
]


@dataclass
class DenseNet:
    """Bias-free two-layer network parameters.

    ``w_in``  : (n_features, hidden_dims) input-layer weights
    ``w_out`` : (n_classes, hidden_dims) classifier-layer weights

    There are no bias vectors anywhere, by construction.
    """

    w_in: np.ndarray
    w_out: np.ndarray

    def __post_init__(self) -> None:
        if self.w_in.ndim != 2 or self.w_out.ndim != 2:
            raise ValueError("w_in and w_out must be 2-D")
        if self.w_in.shape[1] != self.w_out.shape[1]:
            raise ValueError(
                f"hidden-width mismatch: w_in has {self.w_in.shape[1]}, w_out has {self.w_out.shape[1]}"
            )

    @property
    def n_features(self) -> int:
        return self.w_in.shape[0]

    @property
    def hidden_dims(self) -> int:
        return self.w_in.shape[1]

    @property
    def n_classes(self) -> int:
        return self.w_out.shape[0]

    @property
    def dtype(self) -> np.dtype:
        return self.w_in.dtype

    def copy(self) -> "DenseNet":
        return DenseNet(self.w_in.copy(), self.w_out.copy())


def init_dense_net(
    n_features: int,
    hidden_dims: int,
    n_classes: int,
    seed: int = 0,
    dtype=np.float32,
) -> DenseNet:
    """Seeded uniform init with bound 1/sqrt(fan_in) per layer.

    Keeps the tanh pre-activations in the near-linear region even for
    wide hidden layers.
    """
    if min(n_features, hidden_dims, n_classes) < 1:
        raise ValueError("all layer sizes must be >= 1")
    rng = np.random.default_rng(seed)
    bound_in = 1.0 / np.sqrt(n_features)
    bound_out = 1.0 / np.sqrt(hidden_dims)
    w_in = rng.uniform(-bound_in, bound_in, size=(n_features, hidden_dims)).astype(dtype)
    w_out = rng.uniform(-bound_out, bound_out, size=(n_classes, hidden_dims)).astype(dtype)
    return DenseNet(w_in, w_out)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax, stabilized by max subtraction."""
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _as_batch(X: np.ndarray, n_features: int, dtype: np.dtype) -> np.ndarray:
    X = np.asarray(X, dtype=dtype)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2 or X.shape[1] != n_features:
        raise ValueError(f"expected (n, {n_features}) inputs, got shape {X.shape}")
    return X


def forward(net: DenseNet, X) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Full forward pass; returns ``(hidden, logits, probs)``.

    ``hidden = tanh(X @ w_in)`` and ``logits = hidden @ w_out.T`` are
    computed with the same kernels the HDC pipeline uses for encoding
    and class scoring. ``probs`` rows sum to 1.
    """
    X = _as_batch(X, net.n_features, net.dtype)
    hidden = np.tanh(record_encode(X, net.w_in))
    logits = dot_scores(hidden, net.w_out)
    return hidden, logits, softmax(logits)


def loss_and_gradients(net: DenseNet, X, y) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean cross-entropy over a batch and its exact analytic gradients.

    Returns ``(loss, g_in, g_out)`` with gradient shapes matching
    ``w_in`` and ``w_out``. The loss uses the log-sum-exp form, so a
    confidently correct prediction drives it to 0 without log underflow.
    """
    X = _as_batch(X, net.n_features, net.dtype)
    y = np.asarray(y)
    n = X.shape[0]
    if n == 0:
        raise ValueError("empty batch")
    if y.shape != (n,):
        raise ValueError(f"labels must have shape ({n},), got {y.shape}")
    if y.min() < 0 or y.max() >= net.n_classes:
        raise ValueError(f"label out of range [0, {net.n_classes})")
    hidden, logits, _ = forward(net, X)
    z = logits - logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=1))
    loss = float(np.mean(lse - z[np.arange(n), y]))
    dz = np.exp(z - lse[:, None])  # softmax probabilities
    dz[np.arange(n), y] -= 1.0
    dz /= n
    g_out = dz.T @ hidden
    d_hidden = dz @ net.w_out
    d_pre = d_hidden * (1.0 - hidden * hidden)
    g_in = X.T @ d_pre
    return loss, g_in, g_out


@dataclass
class AdamState:
    """Adam accumulators; shapes match the network parameters."""

    m_in: np.ndarray
    v_in: np.ndarray
    m_out: np.ndarray
    v_out: np.ndarray
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def for_net(cls, net: DenseNet, **hyper) -> "AdamState":
        return cls(
            m_in=np.zeros_like(net.w_in),
            v_in=np.zeros_like(net.w_in),
            m_out=np.zeros_like(net.w_out),
            v_out=np.zeros_like(net.w_out),
            **hyper,
        )


def adam_step(net: DenseNet, g_in: np.ndarray, g_out: np.ndarray, state: AdamState, lr: float = 0.001) -> None:
    """One bias-corrected Adam update, in place, on both weight matrices."""
    if g_in.shape != net.w_in.shape or g_out.shape != net.w_out.shape:
        raise ValueError(
            f"gradient shape mismatch: {g_in.shape}/{g_out.shape} vs "
            f"{net.w_in.shape}/{net.w_out.shape}"
        )
    state.t += 1
    correction1 = 1.0 - state.beta1**state.t
    correction2 = 1.0 - state.beta2**state.t
    for param, grad, m, v in (
        (net.w_in, g_in, state.m_in, state.v_in),
        (net.w_out, g_out, state.m_out, state.v_out),
    ):
        m *= state.beta1
        m += (1.0 - state.beta1) * grad
        v *= state.beta2
        v += (1.0 - state.beta2) * grad * grad
        m_hat = m / correction1
        v_hat = v / correction2
        param -= lr * m_hat / (np.sqrt(v_hat) + state.epsilon)


class DenseNetClassifier(ClassifierMixin, BaseEstimator):
    """Mini-batch Adam training of the two-layer network.

    Training shuffles each epoch with a seeded permutation, monitors
    validation accuracy, stops early once the improvement has stayed at
    or below ``min_delta_pp`` percentage points for ``patience``
    consecutive epochs, and restores the weights from the best epoch.
    When no validation set is passed to ``fit``, the tail
    ``validation_fraction`` of the training set is held out.
    """

    def __init__(
        self,
        hidden_dims: int = 10_000,
        n_classes: int | None = None,
        lr: float = 0.001,
        batch_size: int = 64,
        max_epochs: int = 50,
        patience: int = 5,
        min_delta_pp: float = 0.1,
        validation_fraction: float = 0.1,
        seed: int = 0,
        dtype: str = "float32",
        verbose: int = 0,
    ):
        self.hidden_dims = hidden_dims
        self.n_classes = n_classes
        self.lr = lr
        self.batch_size = batch_size
        self.max_epochs = max_epochs
        self.patience = patience
        self.min_delta_pp = min_delta_pp
        self.validation_fraction = validation_fraction
        self.seed = seed
        self.dtype = dtype
        self.verbose = verbose

    def fit(self, X, y, X_val=None, y_val=None):
        if self.lr <= 0 or self.batch_size < 1 or self.max_epochs < 1:
            raise ValueError("lr must be > 0, batch_size and max_epochs >= 1")
        dtype = np.dtype(self.dtype)
        X = np.ascontiguousarray(X, dtype=dtype)
        y = np.asarray(y, dtype=np.int64)
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise ValueError("X must be (n_samples, n_features) aligned with y")
        if X_val is None:
            n_val = max(1, int(round(self.validation_fraction * X.shape[0])))
            if n_val >= X.shape[0]:
                raise ValueError("not enough samples to carve a validation split")
            X, X_val = X[:-n_val], X[-n_val:]
            y, y_val = y[:-n_val], y[-n_val:]
        else:
            X_val = np.ascontiguousarray(X_val, dtype=dtype)
            y_val = np.asarray(y_val, dtype=np.int64)
        n_classes = self.n_classes if self.n_classes is not None else int(y.max()) + 1
        self.classes_ = np.arange(n_classes)
        self.n_features_in_ = X.shape[1]
        self.net_ = init_dense_net(X.shape[1], self.hidden_dims, n_classes, self.seed, dtype)
        state = AdamState.for_net(self.net_)
        rng = np.random.default_rng((self.seed, 1))  # shuffle stream, separate from init
        n = X.shape[0]
        history: dict = {"train_loss": [], "val_accuracy": [], "best_epoch": 0, "stopped_early": False}
        best_acc = -np.inf
        best_weights = self.net_.copy()
        streak = 0
        for epoch in range(self.max_epochs):
            order = rng.permutation(n)
            epoch_loss = 0.0
            for start in range(0, n, self.batch_size):
                idx = order[start : start + self.batch_size]
                loss, g_in, g_out = loss_and_gradients(self.net_, X[idx], y[idx])
                adam_step(self.net_, g_in, g_out, state, self.lr)
                epoch_loss += loss * len(idx)
            history["train_loss"].append(epoch_loss / n)
            val_acc = float(np.mean(self._predict_net(self.net_, X_val) == y_val))
            history["val_accuracy"].append(val_acc)
            if self.verbose:
                print(f"epoch {epoch}: loss {history['train_loss'][-1]:.4f} val_acc {val_acc:.4f}")
            if (val_acc - best_acc) * 100.0 > self.min_delta_pp:
                best_acc = val_acc
                best_weights = self.net_.copy()
                history["best_epoch"] = epoch
                streak = 0
            else:
                streak += 1
            if streak >= self.patience:
                history["stopped_early"] = epoch + 1 < self.max_epochs
                break
        self.net_ = best_weights
        history["best_val_accuracy"] = float(best_acc)
        self.history_ = history
        return self

    @staticmethod
    def _predict_net(net: DenseNet, X: np.ndarray, chunk_size: int = 2048) -> np.ndarray:
        preds = np.empty(X.shape[0], dtype=np.int64)
        for i in range(0, X.shape[0], chunk_size):
            _, logits, _ = forward(net, X[i : i + chunk_size])
            preds[i : i + chunk_size] = np.argmax(logits, axis=1)
        return preds

    def decision_function(self, X) -> np.ndarray:
        check_is_fitted(self, "net_")
        _, logits, _ = forward(self.net_, np.asarray(X, dtype=self.net_.dtype))
        return logits

    def predict_proba(self, X) -> np.ndarray:
        return softmax(self.decision_function(X))

    def predict(self, X) -> np.ndarray:
        check_is_fitted(self, "net_")
        return self._predict_net(self.net_, np.asarray(X, dtype=self.net_.dtype))


def save_checkpoint(net: DenseNet, path: str | Path, meta: dict | None = None) -> None:
    """Write network weights to the standard container format."""
    manifest = {
        "kind": CHECKPOINT_FILE_KIND,
        "n_features": net.n_features,
        "hidden_dims": net.hidden_dims,
        "n_classes": net.n_classes,
        "dtype": str(net.dtype),
        "user": dict(meta or {}),
    }
    write_container(path, manifest, {"input_weights": net.w_in, "output_weights": net.w_out})


def load_checkpoint(path: str | Path) -> tuple[DenseNet, dict]:
    """Load a checkpoint written by :func:`save_checkpoint`."""
    manifest, arrays = read_container(path)
    if manifest.get("kind") != CHECKPOINT_FILE_KIND:
        raise ValueError(f"{path}: not a network checkpoint (kind={manifest.get('kind')!r})")
    net = DenseNet(arrays["input_weights"], arrays["output_weights"])
    return net, manifest.get("user", {})
