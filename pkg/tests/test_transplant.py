"""Weight extraction into hypervector memories and the exact
prediction-equivalence contract with the source network."""

import numpy as np
import pytest

from hvlearn.memory import load_memories
from hvlearn.network import DenseNet, DenseNetClassifier, forward, init_dense_net, save_checkpoint
from hvlearn.transplant import (
    derive,
    derive_from_checkpoint,
    derive_memories,
    save_derived,
    verify_equivalence,
    weight_fingerprint,
)


def trained_toy_net(seed=0, n_features=12, hidden=32, n_classes=4, n=200):
    rng = np.random.default_rng(seed)
    templates = rng.normal(size=(n_classes, n_features))
    y = rng.integers(0, n_classes, size=n)
    X = (templates[y] + 0.4 * rng.normal(size=(n, n_features))).astype(np.float32)
    X = (X - X.min()) / (X.max() - X.min())
    clf = DenseNetClassifier(
        hidden_dims=hidden, n_classes=n_classes, lr=0.01, batch_size=16,
        max_epochs=15, patience=5, seed=seed,
    )
    clf.fit(X[: n - 40], y[: n - 40], X[n - 40 :], y[n - 40 :])
    return clf, X, y


class TestDeriveMemories:
    def test_shapes_and_provenance(self):
        net = init_dense_net(12, 32, 4, seed=0)
        im, am = derive_memories(net)
        assert (im.num_items, im.dims) == (12, 32)
        assert (am.num_classes, am.dims) == (4, 32)
        assert im.source == "derived" and am.source == "derived"
        assert im.dist is None

    def test_values_are_bit_copies(self):
        net = init_dense_net(6, 8, 3, seed=1)
        im, am = derive_memories(net)
        assert im.vectors.tobytes() == net.w_in.tobytes()
        assert am.vectors.tobytes() == net.w_out.tobytes()

    def test_deterministic_and_repeatable(self):
        net = init_dense_net(6, 8, 3, seed=2)
        a = derive(net)
        b = derive(net)
        assert a.item_memory.vectors.tobytes() == b.item_memory.vectors.tobytes()
        assert a.associative_memory.vectors.tobytes() == b.associative_memory.vectors.tobytes()
        assert a.source_hash == b.source_hash

    def test_fingerprint_tracks_weights(self):
        net = init_dense_net(6, 8, 3, seed=3)
        h1 = weight_fingerprint(net)
        net.w_out[0, 0] += 1.0
        assert weight_fingerprint(net) != h1


class TestIdentityTransplant:
    def test_identity_weights_classify_one_hot_inputs(self):
        net = DenseNet(np.eye(3, dtype=np.float32), np.eye(3, dtype=np.float32))
        model = derive(net)
        for c in range(3):
            x = np.zeros((1, 3), dtype=np.float32)
            x[0, c] = 1.0
            assert model.predict(x)[0] == c


class TestEquivalence:
    def test_exact_equivalence_on_trained_network(self):
        clf, X, y = trained_toy_net(seed=0)
        model = derive(clf.net_)
        report = verify_equivalence(clf.net_, model, X)
        assert report.n_mismatches == 0
        assert report.n_samples == len(X)
        assert report.equivalent

    def test_equivalence_across_seeds(self):
        for seed in (1, 2, 3):
            clf, X, _ = trained_toy_net(seed=seed)
            report = verify_equivalence(clf.net_, derive(clf.net_), X)
            assert report.n_mismatches == 0

    def test_derived_accuracy_equals_network_accuracy(self):
        clf, X, y = trained_toy_net(seed=4)
        model = derive(clf.net_)
        derived_acc = float(np.mean(model.predict(X) == y))
        net_acc = float(np.mean(clf.predict(X) == y))
        assert derived_acc == net_acc

    def test_scores_equal_logits_exactly(self):
        clf, X, _ = trained_toy_net(seed=5)
        model = derive(clf.net_)
        _, logits, _ = forward(clf.net_, X)
        scores = model.decision_function(X)
        np.testing.assert_array_equal(scores, logits)

    def test_empty_sample_set(self):
        net = init_dense_net(4, 8, 2, seed=0)
        report = verify_equivalence(net, derive(net), np.zeros((0, 4), dtype=np.float32))
        assert report.n_samples == 0 and report.n_mismatches == 0

    def test_corrupted_class_row_breaks_equivalence(self):
        clf, X, y = trained_toy_net(seed=6)
        model = derive(clf.net_)
        # fault injection: negate one class row in the derived memory only
        target = 1
        model.classifier.am_.vectors[target] *= -1.0
        report = verify_equivalence(clf.net_, model, X)
        net_preds = clf.predict(X)
        assert report.n_mismatches > 0
        # mismatches concentrate on samples the network assigns to the
        # corrupted class
        assert np.any(net_preds == target)
        mismatched = set(report.mismatch_indices)
        affected = set(np.nonzero(net_preds == target)[0].tolist())
        assert mismatched & affected

    def test_chunking_does_not_change_the_verdict(self):
        clf, X, _ = trained_toy_net(seed=7)
        model = derive(clf.net_)
        for chunk in (1, 7, 64, 10_000):
            assert verify_equivalence(clf.net_, model, X, chunk_size=chunk).n_mismatches == 0


class TestAblations:
    def test_bipolarize_ablation_runs(self):
        clf, X, y = trained_toy_net(seed=8)
        model = derive(clf.net_, activation="bipolarize")
        preds = model.predict(X)
        assert preds.shape == (len(X),)
        assert set(np.unique(model.encoder.transform(X[:4]))) <= {-1.0, 1.0}

    def test_cosine_ablation_runs(self):
        clf, X, y = trained_toy_net(seed=9)
        model = derive(clf.net_, similarity="cosine")
        assert model.classifier.similarity == "cosine"
        model.predict(X)


class TestDerivedPersistence:
    def test_save_and_reload_via_memory_format(self, tmp_path):
        clf, X, _ = trained_toy_net(seed=10)
        model = derive(clf.net_)
        path = tmp_path / "derived.hvc"
        save_derived(model, path, meta={"dataset": "toy"})
        ims, am, meta = load_memories(path)
        assert meta["source"] == "derived"
        assert meta["source_hash"] == model.source_hash
        assert meta["activation"] == "tanh"
        assert meta["similarity"] == "dot"
        assert ims[0].vectors.tobytes() == model.item_memory.vectors.tobytes()
        assert am.vectors.tobytes() == model.associative_memory.vectors.tobytes()

    def test_derive_from_checkpoint(self, tmp_path):
        clf, X, _ = trained_toy_net(seed=11)
        path = tmp_path / "net.hvc"
        save_checkpoint(clf.net_, path, meta={"dataset": "toy"})
        model, meta = derive_from_checkpoint(path)
        assert meta == {"dataset": "toy"}
        assert verify_equivalence(clf.net_, model, X).n_mismatches == 0
