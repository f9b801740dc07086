"""IDX and CIFAR binary loaders: format guards, scaling, and determinism."""

import struct

import numpy as np
import pytest

from hvlearn.datasets import (
    BadMagicError,
    CountMismatchError,
    LabelRangeError,
    MissingDatasetFile,
    RecordSizeError,
    TruncatedFileError,
    holdout_tail,
    load_cifar10,
    load_mnist,
    take_head,
)

from conftest import write_cifar_bin, write_mnist_idx


class TestMnistLoader:
    def test_counts_and_shapes(self, mnist_like_dir):
        train, test = load_mnist(mnist_like_dir, expected_counts=(256, 64))
        assert (len(train), len(test)) == (256, 64)
        assert train.X.shape == (256, 784)
        assert train.layout == "single"

    def test_values_scaled_to_unit_interval(self, mnist_like_dir):
        train, _ = load_mnist(mnist_like_dir, expected_counts=None)
        assert train.X.min() >= 0.0 and train.X.max() <= 1.0
        assert train.X.dtype == np.float32

    def test_denormalization_round_trip(self, mnist_like_dir):
        train, _ = load_mnist(mnist_like_dir, expected_counts=None)
        raw = (mnist_like_dir / "train-images-idx3-ubyte").read_bytes()[16:]
        original = np.frombuffer(raw, dtype=np.uint8).reshape(len(train), 784)
        recovered = np.rint(train.X * 255.0).astype(np.uint8)
        np.testing.assert_array_equal(recovered, original)

    def test_order_preserved_and_deterministic(self, mnist_like_dir):
        a, _ = load_mnist(mnist_like_dir, expected_counts=None)
        b, _ = load_mnist(mnist_like_dir, expected_counts=None)
        assert a.X.tobytes() == b.X.tobytes()
        assert a.y.tobytes() == b.y.tobytes()

    def test_standard_count_enforced_by_default(self, mnist_like_dir):
        with pytest.raises(CountMismatchError, match="expected 60000"):
            load_mnist(mnist_like_dir)

    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingDatasetFile, match="train-images"):
            load_mnist(tmp_path, expected_counts=None)

    def test_label_magic_on_image_file_rejected(self, tmp_path):
        d = write_mnist_idx(tmp_path / "bad", n_train=4, n_test=2)
        image_path = d / "train-images-idx3-ubyte"
        blob = bytearray(image_path.read_bytes())
        blob[0:4] = struct.pack(">i", 0x00000801)
        image_path.write_bytes(bytes(blob))
        with pytest.raises(BadMagicError, match="0x00000801"):
            load_mnist(d, expected_counts=None)

    def test_truncated_payload(self, tmp_path):
        d = write_mnist_idx(tmp_path / "trunc", n_train=4, n_test=2)
        image_path = d / "train-images-idx3-ubyte"
        image_path.write_bytes(image_path.read_bytes()[:-100])
        with pytest.raises(TruncatedFileError, match="payload"):
            load_mnist(d, expected_counts=None)

    def test_image_label_count_disagreement(self, tmp_path):
        d = write_mnist_idx(tmp_path / "mismatch", n_train=4, n_test=2)
        label_path = d / "train-labels-idx1-ubyte"
        blob = label_path.read_bytes()
        label_path.write_bytes(struct.pack(">ii", 0x00000801, 3) + blob[8:11])
        with pytest.raises(CountMismatchError, match="labels"):
            load_mnist(d, expected_counts=None)

    def test_wrong_image_side_rejected(self, tmp_path):
        d = tmp_path / "side"
        d.mkdir()
        (d / "train-images-idx3-ubyte").write_bytes(
            struct.pack(">iiii", 0x00000803, 1, 16, 16) + bytes(256)
        )
        (d / "train-labels-idx1-ubyte").write_bytes(struct.pack(">ii", 0x00000801, 1) + bytes(1))
        with pytest.raises(CountMismatchError, match="28x28"):
            load_mnist(d, expected_counts=None)

    def test_gzipped_files_load_identically(self, tmp_path, mnist_like_dir):
        gz_dir = write_mnist_idx(tmp_path / "gz", gzipped=True)
        plain, _ = load_mnist(mnist_like_dir, expected_counts=None)
        zipped, _ = load_mnist(gz_dir, expected_counts=None)
        assert plain.X.tobytes() == zipped.X.tobytes()


class TestCifarLoader:
    def test_counts_shapes_layout(self, cifar_like_dir):
        train, test = load_cifar10(cifar_like_dir, expected_counts=(200, 50))
        assert (len(train), len(test)) == (200, 50)
        assert train.X.shape == (200, 3072)
        assert train.layout == "rgb_planes"

    def test_plane_split_layout(self, cifar_like_dir):
        # first 1024 features must come from the R plane of the record
        train, _ = load_cifar10(cifar_like_dir, expected_counts=None)
        raw = (cifar_like_dir / "data_batch_1.bin").read_bytes()
        first = np.frombuffer(raw[1:3073], dtype=np.uint8)
        np.testing.assert_allclose(train.X[0], first / 255.0, rtol=1e-6)

    def test_values_scaled(self, cifar_like_dir):
        train, _ = load_cifar10(cifar_like_dir, expected_counts=None)
        assert train.X.min() >= 0.0 and train.X.max() <= 1.0

    def test_standard_count_enforced_by_default(self, cifar_like_dir):
        with pytest.raises(CountMismatchError, match="expected 50000"):
            load_cifar10(cifar_like_dir)

    def test_misaligned_record_size(self, tmp_path):
        d = write_cifar_bin(tmp_path / "bad", n_per_batch=3, n_test=2)
        path = d / "data_batch_2.bin"
        path.write_bytes(path.read_bytes()[:-1])
        with pytest.raises(RecordSizeError, match="3073"):
            load_cifar10(d, expected_counts=None)

    def test_label_byte_out_of_range(self, tmp_path):
        d = write_cifar_bin(tmp_path / "label", n_per_batch=3, n_test=2)
        path = d / "data_batch_1.bin"
        blob = bytearray(path.read_bytes())
        blob[0] = 17
        path.write_bytes(bytes(blob))
        with pytest.raises(LabelRangeError, match="17"):
            load_cifar10(d, expected_counts=None)

    def test_missing_batch(self, tmp_path):
        d = write_cifar_bin(tmp_path / "partial", n_per_batch=3, n_test=2)
        (d / "data_batch_4.bin").unlink()
        with pytest.raises(MissingDatasetFile, match="data_batch_4"):
            load_cifar10(d, expected_counts=None)


class TestSplitHelpers:
    def test_holdout_tail(self, mnist_like_dir):
        train, _ = load_mnist(mnist_like_dir, expected_counts=None)
        head, tail = holdout_tail(train, 50)
        assert len(head) == len(train) - 50 and len(tail) == 50
        np.testing.assert_array_equal(tail.X, train.X[-50:])
        np.testing.assert_array_equal(head.y, train.y[:-50])

    def test_holdout_bounds(self, mnist_like_dir):
        train, _ = load_mnist(mnist_like_dir, expected_counts=None)
        with pytest.raises(ValueError):
            holdout_tail(train, len(train))
        with pytest.raises(ValueError):
            holdout_tail(train, 0)

    def test_take_head(self, mnist_like_dir):
        train, _ = load_mnist(mnist_like_dir, expected_counts=None)
        sub = take_head(train, 10)
        assert len(sub) == 10
        np.testing.assert_array_equal(sub.X, train.X[:10])
        assert take_head(train, None) is train
        assert take_head(train, 10_000) is train
