"""Memory construction statistics and bit-exact file persistence."""

import json
import struct

import numpy as np
import pytest

from hvlearn.container import (
    ContainerChecksumError,
    ContainerError,
    ContainerVersionError,
    read_container,
    write_container,
)
from hvlearn.memory import (
    AssociativeMemory,
    ItemMemory,
    load_memories,
    random_item_memory,
    save_memories,
    zero_associative_memory,
)


class TestRandomItemMemory:
    def test_same_seed_bit_identical(self):
        a = random_item_memory(32, 256, seed=5)
        b = random_item_memory(32, 256, seed=5)
        assert a.vectors.tobytes() == b.vectors.tobytes()

    def test_bipolar_values(self):
        im = random_item_memory(8, 100, dist="bipolar", seed=0)
        assert set(np.unique(im.vectors)) == {-1.0, 1.0}

    def test_bipolar_row_means_concentrate(self):
        # binomial concentration: sigma = 1/sqrt(dims) = 0.01 at 10k dims,
        # so every row mean should sit within the 4-sigma band
        im = random_item_memory(16, 10_000, dist="bipolar", seed=123)
        means = im.vectors.mean(axis=1)
        assert np.all(np.abs(means) <= 0.04)

    def test_rows_quasi_orthogonal(self):
        im = random_item_memory(16, 10_000, dist="bipolar", seed=3)
        v = im.vectors
        norms = np.linalg.norm(v, axis=1)
        gram = (v @ v.T) / np.outer(norms, norms)
        off_diag = gram[~np.eye(16, dtype=bool)]
        assert np.abs(off_diag).max() < 0.05

    def test_distinct_seeds_quasi_orthogonal(self):
        a = random_item_memory(16, 10_000, seed=0).vectors
        b = random_item_memory(16, 10_000, seed=1).vectors
        cos = np.einsum("nd,nd->n", a, b) / (
            np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1)
        )
        assert np.abs(cos).max() < 0.05

    def test_gaussian_moments(self):
        im = random_item_memory(4, 50_000, dist="gaussian", seed=9)
        assert abs(im.vectors.mean()) < 0.02
        assert abs(im.vectors.std() - 1.0) < 0.02

    def test_invalid_sizes(self):
        with pytest.raises(ValueError):
            random_item_memory(0, 10)
        with pytest.raises(ValueError):
            random_item_memory(10, 0)

    def test_unknown_distribution(self):
        with pytest.raises(ValueError, match="distribution"):
            random_item_memory(4, 4, dist="cauchy")

    def test_metadata(self):
        im = random_item_memory(4, 8, seed=2)
        assert (im.num_items, im.dims, im.seed, im.source) == (4, 8, 2, "canonical")


class TestZeroAssociativeMemory:
    def test_all_zero(self):
        am = zero_associative_memory(10, 10_000)
        assert am.vectors.shape == (10, 10_000)
        assert not am.vectors.any()

    def test_minimal(self):
        am = zero_associative_memory(1, 1)
        np.testing.assert_array_equal(am.vectors, [[0.0]])

    def test_invalid_sizes(self):
        with pytest.raises(ValueError):
            zero_associative_memory(0, 5)
        with pytest.raises(ValueError):
            zero_associative_memory(5, 0)


class TestTypes:
    def test_item_memory_requires_2d(self):
        with pytest.raises(ValueError):
            ItemMemory(vectors=np.zeros(5))

    def test_float32_enforced(self):
        im = ItemMemory(vectors=np.ones((2, 3), dtype=np.float64))
        assert im.vectors.dtype == np.float32

    def test_associative_memory_shape_properties(self):
        am = AssociativeMemory(vectors=np.zeros((3, 7), dtype=np.float32))
        assert (am.num_classes, am.dims) == (3, 7)


class TestPersistence:
    def test_round_trip_bit_exact(self, tmp_path):
        im = random_item_memory(12, 64, seed=4)
        am = AssociativeMemory(
            vectors=np.random.default_rng(0).normal(size=(3, 64)).astype(np.float32),
            source="canonical",
        )
        path = tmp_path / "mem.hvc"
        save_memories(im, am, path, meta={"dataset": "toy", "note": 1})
        ims2, am2, meta = load_memories(path)
        assert len(ims2) == 1
        assert ims2[0].vectors.tobytes() == im.vectors.tobytes()
        assert (ims2[0].dist, ims2[0].seed, ims2[0].source) == ("bipolar", 4, "canonical")
        assert am2.vectors.tobytes() == am.vectors.tobytes()
        assert meta == {"dataset": "toy", "note": 1}

    def test_round_trip_multiple_item_memories(self, tmp_path):
        ims = [random_item_memory(8, 32, seed=s) for s in (0, 1, 2)]
        am = zero_associative_memory(10, 32)
        path = tmp_path / "rgb.hvc"
        save_memories(ims, am, path)
        ims2, am2, _ = load_memories(path)
        assert len(ims2) == 3
        for a, b in zip(ims, ims2):
            assert a.vectors.tobytes() == b.vectors.tobytes()
            assert a.seed == b.seed

    def test_truncated_file_checksum_error(self, tmp_path):
        path = tmp_path / "mem.hvc"
        save_memories(random_item_memory(8, 32), zero_associative_memory(2, 32), path)
        blob = path.read_bytes()
        path.write_bytes(blob[:-40])
        with pytest.raises(ContainerChecksumError, match="truncated"):
            load_memories(path)

    def test_corrupted_payload_checksum_error(self, tmp_path):
        path = tmp_path / "mem.hvc"
        save_memories(random_item_memory(8, 32), zero_associative_memory(2, 32), path)
        blob = bytearray(path.read_bytes())
        blob[-10] ^= 0xFF
        path.write_bytes(bytes(blob))
        with pytest.raises(ContainerChecksumError, match="checksum"):
            load_memories(path)

    def test_unknown_version_error(self, tmp_path):
        path = tmp_path / "mem.hvc"
        save_memories(random_item_memory(8, 32), zero_associative_memory(2, 32), path)
        blob = path.read_bytes()
        header_len = struct.unpack_from("<I", blob, 8)[0]
        header = json.loads(blob[12 : 12 + header_len].decode())
        header["format_version"] = 99
        new_header = json.dumps(header, sort_keys=True).encode()
        path.write_bytes(blob[:8] + struct.pack("<I", len(new_header)) + new_header + blob[12 + header_len :])
        with pytest.raises(ContainerVersionError, match="version"):
            load_memories(path)

    def test_bad_magic_error(self, tmp_path):
        path = tmp_path / "mem.hvc"
        path.write_bytes(b"NOTAFILE" + b"\x00" * 32)
        with pytest.raises(ContainerError, match="magic"):
            load_memories(path)

    def test_requires_item_memory(self, tmp_path):
        with pytest.raises(ValueError, match="at least one"):
            save_memories([], zero_associative_memory(2, 4), tmp_path / "x.hvc")


class TestContainer:
    def test_header_is_inspectable_text(self, tmp_path):
        path = tmp_path / "c.hvc"
        write_container(path, {"hello": "world"}, {"a": np.arange(4, dtype=np.float32)})
        head = path.read_bytes()[:1000]
        assert b'"hello"' in head and b'"world"' in head

    def test_generic_dtype_round_trip(self, tmp_path):
        path = tmp_path / "c.hvc"
        arrays = {
            "f64": np.random.default_rng(1).normal(size=(3, 5)),
            "i64": np.arange(10, dtype=np.int64),
        }
        write_container(path, {}, arrays)
        _, loaded = read_container(path)
        for name, arr in arrays.items():
            assert loaded[name].dtype == arr.dtype
            np.testing.assert_array_equal(loaded[name], arr)

    def test_loaded_arrays_writable(self, tmp_path):
        path = tmp_path / "c.hvc"
        write_container(path, {}, {"a": np.zeros(3, dtype=np.float32)})
        _, loaded = read_container(path)
        loaded["a"][0] = 1.0  # must not raise
