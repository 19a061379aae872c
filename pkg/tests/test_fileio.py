import gzip
import struct

import numpy as np
import pytest

from qmeans.errors import BadMagic, CountMismatch, ParseError, RaggedRows, TruncatedFile
from qmeans.fileio import load_csv, load_idx, load_labels, write_csv, write_idx, write_labels


def test_simple_csv(tmp_path):
    f = tmp_path / "a.csv"
    f.write_text("1,2\n3,4\n")
    M, y = load_csv(f)
    np.testing.assert_array_equal(M.data, [[1.0, 2.0], [3.0, 4.0]])
    assert y is None


def test_header_and_labels(tmp_path):
    f = tmp_path / "a.csv"
    f.write_text("x,y,label\n1,2,0\n3,4,1\n")
    M, y = load_csv(f, header=True, label_column=True)
    assert M.shape == (2, 2)
    np.testing.assert_array_equal(y, [0, 1])


def test_parse_error_location(tmp_path):
    f = tmp_path / "a.csv"
    f.write_text("1,2\n3,abc\n")
    with pytest.raises(ParseError) as info:
        load_csv(f)
    assert info.value.row == 2 and info.value.column == 2


def test_ragged_rows(tmp_path):
    f = tmp_path / "a.csv"
    f.write_text("1,2\n3\n")
    with pytest.raises(RaggedRows):
        load_csv(f)


def test_non_integer_label(tmp_path):
    f = tmp_path / "a.csv"
    f.write_text("1,2,0.5\n")
    with pytest.raises(ParseError):
        load_csv(f, label_column=True)


def test_round_trip(tmp_path, rng):
    X = rng.standard_normal((20, 5)) * 1e3
    y = rng.integers(0, 4, 20)
    f = tmp_path / "r.csv"
    write_csv(f, X, labels=y)
    M, y2 = load_csv(f, label_column=True)
    np.testing.assert_allclose(M.data, X, rtol=1e-12, atol=0)
    np.testing.assert_array_equal(M.data, X)
    np.testing.assert_array_equal(y2, y)


def test_label_file_round_trip(tmp_path):
    f = tmp_path / "l.txt"
    write_labels(f, [3, 1, 2])
    np.testing.assert_array_equal(load_labels(f), [3, 1, 2])


def _fixture_bytes():
    # two 2x3 images written byte by byte
    images = struct.pack(">IIII", 0x00000803, 2, 2, 3) + bytes([0, 1, 2, 3, 4, 5, 255, 254, 253, 10, 20, 30])
    labels = struct.pack(">II", 0x00000801, 2) + bytes([7, 3])
    return images, labels


def test_idx_fixture(tmp_path):
    images, labels = _fixture_bytes()
    (tmp_path / "i").write_bytes(images)
    (tmp_path / "l").write_bytes(labels)
    M, y = load_idx(tmp_path / "i", tmp_path / "l")
    np.testing.assert_array_equal(M.data, [[0, 1, 2, 3, 4, 5], [255, 254, 253, 10, 20, 30]])
    np.testing.assert_array_equal(y, [7, 3])


def test_idx_gzip(tmp_path):
    images, labels = _fixture_bytes()
    with gzip.open(tmp_path / "i.gz", "wb") as f:
        f.write(images)
    (tmp_path / "l").write_bytes(labels)
    M, _ = load_idx(tmp_path / "i.gz", tmp_path / "l")
    assert M.shape == (2, 6)


def test_idx_writer_round_trip(tmp_path, rng):
    imgs = rng.integers(0, 256, (5, 28, 28), dtype=np.uint8)
    labs = rng.integers(0, 10, 5)
    write_idx(tmp_path / "i", tmp_path / "l", imgs, labs)
    M, y = load_idx(tmp_path / "i", tmp_path / "l")
    assert M.shape == (5, 784)
    np.testing.assert_array_equal(M.data, imgs.reshape(5, -1))
    np.testing.assert_array_equal(y, labs)


def test_idx_bad_magic(tmp_path):
    images, labels = _fixture_bytes()
    (tmp_path / "i").write_bytes(images)
    (tmp_path / "l").write_bytes(struct.pack(">II", 0x00000803, 2) + bytes([7, 3]))
    with pytest.raises(BadMagic):
        load_idx(tmp_path / "i", tmp_path / "l")


def test_idx_truncated(tmp_path):
    images, labels = _fixture_bytes()
    (tmp_path / "i").write_bytes(images[:-1])
    (tmp_path / "l").write_bytes(labels)
    with pytest.raises(TruncatedFile):
        load_idx(tmp_path / "i", tmp_path / "l")


def test_idx_count_mismatch(tmp_path):
    images, _ = _fixture_bytes()
    (tmp_path / "i").write_bytes(images)
    (tmp_path / "l").write_bytes(struct.pack(">II", 0x00000801, 3) + bytes([7, 3, 1]))
    with pytest.raises(CountMismatch):
        load_idx(tmp_path / "i", tmp_path / "l")
