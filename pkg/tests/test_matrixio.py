import struct

import numpy as np
import pytest

from phoneval.matrixio import (
    MAGIC,
    NotAMatrixFile,
    RepresentationMatrix,
    TruncatedFile,
    read_matrix,
    write_matrix,
)


def test_roundtrip_bit_exact(tmp_path):
    data = np.array([[1.5, -2.25], [0.0, 3.125], [1e-30, 7.0]], dtype=np.float32)
    path = tmp_path / "m.maub"
    write_matrix(RepresentationMatrix(data, 50.0), path)
    again = read_matrix(path)
    assert again.frame_rate == 50.0
    assert again.data.dtype == np.float32
    assert again.data.tobytes() == data.tobytes()


def test_roundtrip_random_payload(tmp_path):
    rng = np.random.default_rng(0)
    for _ in range(10):
        rows, cols = int(rng.integers(1, 40)), int(rng.integers(1, 16))
        data = rng.standard_normal((rows, cols)).astype(np.float32)
        path = tmp_path / "m.maub"
        write_matrix(RepresentationMatrix(data, 100.0), path)
        assert read_matrix(path).data.tobytes() == data.tobytes()


def test_bad_magic(tmp_path):
    path = tmp_path / "m.maub"
    path.write_bytes(b"XXXX" + b"\x00" * 20)
    with pytest.raises(NotAMatrixFile):
        read_matrix(path)


def test_truncated_payload(tmp_path):
    path = tmp_path / "m.maub"
    header = struct.pack("<4sIIId", MAGIC, 1, 10, 3, 50.0)
    path.write_bytes(header + b"\x00" * (9 * 3 * 4))  # one row short
    with pytest.raises(TruncatedFile):
        read_matrix(path)


def test_truncated_header(tmp_path):
    path = tmp_path / "m.maub"
    path.write_bytes(MAGIC + b"\x01")
    with pytest.raises(TruncatedFile):
        read_matrix(path)


def test_unsupported_version(tmp_path):
    path = tmp_path / "m.maub"
    path.write_bytes(struct.pack("<4sIIId", MAGIC, 9, 1, 1, 50.0) + b"\x00" * 4)
    with pytest.raises(NotAMatrixFile):
        read_matrix(path)
