"""Bit-exact binary container for frame-level representation matrices.

Layout (little-endian): magic ``MAUB``, u32 version (= 1), u32 rows,
u32 cols, f64 frame_rate, then rows*cols f32 values in row-major order.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import ToolkitError

MAGIC = b"MAUB"
VERSION = 1
_HEADER = struct.Struct("<4sIIId")


class NotAMatrixFile(ToolkitError):
    pass


class TruncatedFile(ToolkitError):
    pass


@dataclass
class RepresentationMatrix:
    data: np.ndarray  # (rows, cols) float32
    frame_rate: float

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float32)
        if self.data.ndim != 2:
            raise ValueError(f"matrix must be 2-D, got shape {self.data.shape}")
        if not self.frame_rate > 0:
            raise ValueError(f"frame_rate must be positive, got {self.frame_rate}")

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]


def write_matrix(matrix: RepresentationMatrix, path) -> None:
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, VERSION, matrix.rows, matrix.cols, matrix.frame_rate))
        f.write(matrix.data.tobytes())


def read_matrix(path) -> RepresentationMatrix:
    with open(path, "rb") as f:
        header = f.read(_HEADER.size)
        if len(header) < 4 or header[:4] != MAGIC:
            raise NotAMatrixFile(f"{path}: bad magic")
        if len(header) < _HEADER.size:
            raise TruncatedFile(f"{path}: header cut short")
        _, version, rows, cols, frame_rate = _HEADER.unpack(header)
        if version != VERSION:
            raise NotAMatrixFile(f"{path}: unsupported version {version}")
        if not frame_rate > 0:
            raise NotAMatrixFile(f"{path}: non-positive frame_rate {frame_rate}")
        payload = f.read(rows * cols * 4)
        if len(payload) != rows * cols * 4:
            raise TruncatedFile(f"{path}: payload has {len(payload)} bytes, expected {rows * cols * 4}")
    data = np.frombuffer(payload, dtype="<f4").reshape(rows, cols).copy()
    return RepresentationMatrix(data, frame_rate)
