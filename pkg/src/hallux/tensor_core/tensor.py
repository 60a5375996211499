"""Dense float32 tensor value type and the HLXT binary file format."""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import TensorError

HLXT_MAGIC = b"HLXT"
HLXT_VERSION = 1
_F32 = np.dtype("<f4")
_DTYPE_CODES = {0: _F32}


class Tensor:
    """Immutable n-dimensional float32 array with row-major storage.

    In checked mode (the default) NaN or Inf values are rejected at
    construction time.
    """

    __slots__ = ("_data",)

    def __init__(self, values, checked: bool = True):
        arr = np.ascontiguousarray(values, dtype=np.float32)
        if checked and not np.all(np.isfinite(arr)):
            raise TensorError("tensor contains NaN or Inf values")
        arr.setflags(write=False)
        self._data = arr

    @property
    def shape(self) -> tuple[int, ...]:
        return self._data.shape

    @property
    def ndim(self) -> int:
        return self._data.ndim

    @property
    def size(self) -> int:
        return self._data.size

    @property
    def data(self) -> np.ndarray:
        """Read-only numpy view of the payload."""
        return self._data

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._data
        return self._data.astype(dtype)

    def tolist(self):
        return self._data.tolist()

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Tensor):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self._data, other._data)

    def __hash__(self):
        return hash((self.shape, self._data.tobytes()))

    # -- HLXT serialization ------------------------------------------------

    def to_bytes(self) -> bytes:
        header = HLXT_MAGIC + struct.pack("<HBB", HLXT_VERSION, 0, self.ndim)
        header += b"".join(struct.pack("<Q", d) for d in self.shape)
        return header + self._data.astype(_F32, copy=False).tobytes(order="C")

    @classmethod
    def from_bytes(cls, blob: bytes, checked: bool = True) -> "Tensor":
        if len(blob) < 8 or blob[:4] != HLXT_MAGIC:
            raise TensorError("not an HLXT blob (bad magic)")
        version, dtype_code, ndim = struct.unpack_from("<HBB", blob, 4)
        if version != HLXT_VERSION:
            raise TensorError(f"unsupported HLXT version {version}")
        if dtype_code not in _DTYPE_CODES:
            raise TensorError(f"unsupported HLXT dtype code {dtype_code}")
        offset = 8
        shape = []
        for _ in range(ndim):
            (dim,) = struct.unpack_from("<Q", blob, offset)
            shape.append(int(dim))
            offset += 8
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        payload = blob[offset:]
        expected = count * 4
        if len(payload) != expected:
            raise TensorError(
                f"HLXT payload length {len(payload)} != expected {expected}"
            )
        arr = np.frombuffer(payload, dtype=_DTYPE_CODES[dtype_code]).reshape(shape)
        return cls(arr, checked=checked)

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path, checked: bool = True) -> "Tensor":
        return cls.from_bytes(Path(path).read_bytes(), checked=checked)


def as_array(value, dtype=np.float32) -> np.ndarray:
    """Coerce a Tensor, ndarray, or nested sequence into an ndarray."""
    if isinstance(value, Tensor):
        return value.data.astype(dtype, copy=False)
    return np.asarray(value, dtype=dtype)
