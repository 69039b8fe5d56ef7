"""ARTN tensor container: little-endian, float64 payloads only.

Layout::

    magic "ARTN" | version u32 | tensor_count u32
    per tensor: name_len u32 | UTF-8 name | dtype u8 | ndim u8 | dims u64 * ndim
                | row-major <f8 payload
"""

from __future__ import annotations

import logging
import math
import struct
from collections.abc import Iterable, Mapping
from pathlib import Path

import numpy as np

from ..const import CONTAINER_MAGIC, CONTAINER_VERSION, DTYPE_FLOAT64
from ..exceptions import (
    ArsvdIOError,
    BadMagicError,
    ContainerError,
    ContractViolationError,
    DuplicateTensorError,
    PayloadMismatchError,
    TruncatedContainerError,
    UnsupportedDtypeError,
    UnsupportedVersionError,
)

_LOGGER = logging.getLogger(__name__)

_HEADER = struct.Struct("<4sII")
_NAME_LEN = struct.Struct("<I")
_TENSOR_META = struct.Struct("<BB")
_DIM = struct.Struct("<Q")
_PAYLOAD_DTYPE = np.dtype("<f8")

Tensors = Mapping[str, np.ndarray] | Iterable[tuple[str, np.ndarray]]


def _items(tensors: Tensors) -> list[tuple[str, np.ndarray]]:
    pairs = list(tensors.items() if isinstance(tensors, Mapping) else tensors)
    seen: set[str] = set()
    for name, _ in pairs:
        if name in seen:
            raise DuplicateTensorError(f"Tensor name {name!r} appears twice")
        seen.add(name)
    return pairs


def tensor_record_size(name: str, shape: tuple[int, ...]) -> int:
    """Return the bytes one tensor occupies in a container."""
    return (
        _NAME_LEN.size
        + len(name.encode("utf-8"))
        + _TENSOR_META.size
        + _DIM.size * len(shape)
        + _PAYLOAD_DTYPE.itemsize * math.prod(shape)
    )


def encode_container(tensors: Tensors) -> bytes:
    """Serialize named tensors in the given order."""
    pairs = _items(tensors)
    chunks = [_HEADER.pack(CONTAINER_MAGIC, CONTAINER_VERSION, len(pairs))]
    for name, tensor in pairs:
        if not name:
            raise ContractViolationError("Tensor names must be non-empty")
        array = np.asarray(tensor)
        if array.dtype.kind not in "fiu":
            raise UnsupportedDtypeError(
                f"Tensor {name!r} has dtype {array.dtype}, only real values are stored"
            )
        if array.ndim > 255:
            raise ContractViolationError(f"Tensor {name!r} has too many dimensions")
        encoded = name.encode("utf-8")
        chunks.append(_NAME_LEN.pack(len(encoded)))
        chunks.append(encoded)
        chunks.append(_TENSOR_META.pack(DTYPE_FLOAT64, array.ndim))
        chunks.extend(_DIM.pack(dim) for dim in array.shape)
        chunks.append(np.ascontiguousarray(array, dtype=_PAYLOAD_DTYPE).tobytes())
    return b"".join(chunks)


class _Reader:
    """Bounds-checked cursor over container bytes."""

    def __init__(self, data: bytes) -> None:
        self._data = memoryview(data)
        self.offset = 0

    def take(self, size: int, what: str) -> memoryview:
        end = self.offset + size
        if end > len(self._data):
            raise TruncatedContainerError(
                f"Container ends at byte {len(self._data)} while reading {what} "
                f"({size} bytes at offset {self.offset})"
            )
        chunk = self._data[self.offset : end]
        self.offset = end
        return chunk

    def unpack(self, fmt: struct.Struct, what: str) -> tuple:
        return fmt.unpack(self.take(fmt.size, what))

    @property
    def remaining(self) -> int:
        return len(self._data) - self.offset


def decode_container(data: bytes) -> dict[str, np.ndarray]:
    """Parse container bytes into named read-only float64 arrays, in file order."""
    reader = _Reader(data)
    magic, version, count = reader.unpack(_HEADER, "header")
    if magic != CONTAINER_MAGIC:
        raise BadMagicError(f"Expected magic {CONTAINER_MAGIC!r}, found {magic!r}")
    if version != CONTAINER_VERSION:
        raise UnsupportedVersionError(
            f"Container version {version} is not supported "
            f"(this reader handles {CONTAINER_VERSION})"
        )

    tensors: dict[str, np.ndarray] = {}
    for index in range(count):
        (name_len,) = reader.unpack(_NAME_LEN, f"name length of tensor {index}")
        if name_len == 0:
            raise ContainerError(f"Tensor {index} has an empty name")
        try:
            name = bytes(reader.take(name_len, f"name of tensor {index}")).decode(
                "utf-8"
            )
        except UnicodeDecodeError as exc:
            raise ContainerError(f"Name of tensor {index} is not valid UTF-8") from exc
        if name in tensors:
            raise DuplicateTensorError(f"Tensor name {name!r} appears twice")
        dtype, ndim = reader.unpack(_TENSOR_META, f"dtype of {name!r}")
        if dtype != DTYPE_FLOAT64:
            raise UnsupportedDtypeError(f"Tensor {name!r} has dtype code {dtype}")
        shape = tuple(
            reader.unpack(_DIM, f"dims of {name!r}")[0] for _ in range(ndim)
        )
        size = math.prod(shape) * _PAYLOAD_DTYPE.itemsize
        if size > reader.remaining:
            raise TruncatedContainerError(
                f"Tensor {name!r} declares {size} payload bytes, "
                f"{reader.remaining} remain"
            )
        payload = reader.take(size, f"payload of {name!r}")
        array = np.frombuffer(payload, dtype=_PAYLOAD_DTYPE).astype(np.float64)
        array = array.reshape(shape)
        array.flags.writeable = False
        tensors[name] = array

    if reader.remaining:
        raise PayloadMismatchError(
            f"{reader.remaining} bytes follow the last declared tensor"
        )
    return tensors


def write_container(path: str | Path, tensors: Tensors) -> int:
    """Write named tensors to ``path`` and return the file size."""
    data = encode_container(tensors)
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise ArsvdIOError(f"Cannot write container {path}: {exc}") from exc
    _LOGGER.debug("Wrote %d bytes to %s", len(data), path)
    return len(data)


def read_container(path: str | Path) -> dict[str, np.ndarray]:
    """Read every tensor of the container at ``path``."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ArsvdIOError(f"Cannot read container {path}: {exc}") from exc
    return decode_container(data)
