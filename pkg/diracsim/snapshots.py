"""DSPN binary snapshots.

Layout, little-endian throughout::

    b"DSPN" | version u32 | d u32 | ncomp u32 | M_1 .. M_d u32 | t f64 | data

``data`` holds (re, im) f64 pairs with the component index fastest, then x,
then y, then z. Grid bounds are not stored; readers supply the grid.
"""

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from diracsim.errors import SnapshotFormatError
from diracsim.fields import SpinorField
from diracsim.grid import PeriodicGrid

MAGIC = b"DSPN"
VERSION = 1


@dataclass
class Snapshot:
    t: float
    d: int
    ncomp: int
    shape: tuple[int, ...]
    data: np.ndarray

    def to_field(self, grid: PeriodicGrid) -> SpinorField:
        if grid.shape != self.shape:
            raise SnapshotFormatError(f"snapshot shape {self.shape} does not match grid shape {grid.shape}")
        return SpinorField(grid, self.data)


def _file_order(d: int) -> tuple[int, ...]:
    return tuple(reversed(range(d))) + (d,)


def encode_snapshot(field: SpinorField, t: float) -> bytes:
    d = field.grid.d
    header = MAGIC + struct.pack("<III", VERSION, d, field.ncomp)
    header += struct.pack(f"<{d}I", *field.grid.shape)
    header += struct.pack("<d", float(t))
    payload = np.ascontiguousarray(field.data.transpose(_file_order(d))).astype("<c16")
    return header + payload.tobytes()


def decode_snapshot(raw: bytes) -> Snapshot:
    if len(raw) < 16 or raw[:4] != MAGIC:
        raise SnapshotFormatError("not a DSPN snapshot")
    version, d, ncomp = struct.unpack_from("<III", raw, 4)
    if version != VERSION:
        raise SnapshotFormatError(f"unsupported snapshot version {version}")
    if d not in (1, 2, 3) or ncomp not in (2, 4):
        raise SnapshotFormatError(f"invalid snapshot header d={d} ncomp={ncomp}")

    offset = 16
    if len(raw) < offset + 4 * d + 8:
        raise SnapshotFormatError("truncated snapshot header")
    shape = struct.unpack_from(f"<{d}I", raw, offset)
    offset += 4 * d
    (t,) = struct.unpack_from("<d", raw, offset)
    offset += 8

    count = int(np.prod(shape)) * ncomp
    if len(raw) - offset != 16 * count:
        raise SnapshotFormatError(f"expected {16 * count} payload bytes, found {len(raw) - offset}")
    flat = np.frombuffer(raw, dtype="<c16", count=count, offset=offset)
    stored = flat.reshape(tuple(reversed(shape)) + (ncomp,))
    data = np.ascontiguousarray(stored.transpose(_file_order(d))).astype(np.complex128)
    return Snapshot(t=t, d=d, ncomp=ncomp, shape=tuple(shape), data=data)


def write_snapshot(path: str | Path, field: SpinorField, t: float) -> Path:
    path = Path(path)
    path.write_bytes(encode_snapshot(field, t))
    return path


def read_snapshot(path: str | Path) -> Snapshot:
    return decode_snapshot(Path(path).read_bytes())
