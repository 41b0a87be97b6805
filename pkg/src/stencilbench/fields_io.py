"""Initial-condition / field files.

Binary format: 16-byte header (magic "SWF1", u32 nx, u32 ny, u32
field-count, little-endian), then the fields as row-major little-endian
float32, interior cells only.  Small cases may use plain CSV (one file per
field, ny rows of nx comma-separated values).
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import ConfigError

MAGIC = b"SWF1"
_HEADER = struct.Struct("<4sIII")


def write_fields(path, fields: list[np.ndarray]) -> None:
    if not fields:
        raise ConfigError("need at least one field")
    ny, nx = fields[0].shape
    for f in fields:
        if f.shape != (ny, nx):
            raise ConfigError("all fields must have the same shape")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, nx, ny, len(fields)))
        for f in fields:
            fh.write(np.ascontiguousarray(f, dtype="<f4").tobytes())


def read_fields(path) -> list[np.ndarray]:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise ConfigError(f"{path}: truncated header")
        magic, nx, ny, count = _HEADER.unpack(head)
        if magic != MAGIC:
            raise ConfigError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
        fields = []
        want = nx * ny * 4
        for k in range(count):
            raw = fh.read(want)
            if len(raw) != want:
                raise ConfigError(f"{path}: field {k} truncated")
            fields.append(np.frombuffer(raw, dtype="<f4").reshape(ny, nx).copy())
    return fields


def read_field_csv(path) -> np.ndarray:
    try:
        arr = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except ValueError as exc:
        raise ConfigError(f"{path}: not a numeric CSV field ({exc})") from exc
    return arr.astype(np.float32)


def write_field_csv(path, field: np.ndarray) -> None:
    np.savetxt(path, np.asarray(field), delimiter=",", fmt="%.9g")
