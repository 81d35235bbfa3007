"""Binary field dumps: ``F1D0`` magic, u32 n, f64 L, then n little-endian f64 samples.

A JSON ``.meta`` file sits next to each dump.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .grid import Field, Grid

MAGIC = b"F1D0"
_HEADER = struct.Struct("<4sId")


def meta_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta")


def write_field(path, f: Field, meta: dict | None = None) -> Path:
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, f.grid.n, float(f.grid.L)))
        fh.write(np.asarray(f.values, dtype="<f8").tobytes())
    info = {"n": f.grid.n, "L": f.grid.L, **(meta or {})}
    meta_path(path).write_text(json.dumps(info, sort_keys=True, indent=2) + "\n")
    return path


def read_field(path) -> Field:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except FileNotFoundError:
        raise ConfigurationError(f"field dump not found: {path}") from None
    if len(raw) < _HEADER.size:
        raise ConfigurationError(f"{path}: truncated header")
    magic, n, L = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ConfigurationError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    body = raw[_HEADER.size :]
    if len(body) != 8 * n:
        raise ConfigurationError(f"{path}: expected {n} samples, found {len(body) / 8:g}")
    return Field(Grid(L, n), np.frombuffer(body, dtype="<f8"))
