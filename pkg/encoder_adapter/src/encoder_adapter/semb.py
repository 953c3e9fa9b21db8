"""Writer (and verifying reader) for the .semb embedding interchange format.

Layout, all little-endian:

    bytes 0..3    magic  b"SEMB"
    bytes 4..7    uint32 version (1)
    bytes 8..11   uint32 dim
    bytes 12..15  uint32 frames
    bytes 16..19  uint32 frame duration in microseconds
    bytes 20..    frames * dim float32, row-major

This is implemented here independently of the consumer package so the
two sides only share the byte layout.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Union

import numpy as np

from .errors import AdapterError

MAGIC = b"SEMB"
VERSION = 1
_HEADER = struct.Struct("<4sIIII")


def encode_semb(features: np.ndarray, frame_duration: float) -> bytes:
    """Serialize a (frames, dim) float array to .semb bytes."""
    data = np.ascontiguousarray(features, dtype="<f4")
    if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
        raise AdapterError(f"features must be (frames, dim), got shape {data.shape}")
    if not np.isfinite(data).all():
        raise AdapterError("features contain non-finite values")
    duration_us = round(frame_duration * 1e6)
    if duration_us < 1:
        raise AdapterError(f"frame_duration too small: {frame_duration}")
    frames, dim = data.shape
    return _HEADER.pack(MAGIC, VERSION, dim, frames, duration_us) + data.tobytes()


def read_semb(path: Union[str, Path]) -> tuple[np.ndarray, float]:
    """Read and validate a .semb file; returns (features, frame_duration).

    Raises AdapterError with a reason on any malformation — used by
    `verify` to re-check emitted artifacts.
    """
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise AdapterError(f"truncated header ({len(raw)} bytes)")
    magic, version, dim, frames, duration_us = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise AdapterError(f"bad magic {magic!r}")
    if version != VERSION:
        raise AdapterError(f"unsupported version {version}")
    if dim < 1 or frames < 1 or duration_us < 1:
        raise AdapterError(
            f"invalid header fields (dim={dim}, frames={frames}, us={duration_us})"
        )
    expected = _HEADER.size + 4 * frames * dim
    if len(raw) != expected:
        raise AdapterError(f"payload is {len(raw)} bytes, expected {expected}")
    data = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size).reshape(frames, dim)
    if not np.isfinite(data).all():
        raise AdapterError("payload contains non-finite values")
    return data, duration_us / 1e6
