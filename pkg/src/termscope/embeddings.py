"""Binary interchange format (.semb) for encoder embedding sequences.

Layout, all little-endian:

    bytes 0..3    magic ``SEMB``
    bytes 4..7    format version (uint32, currently 1)
    bytes 8..11   dim (uint32)
    bytes 12..15  frames (uint32)
    bytes 16..19  frame duration in integer microseconds (uint32)
    bytes 20..    frames * dim float32 values, row major

Frame duration is stored as integer microseconds so headers round-trip
bit-exactly across producers. Non-finite payload values are rejected on
read; everything downstream assumes finite inputs.
"""

from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Union

import numpy as np

from .errors import (
    BadMagic,
    BadVersion,
    DuplicateId,
    NonFiniteValue,
    TruncatedData,
)

MAGIC = b"SEMB"
VERSION = 1
_HEADER = struct.Struct("<4sIIII")
HEADER_SIZE = _HEADER.size  # 20 bytes

Source = Union[str, Path, BinaryIO, bytes]
Sink = Union[str, Path, BinaryIO]


class EmbeddingSequence:
    """A frames x dim float32 matrix of encoder states for one audio.

    ``frame_duration`` is the seconds of audio one row represents
    (0.02 s for the reference encoder). It must be an exact multiple of
    one microsecond; the file header cannot carry finer resolution.
    """

    __slots__ = ("data", "frame_duration")

    def __init__(self, data: np.ndarray, frame_duration: float = 0.02):
        data = np.ascontiguousarray(data, dtype=np.float32)
        if data.ndim != 2:
            raise ValueError(f"data must be 2-D (frames, dim), got shape {data.shape}")
        frames, dim = data.shape
        if frames < 1 or dim < 1:
            raise ValueError(f"frames and dim must be >= 1, got {frames}x{dim}")
        if not np.isfinite(data).all():
            bad = int(np.flatnonzero(~np.isfinite(data))[0])
            raise ValueError(f"non-finite value at flat index {bad}")
        if not frame_duration > 0:
            raise ValueError(f"frame_duration must be > 0, got {frame_duration}")
        duration_us = round(frame_duration * 1e6)
        if duration_us < 1:
            raise ValueError("frame_duration below 1 microsecond cannot be stored")
        self.data = data
        # snap to the microsecond grid the header carries, so write/read
        # round-trips are exact for every constructible sequence
        self.frame_duration = duration_us / 1e6

    @property
    def frames(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    @property
    def duration(self) -> float:
        """Total seconds covered by the sequence."""
        return self.frames * self.frame_duration

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EmbeddingSequence):
            return NotImplemented
        return (
            self.frame_duration == other.frame_duration
            and self.data.shape == other.data.shape
            and bool(np.array_equal(self.data, other.data))
        )

    def __repr__(self) -> str:
        return (
            f"EmbeddingSequence(frames={self.frames}, dim={self.dim}, "
            f"frame_duration={self.frame_duration})"
        )


def write_embeddings(seq: EmbeddingSequence, sink: Sink) -> int:
    """Write ``seq`` to ``sink`` (path or binary file object).

    Returns the total number of bytes written: 20 + 4 * frames * dim.
    """
    duration_us = int(round(seq.frame_duration * 1e6))
    header = _HEADER.pack(MAGIC, VERSION, seq.dim, seq.frames, duration_us)
    payload = seq.data.astype("<f4", copy=False).tobytes()
    if isinstance(sink, (str, Path)):
        with open(sink, "wb") as fh:
            fh.write(header)
            fh.write(payload)
    else:
        sink.write(header)
        sink.write(payload)
    return HEADER_SIZE + len(payload)


def read_embeddings(source: Source) -> EmbeddingSequence:
    """Read a .semb file (path, binary file object, or raw bytes).

    Raises BadMagic / BadVersion / TruncatedData / NonFiniteValue, each
    carrying the byte offset of the offending field.
    """
    if isinstance(source, (str, Path)):
        with open(source, "rb") as fh:
            raw = fh.read()
    elif isinstance(source, bytes):
        raw = source
    else:
        raw = source.read()

    if len(raw) < HEADER_SIZE:
        raise TruncatedData(
            f"file ends inside the header ({len(raw)} of {HEADER_SIZE} bytes)",
            offset=len(raw),
        )
    magic, version, dim, frames, duration_us = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise BadMagic(f"expected magic {MAGIC!r}, found {magic!r}", offset=0)
    if version != VERSION:
        raise BadVersion(f"unsupported format version {version}", offset=4)
    if dim == 0 or frames == 0:
        raise BadVersion(f"header declares empty matrix {frames}x{dim}", offset=8)
    if duration_us == 0:
        raise BadVersion("header declares zero frame duration", offset=16)

    expected = HEADER_SIZE + 4 * frames * dim
    if len(raw) < expected:
        raise TruncatedData(
            f"payload ends early ({len(raw)} of {expected} bytes)", offset=len(raw)
        )
    if len(raw) > expected:
        raise TruncatedData(
            f"{len(raw) - expected} trailing bytes after payload", offset=expected
        )

    data = np.frombuffer(raw, dtype="<f4", count=frames * dim, offset=HEADER_SIZE)
    finite = np.isfinite(data)
    if not finite.all():
        bad = int(np.flatnonzero(~finite)[0])
        raise NonFiniteValue(
            f"non-finite value at element {bad}", offset=HEADER_SIZE + 4 * bad
        )
    data = data.reshape(frames, dim).copy()
    return EmbeddingSequence(data, frame_duration=duration_us / 1e6)


@dataclass
class ManifestEntry:
    """One line of an embedding manifest (JSONL, unknown fields ignored)."""

    id: str
    kind: str  # "utterance" or "clip"
    emb_path: str
    audio_path: str | None = None
    transcript: str | None = None

    def resolve_emb(self, root: Path) -> Path:
        return root / self.emb_path

    def resolve_audio(self, root: Path) -> Path | None:
        return root / self.audio_path if self.audio_path else None


KINDS = ("utterance", "clip")


def parse_manifest(lines, *, source: str = "<manifest>") -> list[ManifestEntry]:
    """Parse manifest JSONL lines into entries, enforcing unique ids."""
    entries: list[ManifestEntry] = []
    seen: set[str] = set()
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{source}:{lineno}: invalid JSON: {exc}") from exc
        for field in ("id", "kind", "emb_path"):
            if field not in row:
                raise ValueError(f"{source}:{lineno}: missing field {field!r}")
        if row["kind"] not in KINDS:
            raise ValueError(f"{source}:{lineno}: unknown kind {row['kind']!r}")
        if row["id"] in seen:
            raise DuplicateId(f"{source}:{lineno}: duplicate id {row['id']!r}")
        seen.add(row["id"])
        entries.append(
            ManifestEntry(
                id=row["id"],
                kind=row["kind"],
                emb_path=row["emb_path"],
                audio_path=row.get("audio_path"),
                transcript=row.get("transcript"),
            )
        )
    return entries


def load_manifest(path: str | Path) -> list[ManifestEntry]:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        return parse_manifest(fh, source=str(path))


def dumps_embeddings(seq: EmbeddingSequence) -> bytes:
    """Serialize to bytes (same layout write_embeddings emits)."""
    buf = io.BytesIO()
    write_embeddings(seq, buf)
    return buf.getvalue()
