import io
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from termscope import (
    BadMagic,
    BadVersion,
    DuplicateId,
    EmbeddingSequence,
    NonFiniteValue,
    TruncatedData,
    read_embeddings,
    write_embeddings,
)
from termscope.embeddings import HEADER_SIZE, parse_manifest


def make_seq(frames=3, dim=2, frame_duration=0.02, fill=None):
    data = np.arange(frames * dim, dtype=np.float32).reshape(frames, dim)
    if fill is not None:
        data[:] = fill
    return EmbeddingSequence(data, frame_duration=frame_duration)


def roundtrip_bytes(seq):
    buf = io.BytesIO()
    write_embeddings(seq, buf)
    return buf.getvalue()


def test_byte_count_matches_format():
    seq = make_seq(frames=3, dim=2)
    buf = io.BytesIO()
    assert write_embeddings(seq, buf) == 44  # 20 header + 24 payload
    assert len(buf.getvalue()) == 44


def test_header_fields():
    raw = roundtrip_bytes(make_seq(frames=3, dim=2, frame_duration=0.02))
    magic, version, dim, frames, duration_us = struct.unpack("<4sIIII", raw[:20])
    assert magic == b"SEMB"
    assert version == 1
    assert (dim, frames) == (2, 3)
    assert duration_us == 20000


def test_roundtrip_is_exact():
    seq = make_seq(frames=5, dim=4, frame_duration=0.0125)
    got = read_embeddings(roundtrip_bytes(seq))
    assert got == seq
    assert got.frame_duration == seq.frame_duration


def test_file_roundtrip(tmp_path):
    seq = make_seq(frames=7, dim=3)
    path = tmp_path / "u.semb"
    n = write_embeddings(seq, path)
    assert path.stat().st_size == n
    assert read_embeddings(path) == seq


@settings(max_examples=60, deadline=None)
@given(
    data=hnp.arrays(
        dtype=np.float32,
        shape=st.tuples(st.integers(1, 8), st.integers(1, 6)),
        elements=st.floats(
            allow_nan=False, allow_infinity=False, width=32, min_value=-1e6, max_value=1e6
        ),
    ),
    duration_us=st.integers(1, 10_000_000),
)
def test_roundtrip_property(data, duration_us):
    seq = EmbeddingSequence(data, frame_duration=duration_us / 1e6)
    raw = roundtrip_bytes(seq)
    assert len(raw) == HEADER_SIZE + 4 * seq.frames * seq.dim
    got = read_embeddings(raw)
    assert got == seq


def test_bad_magic():
    raw = b"XXXX" + roundtrip_bytes(make_seq())[4:]
    with pytest.raises(BadMagic) as err:
        read_embeddings(raw)
    assert err.value.offset == 0


def test_bad_version():
    raw = bytearray(roundtrip_bytes(make_seq()))
    raw[4:8] = struct.pack("<I", 2)
    with pytest.raises(BadVersion) as err:
        read_embeddings(bytes(raw))
    assert err.value.offset == 4


def test_truncated_header():
    with pytest.raises(TruncatedData) as err:
        read_embeddings(roundtrip_bytes(make_seq())[:11])
    assert err.value.offset == 11


def test_truncated_payload():
    raw = roundtrip_bytes(make_seq(frames=3, dim=2))
    with pytest.raises(TruncatedData) as err:
        read_embeddings(raw[:-5])
    assert err.value.offset == len(raw) - 5


def test_trailing_bytes_rejected():
    raw = roundtrip_bytes(make_seq(frames=3, dim=2))
    with pytest.raises(TruncatedData) as err:
        read_embeddings(raw + b"\x00")
    assert err.value.offset == len(raw)


def test_non_finite_payload():
    raw = bytearray(roundtrip_bytes(make_seq(frames=3, dim=2)))
    # poison element 3 (row 1, col 1)
    raw[HEADER_SIZE + 4 * 3 : HEADER_SIZE + 4 * 4] = struct.pack("<f", np.nan)
    with pytest.raises(NonFiniteValue) as err:
        read_embeddings(bytes(raw))
    assert err.value.offset == HEADER_SIZE + 4 * 3


def test_sequence_validation():
    with pytest.raises(ValueError):
        EmbeddingSequence(np.zeros((0, 4), dtype=np.float32))
    with pytest.raises(ValueError):
        EmbeddingSequence(np.zeros(8, dtype=np.float32))
    with pytest.raises(ValueError):
        EmbeddingSequence(np.array([[np.inf]], dtype=np.float32))
    with pytest.raises(ValueError):
        EmbeddingSequence(np.ones((2, 2), dtype=np.float32), frame_duration=0.0)
    with pytest.raises(ValueError):
        EmbeddingSequence(np.ones((2, 2), dtype=np.float32), frame_duration=4e-7)


def test_duration_snaps_to_microseconds():
    seq = EmbeddingSequence(np.ones((1, 1), dtype=np.float32), frame_duration=0.02)
    assert seq.frame_duration == 0.02
    assert seq.duration == 0.02


MANIFEST_LINES = [
    '{"id": "u1", "kind": "utterance", "emb_path": "u1.semb", "audio_path": "u1.wav"}',
    '{"id": "c1", "kind": "clip", "emb_path": "c1.semb", "transcript": "hi", "extra": 1}',
    "",
]


def test_parse_manifest():
    entries = parse_manifest(MANIFEST_LINES)
    assert [e.id for e in entries] == ["u1", "c1"]
    assert entries[0].audio_path == "u1.wav"
    assert entries[1].transcript == "hi"  # unknown field "extra" ignored


def test_parse_manifest_duplicate_id():
    lines = [MANIFEST_LINES[0], MANIFEST_LINES[0]]
    with pytest.raises(DuplicateId):
        parse_manifest(lines)


@pytest.mark.parametrize(
    "line",
    [
        '{"kind": "utterance", "emb_path": "x"}',
        '{"id": "a", "emb_path": "x"}',
        '{"id": "a", "kind": "speech", "emb_path": "x"}',
        "not json",
    ],
)
def test_parse_manifest_rejects_bad_lines(line):
    with pytest.raises(ValueError):
        parse_manifest([line])
