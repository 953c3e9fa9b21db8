"""Turn best-window frame indices into time spans and audio slices.

The retrieval core answers "the clip sits at frames [i, i+L)"; this
module converts that into seconds, cuts the matching samples out of the
utterance WAV, and hands back the embedded rows of the window so the
knowledge triplet can be re-anchored to speech from the actual utterance.

Only PCM-16 mono WAV is handled; anything else is the producer's job to
convert first.
"""

from __future__ import annotations

import io
import wave
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .embeddings import EmbeddingSequence
from .errors import SpanOutOfRange, UnsupportedWav
from .retrieval import SimilarityResult, sliding_sim


@dataclass(frozen=True)
class LocatedSpan:
    """A window of an utterance, in both frame and time coordinates."""

    start_frame: int
    len_frames: int
    start_sec: float
    end_sec: float
    utterance_id: str = ""

    def __post_init__(self):
        if self.start_frame < 0:
            raise ValueError(f"start_frame must be >= 0, got {self.start_frame}")
        if self.len_frames < 1:
            raise ValueError(f"len_frames must be >= 1, got {self.len_frames}")


@dataclass(frozen=True)
class AudioClip:
    """PCM-16 mono samples cut from a source utterance."""

    samples: np.ndarray  # int16, 1-D
    sample_rate: int
    source_span: LocatedSpan

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


def frames_to_span(
    start_frame: int,
    len_frames: int,
    frame_duration: float,
    utterance_id: str = "",
) -> LocatedSpan:
    """Frame window -> seconds: [start*d, (start+len)*d)."""
    if frame_duration <= 0:
        raise ValueError(f"frame_duration must be > 0, got {frame_duration}")
    return LocatedSpan(
        start_frame=start_frame,
        len_frames=len_frames,
        start_sec=start_frame * frame_duration,
        end_sec=(start_frame + len_frames) * frame_duration,
        utterance_id=utterance_id,
    )


def read_wav(source: Union[str, Path, bytes]) -> tuple[np.ndarray, int]:
    """Read a PCM-16 mono WAV; returns (int16 samples, sample_rate)."""
    if isinstance(source, bytes):
        fh = io.BytesIO(source)
    else:
        fh = open(source, "rb")
    try:
        try:
            with wave.open(fh, "rb") as wav:
                channels = wav.getnchannels()
                width = wav.getsampwidth()
                comptype = wav.getcomptype()
                rate = wav.getframerate()
                raw = wav.readframes(wav.getnframes())
        except wave.Error as exc:
            raise UnsupportedWav(f"not a readable WAV file: {exc}") from exc
    finally:
        fh.close()
    if comptype != "NONE":
        raise UnsupportedWav(f"compressed WAV ({comptype}) not supported")
    if width != 2:
        raise UnsupportedWav(f"only 16-bit PCM supported, got {8 * width}-bit")
    if channels != 1:
        raise UnsupportedWav(f"only mono supported, got {channels} channels")
    return np.frombuffer(raw, dtype="<i2"), rate


def write_wav(path: Union[str, Path], samples: np.ndarray, sample_rate: int) -> None:
    """Write int16 mono samples as a PCM-16 WAV file."""
    samples = np.ascontiguousarray(samples, dtype="<i2")
    # open the file ourselves: wave.open(name) raising mid-construction
    # leaves a half-built Wave_write whose __del__ prints a traceback
    with open(path, "wb") as fh, wave.open(fh, "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(sample_rate)
        wav.writeframes(samples.tobytes())


def _sample_index(seconds: float, sample_rate: int) -> int:
    # round-half-up keeps adjacent spans gap- and overlap-free
    return int(np.floor(seconds * sample_rate + 0.5))


def slice_samples(
    samples: np.ndarray, sample_rate: int, start_sec: float, end_sec: float
) -> np.ndarray:
    """Samples [round(start*sr), round(end*sr)) of a loaded waveform."""
    lo = _sample_index(start_sec, sample_rate)
    hi = _sample_index(end_sec, sample_rate)
    if lo < 0 or hi > len(samples) or hi < lo:
        raise SpanOutOfRange(
            f"span [{start_sec:.6f}s, {end_sec:.6f}s) maps to samples "
            f"[{lo}, {hi}) but file has {len(samples)}"
        )
    return samples[lo:hi].copy()


def slice_audio(
    source: Union[str, Path, bytes, tuple[np.ndarray, int]],
    span: LocatedSpan,
) -> AudioClip:
    """Cut samples [round(start*sr), round(end*sr)) out of an utterance WAV."""
    if isinstance(source, tuple):
        samples, rate = source
    else:
        samples, rate = read_wav(source)
    return AudioClip(
        samples=slice_samples(samples, rate, span.start_sec, span.end_sec),
        sample_rate=rate,
        source_span=span,
    )


def locate_and_extract(
    utterance_emb: EmbeddingSequence,
    utterance_wav: Union[str, Path, bytes, tuple[np.ndarray, int]],
    clip_emb: EmbeddingSequence,
    utterance_id: str = "",
) -> tuple[LocatedSpan, AudioClip, EmbeddingSequence, SimilarityResult]:
    """Find the clip inside the utterance and extract the matching window.

    Returns the located span, its audio slice, the utterance embedding
    rows the window covers (for re-anchoring the knowledge triplet), and
    the raw similarity result.
    """
    result = sliding_sim(utterance_emb, clip_emb)
    span = frames_to_span(
        result.best_window_start,
        result.window_len,
        utterance_emb.frame_duration,
        utterance_id=utterance_id,
    )
    audio = slice_audio(utterance_wav, span)
    window_rows = utterance_emb.data[
        span.start_frame : span.start_frame + span.len_frames
    ]
    window_emb = EmbeddingSequence(
        window_rows.copy(), frame_duration=utterance_emb.frame_duration
    )
    return span, audio, window_emb, result
