import io
import wave

import numpy as np
import pytest

from termscope import (
    EmbeddingSequence,
    SpanOutOfRange,
    UnsupportedWav,
    frames_to_span,
    locate_and_extract,
    read_wav,
    slice_audio,
    write_wav,
)
from termscope.locate import slice_samples


def test_frames_to_span_examples():
    span = frames_to_span(100, 50, 0.02)
    assert span.start_sec == pytest.approx(2.0)
    assert span.end_sec == pytest.approx(3.0)
    span = frames_to_span(0, 1, 0.02)
    assert (span.start_sec, span.end_sec) == (0.0, pytest.approx(0.02))


def test_frames_to_span_inverse_identity():
    rng = np.random.default_rng(0)
    for _ in range(30):
        n = int(rng.integers(1, 500))
        d = float(rng.uniform(0.001, 0.1))
        span = frames_to_span(int(rng.integers(0, 100)), n, d)
        assert (span.end_sec - span.start_sec) / d == pytest.approx(n, abs=1e-6)


def test_frames_to_span_validation():
    with pytest.raises(ValueError):
        frames_to_span(-1, 5, 0.02)
    with pytest.raises(ValueError):
        frames_to_span(0, 0, 0.02)
    with pytest.raises(ValueError):
        frames_to_span(0, 5, 0.0)


def make_wav_bytes(samples, rate=16000, channels=1, width=2):
    buf = io.BytesIO()
    with wave.open(buf, "wb") as wav:
        wav.setnchannels(channels)
        wav.setsampwidth(width)
        wav.setframerate(rate)
        wav.writeframes(samples.tobytes())
    return buf.getvalue()


def test_wav_roundtrip(tmp_path):
    rng = np.random.default_rng(1)
    samples = rng.integers(-3000, 3000, 8000).astype(np.int16)
    path = tmp_path / "u.wav"
    write_wav(path, samples, 16000)
    got, rate = read_wav(path)
    assert rate == 16000
    assert np.array_equal(got, samples)


def test_read_wav_rejects_stereo_and_8bit():
    stereo = make_wav_bytes(np.zeros(100, dtype=np.int16), channels=2)
    with pytest.raises(UnsupportedWav):
        read_wav(stereo)
    eight_bit = make_wav_bytes(np.zeros(100, dtype=np.uint8), width=1)
    with pytest.raises(UnsupportedWav):
        read_wav(eight_bit)
    with pytest.raises(UnsupportedWav):
        read_wav(b"definitely not RIFF data")


def test_slice_whole_file_is_identity():
    rng = np.random.default_rng(2)
    samples = rng.integers(-3000, 3000, 16000).astype(np.int16)
    raw = make_wav_bytes(samples)
    span = frames_to_span(0, 50, 0.02)  # [0 s, 1 s)
    clip = slice_audio(raw, span)
    assert np.array_equal(clip.samples, samples)
    assert clip.sample_rate == 16000


def test_one_second_span_is_16000_samples():
    samples = np.zeros(32000, dtype=np.int16)
    span = frames_to_span(25, 50, 0.02)  # [0.5 s, 1.5 s)
    clip = slice_audio(make_wav_bytes(samples), span)
    assert len(clip.samples) == 16000
    assert clip.duration == pytest.approx(1.0)


def test_adjacent_spans_do_not_overlap_or_gap():
    samples = np.arange(32000, dtype=np.int16)
    raw = make_wav_bytes(samples)
    first = slice_audio(raw, frames_to_span(0, 37, 0.02))
    second = slice_audio(raw, frames_to_span(37, 25, 0.02))
    rejoined = np.concatenate([first.samples, second.samples])
    assert np.array_equal(rejoined, samples[: len(rejoined)])


def test_span_beyond_file_raises():
    raw = make_wav_bytes(np.zeros(8000, dtype=np.int16))  # 0.5 s
    with pytest.raises(SpanOutOfRange):
        slice_audio(raw, frames_to_span(0, 50, 0.02))


def test_slice_samples_round_half_up():
    samples = np.arange(100, dtype=np.int16)
    # 0.25 s at 10 Hz -> 2.5 rounds up to 3; 0.65 s -> 6.5 rounds up to 7
    out = slice_samples(samples, 10, 0.25, 0.65)
    assert out.tolist() == [3, 4, 5, 6]
    # 0.64 s -> 6.4 rounds down to 6
    assert slice_samples(samples, 10, 0.25, 0.64).tolist() == [3, 4, 5]


def test_locate_and_extract_planted_clip():
    rng = np.random.default_rng(3)
    clip = rng.uniform(0.1, 1.0, size=(10, 6)).astype(np.float32)
    clip[-1, 2] = 35.0
    u = rng.uniform(-1.0, -0.1, size=(200, 6)).astype(np.float32)
    u[40:50] = clip
    u_emb = EmbeddingSequence(u, frame_duration=0.02)
    c_emb = EmbeddingSequence(clip, frame_duration=0.02)
    samples = rng.integers(-3000, 3000, int(200 * 0.02 * 16000)).astype(np.int16)

    span, audio, window_emb, result = locate_and_extract(
        u_emb, make_wav_bytes(samples), c_emb, utterance_id="utt-0"
    )
    assert span.start_frame == 40
    assert span.start_sec == pytest.approx(0.80)
    assert span.utterance_id == "utt-0"
    assert np.array_equal(window_emb.data, u[40:50])
    assert np.array_equal(audio.samples, samples[12800 : 12800 + 3200])
    # audio duration agrees with the embedding span to within one sample
    assert abs(audio.duration - span.len_frames * 0.02) < 1.0 / audio.sample_rate
    assert result.score == pytest.approx(1.0, abs=1e-9)


def test_locate_and_extract_clamps_long_clip():
    rng = np.random.default_rng(4)
    u = rng.standard_normal((20, 4)).astype(np.float32)
    c = rng.standard_normal((50, 4)).astype(np.float32)
    samples = np.zeros(int(20 * 0.02 * 16000), dtype=np.int16)
    span, audio, window_emb, _ = locate_and_extract(
        EmbeddingSequence(u), make_wav_bytes(samples), EmbeddingSequence(c)
    )
    assert (span.start_frame, span.len_frames) == (0, 20)
    assert np.array_equal(window_emb.data, u)
    assert len(audio.samples) == len(samples)
