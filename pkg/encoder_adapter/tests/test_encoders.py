import numpy as np
import pytest

from encoder_adapter import EncoderUnavailable, LogMelEncoder, frame_budget, get_encoder
from encoder_adapter.semb import encode_semb, read_semb

from .conftest import tone


def test_frame_budget_rounds_half_up():
    # 20 ms frames at 16 kHz
    assert frame_budget(16000, 16000, 0.02) == 50
    assert frame_budget(480000, 16000, 0.02) == 1500
    assert frame_budget(4000, 16000, 0.02) == 13  # 12.5 -> 13
    assert frame_budget(1, 16000, 0.02) == 1  # never zero


def test_logmel_shape_matches_budget():
    enc = LogMelEncoder()
    for duration in (0.25, 0.4, 1.0, 1.6):
        samples = tone(duration)
        feats = enc.encode(samples, 16000)
        assert feats.shape == (frame_budget(len(samples), 16000, 0.02), 80)
        assert feats.dtype == np.float32
        assert np.isfinite(feats).all()


def test_logmel_long_input_frame_count():
    feats = LogMelEncoder().encode(tone(30.0), 16000)
    assert feats.shape[0] == 1500


def test_logmel_is_deterministic():
    enc = LogMelEncoder()
    samples = tone(0.7)
    a = enc.encode(samples, 16000)
    b = enc.encode(samples, 16000)
    assert a.tobytes() == b.tobytes()


def test_logmel_other_sample_rate():
    # 8 kHz: hop 160 samples, same 20 ms grid
    samples = tone(0.5, rate=8000)
    feats = LogMelEncoder().encode(samples, 8000)
    assert feats.shape == (25, 80)


def test_logmel_output_survives_semb_round_trip(tmp_path):
    feats = LogMelEncoder().encode(tone(0.3), 16000)
    path = tmp_path / "x.semb"
    path.write_bytes(encode_semb(feats, 0.02))
    back, fd = read_semb(path)
    assert fd == pytest.approx(0.02)
    assert back.tobytes() == feats.tobytes()


def test_get_encoder_logmel():
    enc = get_encoder("logmel")
    assert enc.id == "logmel"
    assert enc.dim == 80
    assert enc.frame_duration == pytest.approx(0.02)


def test_get_encoder_unknown_id():
    with pytest.raises(EncoderUnavailable):
        get_encoder("wavlm")


def test_whisper_encoder_missing_model_fails_fast():
    # A local path that doesn't exist must not fall back to a network fetch.
    with pytest.raises(EncoderUnavailable):
        get_encoder("whisper:/nonexistent-model-dir")
