import wave

import numpy as np
import pytest


def write_wav(path, samples, rate=16000):
    samples = np.asarray(samples, dtype=np.int16)
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(rate)
        fh.writeframes(samples.tobytes())


def tone(duration, rate=16000, freq=440.0, seed=0):
    """A sine with a little noise — enough structure for log-mel tests."""
    rng = np.random.default_rng(seed)
    t = np.arange(round(duration * rate)) / rate
    x = 0.4 * np.sin(2 * np.pi * freq * t) + 0.01 * rng.standard_normal(len(t))
    return (x * 32767).clip(-32768, 32767).astype(np.int16)


@pytest.fixture
def wav_dir(tmp_path):
    """Three short WAVs of different lengths, one with a transcript sidecar."""
    d = tmp_path / "wavs"
    d.mkdir()
    write_wav(d / "a.wav", tone(0.3, seed=1))
    write_wav(d / "b.wav", tone(0.5, seed=2))
    write_wav(d / "c.wav", tone(1.0, seed=3))
    (d / "b.txt").write_text("das ist ein Test\n", encoding="utf-8")
    return d
