"""Speech encoders: WAV samples in, (frames, dim) features out.

The built-in ``logmel`` encoder is a plain log mel filterbank — fully
deterministic, no weights, no optional dependencies — which is enough
to produce real interchange files and drive the retrieval stack.
``whisper:<model_id>`` runs a pretrained Whisper encoder instead when
``transformers`` and ``torch`` are installed and the weights are
reachable.

Every encoder trims its output to the frame budget implied by the true
audio duration, so padding added for windowing/chunking never leaks
into the emitted features.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import EncoderUnavailable, UnsupportedAudio


def frame_budget(n_samples: int, sample_rate: int, frame_duration: float) -> int:
    """How many frames a signal of this length is allowed to produce."""
    return max(1, int(np.floor(n_samples / (sample_rate * frame_duration) + 0.5)))


def _hz_to_mel(hz):
    return 2595.0 * np.log10(1.0 + np.asarray(hz) / 700.0)


def _mel_to_hz(mel):
    return 700.0 * (10.0 ** (np.asarray(mel) / 2595.0) - 1.0)


def _mel_filterbank(n_mels: int, n_fft: int, sample_rate: int) -> np.ndarray:
    """Triangular mel filters, (n_mels, n_fft//2 + 1)."""
    n_bins = n_fft // 2 + 1
    fft_hz = np.linspace(0.0, sample_rate / 2.0, n_bins)
    mel_points = np.linspace(_hz_to_mel(0.0), _hz_to_mel(sample_rate / 2.0), n_mels + 2)
    hz_points = _mel_to_hz(mel_points)
    weights = np.zeros((n_mels, n_bins))
    for m in range(n_mels):
        lower, center, upper = hz_points[m : m + 3]
        rising = (fft_hz - lower) / max(center - lower, 1e-12)
        falling = (upper - fft_hz) / max(upper - center, 1e-12)
        weights[m] = np.clip(np.minimum(rising, falling), 0.0, None)
    return weights


class LogMelEncoder:
    """Log mel filterbank features at a fixed frame rate.

    The hop is derived from ``frame_duration`` and the file's sample
    rate, so any PCM rate works without resampling and one frame always
    covers the same wall-clock slice.
    """

    def __init__(self, n_mels: int = 80, frame_duration: float = 0.02):
        self.id = "logmel"
        self.n_mels = n_mels
        self.frame_duration = frame_duration
        self._filters: dict[tuple[int, int], np.ndarray] = {}

    @property
    def dim(self) -> int:
        return self.n_mels

    def encode(self, samples: np.ndarray, sample_rate: int) -> np.ndarray:
        if samples.ndim != 1 or len(samples) == 0:
            raise UnsupportedAudio("expected a non-empty mono sample array")
        hop = round(sample_rate * self.frame_duration)
        if hop < 1:
            raise UnsupportedAudio(f"sample rate {sample_rate} too low")
        # analysis window: ~25 ms rounded up to a power of two
        n_fft = 1 << math.ceil(math.log2(round(sample_rate * 0.025)))

        x = samples.astype(np.float64) / 32768.0
        pad = n_fft // 2
        mode = "reflect" if len(x) > 1 else "edge"
        x = np.pad(x, pad, mode=mode)

        starts = np.arange(0, len(x) - n_fft + 1, hop)
        frames = np.lib.stride_tricks.sliding_window_view(x, n_fft)[starts]
        spectrum = np.fft.rfft(frames * np.hanning(n_fft), axis=1)
        power = np.abs(spectrum) ** 2

        key = (n_fft, sample_rate)
        if key not in self._filters:
            self._filters[key] = _mel_filterbank(self.n_mels, n_fft, sample_rate)
        mel = power @ self._filters[key].T
        feats = np.log10(np.maximum(mel, 1e-10)).astype(np.float32)

        budget = frame_budget(len(samples), sample_rate, self.frame_duration)
        return feats[: min(budget, len(feats))]


class WhisperEncoder:
    """Hidden states of a pretrained Whisper encoder (requires extras)."""

    def __init__(self, model_id: str):
        try:
            import torch
            from transformers import WhisperFeatureExtractor, WhisperModel
        except ImportError as exc:
            raise EncoderUnavailable(
                "whisper encoders need the [whisper] extra (transformers + torch)"
            ) from exc
        try:
            self._extractor = WhisperFeatureExtractor.from_pretrained(model_id)
            self._model = WhisperModel.from_pretrained(model_id)
        except Exception as exc:
            raise EncoderUnavailable(
                f"cannot load whisper weights {model_id!r} "
                f"(offline or unknown model?): {exc}"
            ) from exc
        self._torch = torch
        self._model.eval()
        self.id = f"whisper:{model_id}"
        self.frame_duration = 0.02  # 10 ms features, stride-2 conv in the encoder

    @property
    def dim(self) -> int:
        return self._model.config.d_model

    def encode(self, samples: np.ndarray, sample_rate: int) -> np.ndarray:
        if sample_rate != self._extractor.sampling_rate:
            raise UnsupportedAudio(
                f"whisper expects {self._extractor.sampling_rate} Hz input, "
                f"got {sample_rate} Hz"
            )
        x = samples.astype(np.float32) / 32768.0
        features = self._extractor(
            x, sampling_rate=sample_rate, return_tensors="pt"
        ).input_features
        with self._torch.no_grad():
            hidden = self._model.encoder(features).last_hidden_state[0].numpy()
        budget = frame_budget(len(samples), sample_rate, self.frame_duration)
        return np.ascontiguousarray(hidden[: min(budget, len(hidden))], dtype=np.float32)


def get_encoder(encoder_id: str):
    """'logmel' or 'whisper:<model_id>'."""
    if encoder_id == "logmel":
        return LogMelEncoder()
    if encoder_id.startswith("whisper:"):
        return WhisperEncoder(encoder_id.split(":", 1)[1])
    raise EncoderUnavailable(
        f"unknown encoder {encoder_id!r} (expected 'logmel' or 'whisper:<model_id>')"
    )
