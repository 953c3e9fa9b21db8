"""Speech encoders that emit embedding files in the .semb interchange format."""

from .encoders import LogMelEncoder, WhisperEncoder, frame_budget, get_encoder
from .errors import AdapterError, EncoderUnavailable, UnsupportedAudio
from .extract import (
    ExtractionSpec,
    extract_directory,
    extract_file,
    read_wav_mono,
    run_extraction,
    verify_manifest,
)
from .semb import encode_semb, read_semb

__all__ = [
    "AdapterError",
    "EncoderUnavailable",
    "ExtractionSpec",
    "LogMelEncoder",
    "UnsupportedAudio",
    "WhisperEncoder",
    "encode_semb",
    "extract_directory",
    "extract_file",
    "frame_budget",
    "get_encoder",
    "read_semb",
    "read_wav_mono",
    "run_extraction",
    "verify_manifest",
]
