"""Batch extraction: WAV directory in, .semb files + manifest JSONL out.

Per-file failures are logged and skipped — one unreadable WAV must not
sink a corpus run — and every artifact is written atomically
(temp-then-rename), so a crashed run never leaves half a file behind.
A sidecar ``<stem>.txt`` next to a WAV becomes the manifest row's
transcript.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import os
import wave
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Union

import numpy as np

from .encoders import get_encoder
from .errors import AdapterError, UnsupportedAudio
from .semb import encode_semb, read_semb

log = logging.getLogger(__name__)

KINDS = ("utterance", "clip")


@dataclasses.dataclass
class ExtractionSpec:
    """One batch extraction: which encoder over which directory."""

    encoder_id: str
    in_dir: Union[str, Path]
    out_dir: Union[str, Path]
    kind: str = "utterance"
    workers: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")


def read_wav_mono(path: Union[str, Path]) -> tuple[np.ndarray, int]:
    """PCM-16 WAV -> (int16 mono samples, rate); stereo is downmixed."""
    try:
        with wave.open(str(path), "rb") as fh:
            channels = fh.getnchannels()
            width = fh.getsampwidth()
            comptype = fh.getcomptype()
            rate = fh.getframerate()
            raw = fh.readframes(fh.getnframes())
    except (wave.Error, EOFError) as exc:
        raise UnsupportedAudio(f"not a readable WAV file: {exc}") from exc
    if comptype != "NONE":
        raise UnsupportedAudio(f"compressed WAV ({comptype}) not supported")
    if width != 2:
        raise UnsupportedAudio(f"only 16-bit PCM supported, got {8 * width}-bit")
    samples = np.frombuffer(raw, dtype="<i2")
    if channels > 1:
        samples = (
            samples.reshape(-1, channels).mean(axis=1).round().astype(np.int16)
        )
    if len(samples) == 0:
        raise UnsupportedAudio("WAV contains no samples")
    return samples, rate


def _atomic_write(path: Path, payload: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(payload)
    os.replace(tmp, path)


def extract_file(encoder, wav_path: Union[str, Path], out_path: Union[str, Path]) -> dict:
    """Encode one WAV to one .semb; returns {frames, dim, duration}."""
    wav_path = Path(wav_path)
    out_path = Path(out_path)
    samples, rate = read_wav_mono(wav_path)
    features = encoder.encode(samples, rate)
    _atomic_write(out_path, encode_semb(features, encoder.frame_duration))
    return {
        "frames": int(features.shape[0]),
        "dim": int(features.shape[1]),
        "duration": len(samples) / rate,
    }


def extract_directory(
    in_dir: Union[str, Path],
    out_dir: Union[str, Path],
    encoder: str = "logmel",
    kind: str = "utterance",
    workers: int | None = None,
) -> dict:
    """Run an encoder over every ``*.wav`` in a directory.

    Returns the run report; the manifest JSONL (one row per successful
    file, in sorted filename order whatever the worker count) lands at
    ``{out_dir}/manifest.jsonl``.
    """
    spec = ExtractionSpec(encoder, in_dir, out_dir, kind=kind, workers=workers)
    return run_extraction(spec)


def run_extraction(spec: ExtractionSpec) -> dict:
    in_dir = Path(spec.in_dir)
    out_dir = Path(spec.out_dir)
    if not in_dir.is_dir():
        raise AdapterError(f"input directory not found: {in_dir}")
    out_dir.mkdir(parents=True, exist_ok=True)
    enc = get_encoder(spec.encoder_id)

    wavs = sorted(in_dir.glob("*.wav"))
    outcomes: list = [None] * len(wavs)

    def worker(index: int) -> None:
        wav = wavs[index]
        try:
            outcomes[index] = extract_file(enc, wav, out_dir / f"{wav.stem}.semb")
        except Exception as exc:
            log.warning("skipping %s: %s", wav.name, exc)
            outcomes[index] = exc

    if spec.workers and spec.workers > 1 and wavs:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            list(pool.map(worker, range(len(wavs))))
    else:
        for index in range(len(wavs)):
            worker(index)

    rows = []
    failed = []
    for wav, outcome in zip(wavs, outcomes):
        if isinstance(outcome, Exception):
            failed.append({"file": wav.name, "error": str(outcome)})
            continue
        row = {
            "id": wav.stem,
            "kind": spec.kind,
            "emb_path": f"{wav.stem}.semb",
            "audio_path": os.path.relpath(wav, out_dir),
        }
        sidecar = wav.with_suffix(".txt")
        if sidecar.is_file():
            row["transcript"] = sidecar.read_text(encoding="utf-8").strip()
        rows.append(row)

    manifest_path = out_dir / "manifest.jsonl"
    payload = "".join(json.dumps(row, ensure_ascii=False) + "\n" for row in rows)
    _atomic_write(manifest_path, payload.encode("utf-8"))

    return {
        "encoder": enc.id,
        "dim": enc.dim,
        "frame_duration": enc.frame_duration,
        "total": len(wavs),
        "completed": len(rows),
        "failed": failed,
        "manifest_path": str(manifest_path),
    }


def verify_manifest(manifest_path: Union[str, Path]) -> dict:
    """Re-read every .semb a manifest references and validate it.

    Checks header sanity, payload length, finite values, and that all
    files agree on one dim. Nothing here raises for a bad entry — each
    problem becomes a row in ``failed``.
    """
    manifest_path = Path(manifest_path)
    root = manifest_path.parent
    entries = []
    with open(manifest_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                entries.append(json.loads(line))
            except json.JSONDecodeError as exc:
                entries.append({"id": f"line {lineno}", "_broken": str(exc)})

    failed = []
    dims: dict[int, str] = {}
    for entry in entries:
        entry_id = entry.get("id", "?")
        if "_broken" in entry:
            failed.append({"id": entry_id, "error": f"invalid JSON: {entry['_broken']}"})
            continue
        try:
            data, _ = read_semb(root / entry["emb_path"])
        except (AdapterError, OSError, KeyError) as exc:
            failed.append({"id": entry_id, "error": str(exc)})
            continue
        dims.setdefault(data.shape[1], entry_id)
    if len(dims) > 1:
        listing = ", ".join(f"dim {d} (first: {i})" for d, i in sorted(dims.items()))
        failed.append({"id": "<manifest>", "error": f"inconsistent dims: {listing}"})

    return {
        "total": len(entries),
        "passed": len(entries) - sum(1 for f in failed if f["id"] != "<manifest>"),
        "failed": failed,
    }
