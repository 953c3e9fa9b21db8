"""Terminology knowledge pool: (term, clip embedding, translation) triplets.

The pool is built once from a terminology table (JSONL, one triplet per
line: ``{id, term, translation, clip_emb, clip_audio}``) and is immutable
afterwards, so queries can share it across threads without locking.
Updating a triplet's clip — the audio-replacement step — produces a new
triplet via :func:`replace_clip`; the original is never touched.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .embeddings import EmbeddingSequence, ManifestEntry, read_embeddings
from .errors import DimMismatch, DuplicateId, MissingEmbedding

_REDUCERS = {"max": np.max, "min": np.min, "avg": np.mean}


@dataclass(frozen=True)
class KnowledgeTriplet:
    """One unit of translation knowledge: source term x, clip c, translation y."""

    id: str
    term: str
    translation: str
    clip_emb: EmbeddingSequence
    clip_audio_path: str | None = None

    def __post_init__(self):
        if not self.id:
            raise ValueError("triplet id must be non-empty")
        if not self.term:
            raise ValueError(f"triplet {self.id!r}: term must be non-empty")
        if not self.translation:
            raise ValueError(f"triplet {self.id!r}: translation must be non-empty")


def replace_clip(
    triplet: KnowledgeTriplet,
    clip_emb: EmbeddingSequence,
    clip_audio_path: str | None = None,
) -> KnowledgeTriplet:
    """Return a new triplet with the clip swapped for a located one.

    Term and translation are carried over unchanged; the input triplet is
    not modified.
    """
    return dataclasses.replace(
        triplet, clip_emb=clip_emb, clip_audio_path=clip_audio_path
    )


class KnowledgePool:
    """Immutable, insertion-ordered collection of triplets with shared dim."""

    def __init__(self, triplets: Sequence[KnowledgeTriplet]):
        triplets = tuple(triplets)
        seen: set[str] = set()
        dim: int | None = None
        for t in triplets:
            if t.id in seen:
                raise DuplicateId(f"duplicate triplet id {t.id!r}")
            seen.add(t.id)
            if dim is None:
                dim = t.clip_emb.dim
            elif t.clip_emb.dim != dim:
                raise DimMismatch(
                    f"triplet {t.id!r} has dim {t.clip_emb.dim}, pool has dim {dim}"
                )
        self._triplets = triplets
        self._dim = dim
        self._index = {t.id: i for i, t in enumerate(triplets)}
        self._pooled: dict[str, np.ndarray] = {}
        self._lengths: np.ndarray | None = None

    @property
    def dim(self) -> int | None:
        """Shared embedding dimension, or None for an empty pool."""
        return self._dim

    @property
    def triplets(self) -> tuple[KnowledgeTriplet, ...]:
        return self._triplets

    def __len__(self) -> int:
        return len(self._triplets)

    def __iter__(self) -> Iterator[KnowledgeTriplet]:
        return iter(self._triplets)

    def __getitem__(self, index: int) -> KnowledgeTriplet:
        return self._triplets[index]

    def get(self, triplet_id: str) -> KnowledgeTriplet:
        try:
            return self._triplets[self._index[triplet_id]]
        except KeyError:
            raise KeyError(f"no triplet with id {triplet_id!r}") from None

    def __contains__(self, triplet_id: str) -> bool:
        return triplet_id in self._index

    def clip_lengths(self) -> np.ndarray:
        """Frame count of every clip, in insertion order."""
        if self._lengths is None:
            self._lengths = np.array(
                [t.clip_emb.frames for t in self._triplets], dtype=np.int64
            )
        return self._lengths

    def pooled_clips(self, reducer: str = "max") -> np.ndarray:
        """(n_triplets, dim) float64 matrix of whole-clip pooled vectors.

        ``reducer`` is one of max/min/avg. Computed once per reducer and
        cached — clips never change after build.
        """
        if reducer not in _REDUCERS:
            raise ValueError(f"unknown reducer {reducer!r}")
        cached = self._pooled.get(reducer)
        if cached is None:
            fn = _REDUCERS[reducer]
            cached = np.stack(
                [
                    fn(t.clip_emb.data.astype(np.float64), axis=0)
                    for t in self._triplets
                ]
            )
            self._pooled[reducer] = cached
        return cached


def parse_terms(lines: Iterable[str], *, source: str = "<terms>") -> list[dict]:
    """Parse terminology-table JSONL rows; unknown fields are ignored."""
    rows: list[dict] = []
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{source}:{lineno}: invalid JSON: {exc}") from exc
        for field in ("id", "term", "translation", "clip_emb"):
            if field not in row:
                raise ValueError(f"{source}:{lineno}: missing field {field!r}")
        rows.append(row)
    return rows


def load_terms(path: str | Path) -> list[dict]:
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        return parse_terms(fh, source=str(path))


def build_pool(
    rows: Iterable[Mapping],
    root: str | Path = ".",
    manifest: Mapping[str, ManifestEntry] | None = None,
) -> KnowledgePool:
    """Build a pool from terminology-table rows, reading each clip's .semb.

    A row's ``clip_emb`` is either a path relative to ``root`` or, when a
    manifest mapping is supplied, the id of a clip entry in it.
    """
    root = Path(root)
    triplets: list[KnowledgeTriplet] = []
    for row in rows:
        ref = row["clip_emb"]
        audio = row.get("clip_audio")
        if manifest is not None and ref in manifest:
            entry = manifest[ref]
            emb_path = entry.resolve_emb(root)
            if audio is None and entry.audio_path:
                audio = entry.audio_path
        else:
            emb_path = root / ref
        if not emb_path.is_file():
            raise MissingEmbedding(
                f"triplet {row['id']!r}: no embedding file at {emb_path}"
            )
        seq = read_embeddings(emb_path)
        triplets.append(
            KnowledgeTriplet(
                id=row["id"],
                term=row["term"],
                translation=row["translation"],
                clip_emb=seq,
                clip_audio_path=audio,
            )
        )
    return KnowledgePool(triplets)
