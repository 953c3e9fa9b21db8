"""Windowed max-pool cosine retrieval with best-window localization.

The similarity between an utterance ``u`` and a terminology clip ``c`` is

    sim(u, c) = max_i cosine( maxpool(c), maxpool(u[i : i + |c|]) )

i.e. the clip is max-pooled over its full length once, the utterance is
scanned with a window of size |c| and step 1, and the best window wins.
The winning index doubles as the clip's location inside the utterance.
Ties go to the earliest window; a clip longer than the utterance clamps
to a single window covering all of u.

Whole-sequence max/min/avg pooling (no windowing) is kept as a baseline
family for comparison; top-k search over a knowledge pool batches the
window scan per distinct window length so each length's sliding max is
computed once per query.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Union

import numpy as np

from .embeddings import EmbeddingSequence
from .errors import DimMismatch, EmptyPool, EmptySequence, WindowOutOfRange
from .knowledge import KnowledgePool
from .windowmax import window_max, window_max_naive

Frames = Union[EmbeddingSequence, np.ndarray]


class PoolingMode(Enum):
    SLIDING_MAX = "sliding_max"
    WHOLE_MAX = "whole_max"
    WHOLE_MIN = "whole_min"
    WHOLE_AVG = "whole_avg"


_WHOLE_REDUCERS = {
    PoolingMode.WHOLE_MAX: "max",
    PoolingMode.WHOLE_MIN: "min",
    PoolingMode.WHOLE_AVG: "avg",
}


@dataclass(frozen=True)
class SimilarityResult:
    """Best similarity score plus where the best window sits."""

    score: float
    best_window_start: int
    window_len: int


@dataclass(frozen=True)
class RetrievalHit:
    triplet_id: str
    result: SimilarityResult
    rank: int  # 1-based


def _frames_of(x: Frames) -> np.ndarray:
    data = x.data if isinstance(x, EmbeddingSequence) else np.asarray(x)
    data = np.ascontiguousarray(data, dtype=np.float32)
    if data.ndim != 2:
        raise ValueError(f"expected 2-D (frames, dim) input, got shape {data.shape}")
    if data.shape[0] == 0:
        raise EmptySequence("sequence has no frames")
    return data


def max_pool(seq: Frames, start: int, length: int) -> np.ndarray:
    """Component-wise max over rows [start, start+length) of ``seq``."""
    data = _frames_of(seq)
    frames = data.shape[0]
    if start < 0 or length < 1 or start + length > frames:
        raise WindowOutOfRange(
            f"window [{start}, {start + length}) outside sequence of {frames} frames"
        )
    return data[start : start + length].max(axis=0)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity; 0.0 when either vector has zero norm."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise DimMismatch(f"vector dims differ: {a.shape[0]} vs {b.shape[0]}")
    na = np.sqrt(a @ a)
    nb = np.sqrt(b @ b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(a @ b / (na * nb))


def _window_scores(
    u_data: np.ndarray, clip_vec: np.ndarray, window_len: int, kernel
) -> np.ndarray:
    """Cosine of the pooled clip vector against every pooled window."""
    wm = kernel(u_data, window_len).astype(np.float64)
    dots = wm @ clip_vec
    norms = np.sqrt(np.einsum("ij,ij->i", wm, wm)) * np.sqrt(clip_vec @ clip_vec)
    scores = np.zeros(wm.shape[0])
    np.divide(dots, norms, out=scores, where=norms > 0.0)
    return scores


def _sliding(u: Frames, c: Frames, kernel) -> SimilarityResult:
    u_data = _frames_of(u)
    c_data = _frames_of(c)
    if u_data.shape[1] != c_data.shape[1]:
        raise DimMismatch(
            f"utterance dim {u_data.shape[1]} != clip dim {c_data.shape[1]}"
        )
    window_len = min(c_data.shape[0], u_data.shape[0])
    clip_vec = c_data.max(axis=0).astype(np.float64)
    scores = _window_scores(u_data, clip_vec, window_len, kernel)
    best = int(np.argmax(scores))  # first occurrence -> earliest window
    return SimilarityResult(float(scores[best]), best, window_len)


def sliding_sim(u: Frames, c: Frames) -> SimilarityResult:
    """Best-window similarity and localization (the fast path)."""
    return _sliding(u, c, window_max)


def sliding_sim_naive(u: Frames, c: Frames) -> SimilarityResult:
    """Same contract as :func:`sliding_sim` with per-window recomputation."""
    return _sliding(u, c, window_max_naive)


def _pool_whole(data: np.ndarray, reducer: str) -> np.ndarray:
    data = data.astype(np.float64)
    if reducer == "max":
        return data.max(axis=0)
    if reducer == "min":
        return data.min(axis=0)
    return data.mean(axis=0)


def baseline_sim(u: Frames, c: Frames, mode: PoolingMode) -> SimilarityResult:
    """Whole-sequence pooling baselines; SLIDING_MAX delegates to sliding_sim."""
    if mode is PoolingMode.SLIDING_MAX:
        return sliding_sim(u, c)
    u_data = _frames_of(u)
    c_data = _frames_of(c)
    if u_data.shape[1] != c_data.shape[1]:
        raise DimMismatch(
            f"utterance dim {u_data.shape[1]} != clip dim {c_data.shape[1]}"
        )
    reducer = _WHOLE_REDUCERS[mode]
    score = cosine(_pool_whole(u_data, reducer), _pool_whole(c_data, reducer))
    return SimilarityResult(score, 0, u_data.shape[0])


def _sliding_query(
    u_data: np.ndarray,
    pool: KnowledgePool,
    kernel,
    threads: int | None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Scores/starts/window lengths for every pool triplet, batched by length.

    Triplets sharing an effective window length reuse one sliding-max pass
    over the utterance. Results land in preallocated arrays indexed by
    triplet position, so the outcome is identical however the per-length
    groups are scheduled.
    """
    n_frames = u_data.shape[0]
    lengths = np.minimum(pool.clip_lengths(), n_frames)
    clip_vecs = pool.pooled_clips("max")  # (n, dim) float64
    clip_norms = np.sqrt(np.einsum("ij,ij->i", clip_vecs, clip_vecs))

    scores = np.zeros(len(pool))
    starts = np.zeros(len(pool), dtype=np.int64)

    def score_group(window_len: int) -> None:
        idx = np.flatnonzero(lengths == window_len)
        wm = kernel(u_data, int(window_len)).astype(np.float64)
        win_norms = np.sqrt(np.einsum("ij,ij->i", wm, wm))
        dots = clip_vecs[idx] @ wm.T  # (group, windows)
        denom = np.outer(clip_norms[idx], win_norms)
        group_scores = np.zeros_like(dots)
        np.divide(dots, denom, out=group_scores, where=denom > 0.0)
        best = np.argmax(group_scores, axis=1)  # first max -> earliest window
        scores[idx] = group_scores[np.arange(len(idx)), best]
        starts[idx] = best

    unique_lengths = sorted(int(l) for l in np.unique(lengths))
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            list(ex.map(score_group, unique_lengths))
    else:
        for window_len in unique_lengths:
            score_group(window_len)
    return scores, starts, lengths


def retrieve_topk(
    u: Frames,
    pool: KnowledgePool,
    k: int,
    mode: PoolingMode = PoolingMode.SLIDING_MAX,
    *,
    threads: int | None = None,
    window_kernel: Callable[[np.ndarray, int], np.ndarray] | None = None,
) -> list[RetrievalHit]:
    """Top-k triplets by similarity, ties broken by pool insertion order.

    ``window_kernel`` swaps the sliding-max implementation (benchmarking
    hook); everything else about the computation is shared, so kernels
    that agree bitwise yield identical hits.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if len(pool) == 0:
        raise EmptyPool("cannot retrieve from an empty pool")
    u_data = _frames_of(u)
    if pool.dim != u_data.shape[1]:
        raise DimMismatch(f"utterance dim {u_data.shape[1]} != pool dim {pool.dim}")

    if mode is PoolingMode.SLIDING_MAX:
        kernel = window_kernel if window_kernel is not None else window_max
        scores, starts, lengths = _sliding_query(u_data, pool, kernel, threads)
    else:
        reducer = _WHOLE_REDUCERS[mode]
        u_vec = _pool_whole(u_data, reducer)
        clip_vecs = pool.pooled_clips(reducer)
        dots = clip_vecs @ u_vec
        denom = np.sqrt(np.einsum("ij,ij->i", clip_vecs, clip_vecs)) * np.sqrt(
            u_vec @ u_vec
        )
        scores = np.zeros(len(pool))
        np.divide(dots, denom, out=scores, where=denom > 0.0)
        starts = np.zeros(len(pool), dtype=np.int64)
        lengths = np.full(len(pool), u_data.shape[0], dtype=np.int64)

    order = np.argsort(-scores, kind="stable")[: min(k, len(pool))]
    return [
        RetrievalHit(
            triplet_id=pool[int(i)].id,
            result=SimilarityResult(
                float(scores[i]), int(starts[i]), int(lengths[i])
            ),
            rank=rank,
        )
        for rank, i in enumerate(order, start=1)
    ]
