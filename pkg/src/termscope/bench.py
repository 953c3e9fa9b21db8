"""Latency benchmarks over synthetic in-memory data.

Two sections, neither of which times any file I/O (embeddings are
generated in memory, mirroring a serving setup where representations are
precomputed):

* pooling — one sliding-max pass over an utterance at a fixed window
  length, comparing the naive per-window recompute, the monotonic-deque
  scan, and the blockwise kernel the query path uses.
* query — one full top-k retrieval over a synthetic pool, comparing the
  optimized path against per-clip naive recomputation.

Result equality between implementations is asserted before anything is
timed; on disagreement the benchmark raises instead of reporting
numbers for code that computes different answers.
"""

from __future__ import annotations

import math
import statistics
import time
from dataclasses import dataclass

import numpy as np

from .embeddings import EmbeddingSequence
from .knowledge import KnowledgePool, KnowledgeTriplet
from .retrieval import RetrievalHit, retrieve_topk, sliding_sim_naive
from .windowmax import window_max, window_max_deque, window_max_naive

DEFAULT_WARMUP = 10
DEFAULT_MEASURED = 100


@dataclass(frozen=True)
class LatencyStats:
    iterations: int
    mean_ms: float
    median_ms: float
    p99_ms: float

    @classmethod
    def from_times(cls, seconds: list[float]) -> "LatencyStats":
        ms = sorted(t * 1e3 for t in seconds)
        rank = max(math.ceil(0.99 * len(ms)) - 1, 0)  # nearest-rank p99
        return cls(
            iterations=len(ms),
            mean_ms=statistics.fmean(ms),
            median_ms=statistics.median(ms),
            p99_ms=ms[rank],
        )

    def as_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "mean_ms": self.mean_ms,
            "median_ms": self.median_ms,
            "p99_ms": self.p99_ms,
        }


def make_utterance(frames: int, dim: int, seed: int = 0) -> EmbeddingSequence:
    rng = np.random.default_rng(seed)
    return EmbeddingSequence(
        rng.standard_normal((frames, dim)).astype(np.float32)
    )


def make_pool(
    pool_size: int, clip_frames: int, dim: int, seed: int = 1
) -> KnowledgePool:
    rng = np.random.default_rng(seed)
    triplets = []
    for i in range(pool_size):
        clip = EmbeddingSequence(
            rng.standard_normal((clip_frames, dim)).astype(np.float32)
        )
        triplets.append(
            KnowledgeTriplet(
                id=f"clip-{i:05d}",
                term=f"term-{i}",
                translation=f"translation-{i}",
                clip_emb=clip,
            )
        )
    return KnowledgePool(triplets)


def _time(fn, warmup: int, measured: int) -> list[float]:
    for _ in range(warmup):
        fn()
    times = []
    for _ in range(measured):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return times


def naive_query(u: EmbeddingSequence, pool: KnowledgePool, k: int) -> list[RetrievalHit]:
    """Per-clip naive recomputation: no window-max reuse across the pool."""
    results = [sliding_sim_naive(u, t.clip_emb) for t in pool]
    scores = np.array([r.score for r in results])
    order = np.argsort(-scores, kind="stable")[: min(k, len(pool))]
    return [
        RetrievalHit(pool[int(i)].id, results[int(i)], rank)
        for rank, i in enumerate(order, start=1)
    ]


def _check_query_agreement(fast, slow) -> None:
    if len(fast) != len(slow):
        raise AssertionError("query paths returned different hit counts")
    for a, b in zip(fast, slow):
        if a.triplet_id != b.triplet_id or a.rank != b.rank:
            raise AssertionError(
                f"query paths disagree on ranking: {a.triplet_id} vs {b.triplet_id}"
            )
        if a.result.best_window_start != b.result.best_window_start:
            raise AssertionError(
                f"query paths disagree on localization for {a.triplet_id}"
            )
        if abs(a.result.score - b.result.score) > 1e-9:
            raise AssertionError(
                f"query paths disagree on score for {a.triplet_id}: "
                f"{a.result.score} vs {b.result.score}"
            )


def run_bench(
    pool_size: int = 1000,
    frames: int = 1500,
    dim: int = 512,
    clip_frames: int = 100,
    k: int = 5,
    warmup: int = DEFAULT_WARMUP,
    measured: int = DEFAULT_MEASURED,
    naive_query_iterations: int = 3,
    seed: int = 0,
    threads: int | None = None,
) -> dict:
    """Run both benchmark sections and return a JSON-ready report."""
    if measured < 1:
        raise ValueError("measured iterations must be >= 1")
    u = make_utterance(frames, dim, seed=seed)
    pool = make_pool(pool_size, clip_frames, dim, seed=seed + 1)
    window_len = min(clip_frames, frames)

    # --- pooling section -------------------------------------------------
    reference = window_max_naive(u.data, window_len)  # also triggers JIT below
    if not np.array_equal(window_max_deque(u.data, window_len), reference):
        raise AssertionError("deque sliding max disagrees with naive recompute")
    if not np.array_equal(window_max(u.data, window_len), reference):
        raise AssertionError("blockwise sliding max disagrees with naive recompute")

    naive_times = _time(lambda: window_max_naive(u.data, window_len), warmup, measured)
    deque_times = _time(lambda: window_max_deque(u.data, window_len), warmup, measured)
    fast_times = _time(lambda: window_max(u.data, window_len), warmup, measured)
    naive_stats = LatencyStats.from_times(naive_times)
    fast_stats = LatencyStats.from_times(fast_times)
    pooling = {
        "frames": frames,
        "dim": dim,
        "window_len": window_len,
        "results_equal": True,
        "naive": naive_stats.as_dict(),
        "deque": LatencyStats.from_times(deque_times).as_dict(),
        "optimized": fast_stats.as_dict(),
        "speedup_naive_over_optimized": naive_stats.median_ms / fast_stats.median_ms,
    }

    # --- query section ----------------------------------------------------
    fast_hits = retrieve_topk(u, pool, k, threads=threads)
    slow_hits = naive_query(u, pool, k)
    _check_query_agreement(fast_hits, slow_hits)

    query_times = _time(
        lambda: retrieve_topk(u, pool, k, threads=threads), warmup, measured
    )
    query = {
        "pool_size": pool_size,
        "k": k,
        "results_equal": True,
        "optimized": LatencyStats.from_times(query_times).as_dict(),
    }
    if naive_query_iterations > 0:
        slow_times = _time(
            lambda: naive_query(u, pool, k), 0, naive_query_iterations
        )
        query["naive"] = LatencyStats.from_times(slow_times).as_dict()

    return {
        "config": {
            "pool_size": pool_size,
            "frames": frames,
            "dim": dim,
            "clip_frames": clip_frames,
            "k": k,
            "warmup": warmup,
            "measured": measured,
            "naive_query_iterations": naive_query_iterations,
            "seed": seed,
            "threads": threads,
        },
        "pooling": pooling,
        "query": query,
    }
