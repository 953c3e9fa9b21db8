"""End-to-end orchestration: locate terminology clips, then build the
terminology-focused context for each utterance.

A corpus run processes every utterance in a manifest against one
knowledge pool and writes, per utterance::

    {out_dir}/{utterance_id}/bundle.json    # hits, spans, prompt, tagged ref
    {out_dir}/{utterance_id}/prompt.txt
    {out_dir}/{utterance_id}/spans.jsonl
    {out_dir}/{utterance_id}/clips/*.wav    # when utterance audio is given

plus a corpus-level ``report.json``. Outputs contain no timestamps or
environment-dependent values, and per-job results are assembled in
manifest order whatever the worker count, so identical inputs produce
byte-identical output trees.

Job failures (corrupt embedding, span errors, ...) are collected in the
report instead of aborting the corpus.
"""

from __future__ import annotations

import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - version shim
    import tomli as tomllib

from .embeddings import EmbeddingSequence, load_manifest, read_embeddings
from .knowledge import KnowledgePool, KnowledgeTriplet, build_pool, load_terms, replace_clip
from .locate import LocatedSpan, frames_to_span, read_wav, slice_audio, write_wav
from .prompts import PromptSpec, PromptStyle, build_prompt, tag_reference
from .retrieval import PoolingMode, RetrievalHit, retrieve_topk, sliding_sim

_CONFIG_DEFAULTS = dict(
    k=5,
    pooling="sliding_max",
    frame_duration=None,
    tag_mode="off",
    prompt_style="locate_focus",
    src_lang="English",
    tgt_lang="Chinese",
    threads=None,
    gold=None,
    references=None,
    oracle_knowledge=False,
    emb_root=None,
)


@dataclass
class PipelineConfig:
    """Flat configuration for a corpus run (TOML or JSON file)."""

    pool_manifest: str
    utterance_manifest: str
    out_dir: str | None = None
    k: int = 5
    pooling: PoolingMode = PoolingMode.SLIDING_MAX
    frame_duration: float | None = None
    tag_mode: str = "off"
    prompt_style: PromptStyle = PromptStyle.LOCATE_FOCUS
    src_lang: str = "English"
    tgt_lang: str = "Chinese"
    threads: int | None = None
    gold: str | None = None
    references: str | None = None
    oracle_knowledge: bool = False
    emb_root: str | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if isinstance(self.pooling, str):
            self.pooling = PoolingMode(self.pooling)
        if isinstance(self.prompt_style, str):
            self.prompt_style = PromptStyle(self.prompt_style)
        if self.tag_mode not in ("on", "off"):
            raise ValueError(f"tag_mode must be 'on' or 'off', got {self.tag_mode!r}")


def load_config(path: Union[str, Path]) -> PipelineConfig:
    """Read a flat TOML (or .json) config file into a PipelineConfig."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    else:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    known = set(_CONFIG_DEFAULTS) | {"pool_manifest", "utterance_manifest", "out_dir"}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"{path}: unknown config keys: {sorted(unknown)}")
    for required in ("pool_manifest", "utterance_manifest"):
        if required not in raw:
            raise ValueError(f"{path}: missing required key {required!r}")
    return PipelineConfig(**raw)


@dataclass
class UtteranceJob:
    """One utterance to process: id, embedding, optional audio."""

    id: str
    emb: EmbeddingSequence
    audio_path: Path | None = None  # resolved on disk, for slicing
    audio_ref: str | None = None  # as written in the manifest, for prompts


@dataclass
class ContextBundle:
    """Everything the focusing step produced for one utterance."""

    utterance_id: str
    hits: list[RetrievalHit]
    spans: list[LocatedSpan]
    triplets: list[KnowledgeTriplet]  # clips replaced by located windows
    prompt: str
    tagged_reference: str | None = None
    clips: dict[str, "object"] = field(default_factory=dict)  # triplet_id -> AudioClip


def run_localization(
    job: UtteranceJob,
    pool: KnowledgePool,
    config: PipelineConfig,
    *,
    gold_ids: list[str] | None = None,
    depth: int | None = None,
) -> list[tuple[RetrievalHit, LocatedSpan]]:
    """Top-k hits for a job, each with its located time span.

    ``depth`` widens the ranking past k (for Hits@N evaluation) without
    affecting which hits are returned downstream. In oracle-knowledge
    mode the given gold ids are injected verbatim instead of searching,
    but their clips are still localized.
    """
    frame_duration = config.frame_duration or job.emb.frame_duration
    if config.oracle_knowledge:
        if not gold_ids:
            raise ValueError(f"job {job.id!r}: oracle knowledge needs gold ids")
        hits = []
        for rank, triplet_id in enumerate(gold_ids, start=1):
            result = sliding_sim(job.emb, pool.get(triplet_id).clip_emb)
            hits.append(RetrievalHit(triplet_id, result, rank))
    else:
        hits = retrieve_topk(
            job.emb,
            pool,
            depth if depth is not None else config.k,
            config.pooling,
            threads=config.threads,
        )
    pairs = []
    for hit in hits:
        span = frames_to_span(
            hit.result.best_window_start,
            hit.result.window_len,
            frame_duration,
            utterance_id=job.id,
        )
        pairs.append((hit, span))
    return pairs


def run_focus(
    job: UtteranceJob,
    pool: KnowledgePool,
    hits_spans: list[tuple[RetrievalHit, LocatedSpan]],
    config: PipelineConfig,
    *,
    reference: str | None = None,
) -> ContextBundle:
    """Re-anchor each hit triplet to its located window and build the prompt."""
    audio = read_wav(job.audio_path) if job.audio_path else None
    triplets: list[KnowledgeTriplet] = []
    spans: list[LocatedSpan] = []
    hits: list[RetrievalHit] = []
    clips: dict[str, object] = {}
    for hit, span in hits_spans:
        window = job.emb.data[span.start_frame : span.start_frame + span.len_frames]
        window_emb = EmbeddingSequence(
            window.copy(), frame_duration=job.emb.frame_duration
        )
        clip_path = f"clips/{hit.triplet_id}.wav"
        if audio is not None:
            clips[hit.triplet_id] = slice_audio(audio, span)
        replaced = replace_clip(
            pool.get(hit.triplet_id),
            window_emb,
            clip_audio_path=clip_path if audio is not None else None,
        )
        triplets.append(replaced)
        spans.append(span)
        hits.append(hit)

    utterance_audio = job.audio_ref or f"{job.id}.wav"
    if config.prompt_style is PromptStyle.RETRIEVE_DEMONSTRATE:
        prompt_triplets = triplets[:1]
    else:
        prompt_triplets = triplets
    prompt = build_prompt(
        PromptSpec(
            style=config.prompt_style,
            src_lang=config.src_lang,
            tgt_lang=config.tgt_lang,
            triplets=[
                (t.term, t.clip_audio_path or f"clips/{t.id}.wav", t.translation)
                for t in prompt_triplets
            ],
            utterance_audio=utterance_audio,
        )
    )

    tagged = None
    if config.tag_mode == "on" and reference is not None:
        tagged = tag_reference(reference, [t.translation for t in triplets]).text

    return ContextBundle(
        utterance_id=job.id,
        hits=hits,
        spans=spans,
        triplets=triplets,
        prompt=prompt,
        tagged_reference=tagged,
        clips=clips,
    )


def _dump_json(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, indent=2) + "\n"


def _dump_jsonl_line(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True) + "\n"


def write_bundle(bundle: ContextBundle, out_dir: Union[str, Path]) -> Path:
    """Write one utterance's artifacts under {out_dir}/{utterance_id}/."""
    job_dir = Path(out_dir) / bundle.utterance_id
    job_dir.mkdir(parents=True, exist_ok=True)

    rows = []
    for hit, span, triplet in zip(bundle.hits, bundle.spans, bundle.triplets):
        rows.append(
            {
                "triplet_id": hit.triplet_id,
                "rank": hit.rank,
                "score": hit.result.score,
                "start_frame": span.start_frame,
                "len_frames": span.len_frames,
                "start_sec": span.start_sec,
                "end_sec": span.end_sec,
                "term": triplet.term,
                "translation": triplet.translation,
                "clip_audio": triplet.clip_audio_path,
            }
        )
    doc = {
        "utterance_id": bundle.utterance_id,
        "hits": rows,
        "prompt": bundle.prompt,
    }
    if bundle.tagged_reference is not None:
        doc["tagged_reference"] = bundle.tagged_reference
    (job_dir / "bundle.json").write_text(_dump_json(doc), encoding="utf-8")
    (job_dir / "prompt.txt").write_text(bundle.prompt + "\n", encoding="utf-8")

    with open(job_dir / "spans.jsonl", "w", encoding="utf-8") as fh:
        for hit, span in zip(bundle.hits, bundle.spans):
            fh.write(
                _dump_jsonl_line(
                    {
                        "utterance_id": bundle.utterance_id,
                        "triplet_id": hit.triplet_id,
                        "start_sec": span.start_sec,
                        "end_sec": span.end_sec,
                        "score": hit.result.score,
                    }
                )
            )

    if bundle.clips:
        clip_dir = job_dir / "clips"
        clip_dir.mkdir(exist_ok=True)
        for triplet_id, clip in bundle.clips.items():
            write_wav(clip_dir / f"{triplet_id}.wav", clip.samples, clip.sample_rate)
    return job_dir


def _load_gold(path: Union[str, Path]) -> dict[str, list[str]]:
    gold: dict[str, list[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            gold[row["utterance_id"]] = list(row["gold_triplet_ids"])
    return gold


def _load_references(path: Union[str, Path]) -> dict[str, str]:
    refs: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            refs[row["utterance_id"]] = row["reference"]
    return refs


def run_corpus(config: PipelineConfig) -> dict:
    """Process every utterance in the manifest; returns the summary report.

    Per-job failures are reported, not raised; only setup problems
    (unreadable manifests, bad config) escape as exceptions.
    """
    pool_path = Path(config.pool_manifest)
    utt_path = Path(config.utterance_manifest)
    pool_root = Path(config.emb_root) if config.emb_root else pool_path.parent
    utt_root = Path(config.emb_root) if config.emb_root else utt_path.parent

    pool = build_pool(load_terms(pool_path), root=pool_root)
    entries = [e for e in load_manifest(utt_path) if e.kind == "utterance"]
    gold = _load_gold(config.gold) if config.gold else {}
    references = _load_references(config.references) if config.references else {}

    eval_depth = max(config.k, 10) if gold and not config.oracle_knowledge else None

    def process(entry):
        job = UtteranceJob(
            id=entry.id,
            emb=read_embeddings(entry.resolve_emb(utt_root)),
            audio_path=entry.resolve_audio(utt_root),
            audio_ref=entry.audio_path,
        )
        pairs = run_localization(
            job,
            pool,
            config,
            gold_ids=gold.get(entry.id),
            depth=eval_depth,
        )
        ranked_ids = [hit.triplet_id for hit, _ in pairs]
        bundle = run_focus(
            job,
            pool,
            pairs[: config.k] if not config.oracle_knowledge else pairs,
            config,
            reference=references.get(entry.id),
        )
        if config.out_dir is not None:
            write_bundle(bundle, config.out_dir)
        return ranked_ids

    results: list = [None] * len(entries)

    def guarded(index: int) -> None:
        try:
            results[index] = process(entries[index])
        except Exception as exc:  # per-job isolation
            results[index] = exc

    workers = config.threads or 1
    if workers > 1 and entries:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            list(ex.map(guarded, range(len(entries))))
    else:
        for index in range(len(entries)):
            guarded(index)

    failed = []
    eval_rows = []
    completed = 0
    for entry, outcome in zip(entries, results):
        if isinstance(outcome, Exception):
            kind = type(outcome).__name__
            failed.append({"utterance_id": entry.id, "error": f"{kind}: {outcome}"})
        else:
            completed += 1
            if entry.id in gold:
                eval_rows.append((entry.id, gold[entry.id], outcome))

    report = {
        "total": len(entries),
        "completed": completed,
        "failed": failed,
        "k": config.k,
        "pooling": config.pooling.value,
        "oracle_knowledge": config.oracle_knowledge,
    }
    if eval_rows and not config.oracle_knowledge:
        from .metrics import RetrievalEvalCase, hits_at_n

        cases = [
            RetrievalEvalCase(uid, frozenset(gold_ids), tuple(ranked))
            for uid, gold_ids, ranked in eval_rows
        ]
        report["hits_at_n"] = {
            str(n): hits_at_n(cases, n) for n in (1, 5, 10)
        }
    if config.out_dir is not None:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(_dump_json(report), encoding="utf-8")
    return report
