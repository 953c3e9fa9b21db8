"""termscope: terminology clip localization and retrieval for speech translation.

Given per-frame speech embeddings, this package finds which terminology
clips from a knowledge base occur inside an utterance, where they occur,
and assembles the terminology-focused translation context (audio
replacement, instruction prompt, tagged references) around the answer.
"""

from .bench import run_bench
from .embeddings import (
    EmbeddingSequence,
    ManifestEntry,
    dumps_embeddings,
    load_manifest,
    read_embeddings,
    write_embeddings,
)
from .errors import (
    AlreadyTagged,
    BadMagic,
    BadVersion,
    DimMismatch,
    DuplicateId,
    EmptyCases,
    EmptyPool,
    EmptySequence,
    EmptyTripletList,
    FormatError,
    MissingEmbedding,
    NonFiniteValue,
    SpanOutOfRange,
    TermscopeError,
    TruncatedData,
    UnsupportedWav,
    WindowOutOfRange,
)
from .knowledge import (
    KnowledgePool,
    KnowledgeTriplet,
    build_pool,
    load_terms,
    replace_clip,
)
from .locate import (
    AudioClip,
    LocatedSpan,
    frames_to_span,
    locate_and_extract,
    read_wav,
    slice_audio,
    write_wav,
)
from .metrics import (
    ASR_EDIT_THRESHOLD,
    FilterDecision,
    LossCase,
    RetrievalEvalCase,
    TsrCase,
    asr_filter,
    contrastive_loss,
    hits_at_n,
    hits_counts,
    levenshtein,
    term_success_rate,
    tsr_counts,
)
from .pipeline import (
    ContextBundle,
    PipelineConfig,
    UtteranceJob,
    load_config,
    run_corpus,
    run_focus,
    run_localization,
)
from .prompts import (
    PromptSpec,
    PromptStyle,
    TaggedReference,
    build_prompt,
    strip_tags,
    tag_reference,
)
from .retrieval import (
    PoolingMode,
    RetrievalHit,
    SimilarityResult,
    baseline_sim,
    cosine,
    max_pool,
    retrieve_topk,
    sliding_sim,
    sliding_sim_naive,
)
from .windowmax import window_max, window_max_deque, window_max_naive

__version__ = "0.1.0"

__all__ = [
    "ASR_EDIT_THRESHOLD",
    "AlreadyTagged",
    "AudioClip",
    "BadMagic",
    "BadVersion",
    "ContextBundle",
    "DimMismatch",
    "DuplicateId",
    "EmbeddingSequence",
    "EmptyCases",
    "EmptyPool",
    "EmptySequence",
    "EmptyTripletList",
    "FilterDecision",
    "FormatError",
    "KnowledgePool",
    "KnowledgeTriplet",
    "LocatedSpan",
    "LossCase",
    "ManifestEntry",
    "MissingEmbedding",
    "NonFiniteValue",
    "PipelineConfig",
    "PoolingMode",
    "PromptSpec",
    "PromptStyle",
    "RetrievalEvalCase",
    "RetrievalHit",
    "SimilarityResult",
    "SpanOutOfRange",
    "TaggedReference",
    "TermscopeError",
    "TruncatedData",
    "TsrCase",
    "UnsupportedWav",
    "UtteranceJob",
    "WindowOutOfRange",
    "asr_filter",
    "baseline_sim",
    "build_pool",
    "build_prompt",
    "contrastive_loss",
    "cosine",
    "dumps_embeddings",
    "frames_to_span",
    "hits_at_n",
    "hits_counts",
    "levenshtein",
    "load_config",
    "load_manifest",
    "load_terms",
    "locate_and_extract",
    "max_pool",
    "read_embeddings",
    "read_wav",
    "replace_clip",
    "retrieve_topk",
    "run_bench",
    "run_corpus",
    "run_focus",
    "run_localization",
    "slice_audio",
    "sliding_sim",
    "sliding_sim_naive",
    "strip_tags",
    "tag_reference",
    "term_success_rate",
    "tsr_counts",
    "window_max",
    "window_max_deque",
    "window_max_naive",
    "write_embeddings",
    "write_wav",
]
