"""Evaluation quantities: Hits@N, term success rate, ASR retention filter,
and the contrastive similarity loss used as a training diagnostic.

Hits@N and TSR are micro-averages — every (case, gold id) pair and every
listed term counts once — so corpus scores are simple integer ratios and
aggregation order cannot matter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .errors import EmptyCases
from .prompts import strip_tags

#: retention threshold for synthesized-term transcripts
ASR_EDIT_THRESHOLD = 3


@dataclass(frozen=True)
class RetrievalEvalCase:
    """Gold triplet ids vs the ranked ids a query returned."""

    utterance_id: str
    gold_triplet_ids: frozenset[str]
    ranked_ids: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "gold_triplet_ids", frozenset(self.gold_triplet_ids)
        )
        object.__setattr__(self, "ranked_ids", tuple(self.ranked_ids))
        if not self.gold_triplet_ids:
            raise ValueError(f"case {self.utterance_id!r}: no gold ids")
        if len(set(self.ranked_ids)) != len(self.ranked_ids):
            raise ValueError(f"case {self.utterance_id!r}: ranked ids not unique")


@dataclass(frozen=True)
class TsrCase:
    """One hypothesis and the term translations it is expected to contain."""

    utterance_id: str
    hypothesis: str
    term_targets: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "term_targets", tuple(self.term_targets))
        if not self.term_targets:
            raise ValueError(f"case {self.utterance_id!r}: no term targets")
        if any(not t for t in self.term_targets):
            raise ValueError(f"case {self.utterance_id!r}: empty term target")


@dataclass(frozen=True)
class LossCase:
    sim_pos: float
    sim_negs: tuple[float, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "sim_negs", tuple(float(s) for s in self.sim_negs))
        if not math.isfinite(self.sim_pos) or any(
            not math.isfinite(s) for s in self.sim_negs
        ):
            raise ValueError("similarities must be finite")


def hits_counts(cases: Sequence[RetrievalEvalCase], n: int) -> tuple[int, int]:
    """(hit pairs, total pairs) where a pair is (case, gold id)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not cases:
        raise EmptyCases("no retrieval cases")
    hits = 0
    total = 0
    for case in cases:
        top = set(case.ranked_ids[:n])
        for gold in case.gold_triplet_ids:
            total += 1
            if gold in top:
                hits += 1
    return hits, total


def hits_at_n(cases: Sequence[RetrievalEvalCase], n: int) -> float:
    """Fraction of gold ids found within the first n ranked ids."""
    hits, total = hits_counts(cases, n)
    return hits / total


def tsr_counts(cases: Sequence[TsrCase]) -> tuple[int, int]:
    """(successful terms, total terms) under exact-substring matching."""
    if not cases:
        raise EmptyCases("no TSR cases")
    successes = 0
    total = 0
    for case in cases:
        hypothesis = strip_tags(case.hypothesis)
        for target in case.term_targets:
            total += 1
            if target in hypothesis:
                successes += 1
    return successes, total


def term_success_rate(cases: Sequence[TsrCase]) -> float:
    """Fraction of required term translations present in their hypotheses."""
    successes, total = tsr_counts(cases)
    return successes / total


def levenshtein(a: str, b: str) -> int:
    """Edit distance over unicode code points (insert/delete/substitute)."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ch_a in enumerate(a, start=1):
        current = [i]
        for j, ch_b in enumerate(b, start=1):
            current.append(
                min(
                    previous[j] + 1,  # delete
                    current[j - 1] + 1,  # insert
                    previous[j - 1] + (ch_a != ch_b),  # substitute
                )
            )
        previous = current
    return previous[-1]


class FilterDecision(Enum):
    KEEP = "keep"
    DISCARD = "discard"


def _normalize(text: str) -> str:
    return " ".join(text.lower().split())


def asr_filter(term: str, asr_transcript: str) -> FilterDecision:
    """Keep a synthesized term iff its transcript is within edit distance 3.

    Both sides are lowercased and whitespace-collapsed first, so pure
    casing or spacing differences never discard a term.
    """
    distance = levenshtein(_normalize(term), _normalize(asr_transcript))
    return FilterDecision.KEEP if distance <= ASR_EDIT_THRESHOLD else FilterDecision.DISCARD


def contrastive_loss(case: LossCase) -> float:
    """-log( e^pos / (e^pos + sum_i e^neg_i) ), in log-sum-exp form.

    With no negatives the ratio is 1, so the loss is exactly 0.0; the
    shifted form keeps it finite and non-negative for any finite inputs.
    """
    values = (case.sim_pos, *case.sim_negs)
    peak = max(values)
    total = math.fsum(math.exp(v - peak) for v in values)
    return (peak + math.log(total)) - case.sim_pos
