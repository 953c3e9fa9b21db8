"""Instruction-prompt assembly and the <Term> reference transform.

Prompt strings are frozen templates — downstream models were conditioned
on the exact bytes, so building them is pure string concatenation with
no normalization, trimming, or reflowing. Three styles are supported:
the word+audio dictionary prompt, the word-only dictionary variant, and
the single demonstration-pair variant.

The tag transform inserts a literal ``<Term> `` marker before every
occurrence of each term translation in a reference, and
:func:`strip_tags` undoes it exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .errors import AlreadyTagged, EmptyTripletList

TAG = "<Term>"
TAG_SP = "<Term> "


class PromptStyle(Enum):
    LOCATE_FOCUS = "locate_focus"
    SALM = "salm"
    RETRIEVE_DEMONSTRATE = "retrieve_demonstrate"


_PREAMBLE = {
    PromptStyle.LOCATE_FOCUS: (
        "I've provided a selection of words along with their audio from a "
        "dictionary. You can utilize these words for the upcoming speech "
        "translations. But please note that some of them may include "
        "information unrelated to the utterance. Bilingual words: "
    ),
    PromptStyle.SALM: (
        "I've provided a selection of words from a dictionary. You can "
        "utilize these words for the upcoming speech translations. But "
        "please note that some of them may include information unrelated "
        "to the utterance. Bilingual words: "
    ),
    PromptStyle.RETRIEVE_DEMONSTRATE: (
        "I have provided a pair of sentences that include important "
        "entities. You can use these entities for the upcoming speech "
        "translations. But please note that some of them may include "
        "information unrelated to the utterance. "
    ),
}


@dataclass(frozen=True)
class PromptSpec:
    """Everything needed to render one instruction prompt.

    ``triplets`` holds (term, audio placeholder path, translation) in the
    order they should appear; the demonstration style takes exactly one.
    """

    style: PromptStyle
    src_lang: str
    tgt_lang: str
    triplets: Sequence[tuple[str, str, str]]
    utterance_audio: str


def build_prompt(spec: PromptSpec) -> str:
    if len(spec.triplets) == 0:
        raise EmptyTripletList("prompt requires at least one knowledge entry")
    if spec.style is PromptStyle.RETRIEVE_DEMONSTRATE:
        if len(spec.triplets) != 1:
            raise ValueError(
                f"demonstration prompts take exactly one pair, got {len(spec.triplets)}"
            )
        _term, audio, translation = spec.triplets[0]
        body = f"Audio: <audio>{audio}</audio>, Translation: {translation}"
    else:
        body = ", ".join(
            f"Word: {term}, Audio: <audio>{audio}</audio>, Translation: {translation}"
            for term, audio, translation in spec.triplets
        )
    return (
        _PREAMBLE[spec.style]
        + body
        + f" . Translate from {spec.src_lang} to {spec.tgt_lang}: "
        + f"<audio>{spec.utterance_audio}</audio>"
    )


@dataclass(frozen=True)
class TaggedReference:
    """A reference with tags inserted; spans are (offset in text, translation)."""

    text: str
    tag_spans: tuple[tuple[int, str], ...] = field(default_factory=tuple)


def _claim_occurrences(
    reference: str, term_translations: Sequence[str]
) -> list[tuple[int, str]]:
    """Claim non-overlapping occurrence spans, longest translation first."""
    # stable sort keeps input order among equal-length translations
    ordered = sorted(
        dict.fromkeys(t for t in term_translations if t), key=len, reverse=True
    )
    claimed: list[tuple[int, int]] = []  # (start, end) on the original string

    def overlaps(start: int, end: int) -> bool:
        return any(start < c_end and c_start < end for c_start, c_end in claimed)

    claims: list[tuple[int, str]] = []
    for translation in ordered:
        pos = 0
        while True:
            start = reference.find(translation, pos)
            if start < 0:
                break
            end = start + len(translation)
            if overlaps(start, end):
                pos = start + 1
            else:
                claimed.append((start, end))
                claims.append((start, translation))
                pos = end
    claims.sort(key=lambda c: c[0])
    return claims


def tag_reference(
    reference: str, term_translations: Sequence[str]
) -> TaggedReference:
    """Insert ``<Term> `` before every occurrence of each translation.

    Matching is exact and case-sensitive, resolved longest-translation
    first and left to right on the original string; claimed spans are
    never re-matched, so tags cannot nest.
    """
    if TAG in reference:
        raise AlreadyTagged(f"reference already contains {TAG!r}")
    claims = _claim_occurrences(reference, term_translations)
    parts: list[str] = []
    spans: list[tuple[int, str]] = []
    cursor = 0
    out_len = 0
    for start, translation in claims:
        parts.append(reference[cursor:start])
        out_len += start - cursor
        spans.append((out_len, translation))
        parts.append(TAG_SP)
        out_len += len(TAG_SP)
        cursor = start
    parts.append(reference[cursor:])
    return TaggedReference(text="".join(parts), tag_spans=tuple(spans))


def strip_tags(text: str) -> str:
    """Remove every ``<Term> `` (and bare ``<Term>``) marker."""
    return text.replace(TAG_SP, "").replace(TAG, "")
