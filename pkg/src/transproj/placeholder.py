"""Indexed placeholder masking and index-aligned reinsertion.

Entity spans are replaced by ``[*i*]`` sentinels (0-based, in order of
appearance) before translation, so an MT engine can move an entity without
losing track of which one it is. On the way back, hits are detected with a
deliberately tolerant grammar — engines like to add spaces inside the
brackets or localize the digits — normalized, and each placeholder is
replaced by the separately translated entity with matching index.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .conll_io import Tag, TaggedSentence
from .spans import EntitySpan, extract_spans

# Failure reasons owned by this module (consumed by the pipeline's filter).
REASON_COUNT_MISMATCH = "placeholder-count-mismatch"
REASON_DUPLICATE = "duplicate-placeholder"

# "[", optional whitespace, "*", optional whitespace, 1+ digits, optional
# whitespace, "*", optional whitespace, "]". Digits may be ASCII,
# Arabic-Indic (U+0660-0669) or Extended Arabic-Indic (U+06F0-06F9).
_DIGITS = "0-9٠-٩۰-۹"
PLACEHOLDER_RE = re.compile(rf"\[\s*\*\s*([{_DIGITS}]+)\s*\*\s*\]")

_DIGIT_MAP = {chr(0x0660 + i): str(i) for i in range(10)}
_DIGIT_MAP.update({chr(0x06F0 + i): str(i) for i in range(10)})


class PatternCollision(ValueError):
    pass


class UnknownIndex(ValueError):
    pass


class DuplicateIndex(ValueError):
    pass


class EmptyEntityTranslation(ValueError):
    pass


@dataclass(frozen=True)
class PlaceholderHit:
    """One placeholder found in scanned text."""

    index: int
    start: int  # code-point offsets, half-open
    end: int
    text: str


@dataclass(frozen=True)
class MaskedSentence:
    """Template with ``[*i*]`` sentinels plus the masked entities in order."""

    template: str
    entities: tuple[EntitySpan, ...]


def placeholder(index: int) -> str:
    return f"[*{index}*]"


def find_placeholders(text: str) -> list[PlaceholderHit]:
    """Scan left to right for tolerant placeholder matches.

    Indices are normalized to ASCII decimal; regions that do not parse are
    simply not hits.
    """
    hits = []
    for m in PLACEHOLDER_RE.finditer(text):
        digits = "".join(_DIGIT_MAP.get(ch, ch) for ch in m.group(1))
        hits.append(PlaceholderHit(int(digits), m.start(), m.end(), m.group(0)))
    return hits


def mask(sentence: TaggedSentence) -> MaskedSentence:
    """Replace each entity span with its indexed placeholder.

    Raises PatternCollision when the source text itself contains anything
    the tolerant grammar would read as a placeholder — such a sentence
    cannot be realigned reliably and must be excluded.
    """
    spans = extract_spans(sentence)
    for pos, token in enumerate(sentence.tokens):
        if PLACEHOLDER_RE.search(token):
            raise PatternCollision(f"token {token!r} at position {pos} matches the placeholder pattern")

    parts = []
    i = 0
    span_idx = 0
    while i < len(sentence.tokens):
        if span_idx < len(spans) and spans[span_idx].start == i:
            parts.append(placeholder(span_idx))
            i = spans[span_idx].end
            span_idx += 1
        else:
            parts.append(sentence.tokens[i])
            i += 1
    template = " ".join(parts)

    # Adjacent source tokens may jointly form a pattern the per-token check
    # cannot see ("[*" + "0*]"); the assembled template must scan back to
    # exactly the placeholders inserted above.
    if [h.index for h in find_placeholders(template)] != list(range(len(spans))):
        raise PatternCollision("source tokens combine into a placeholder-like pattern")

    return MaskedSentence(template, tuple(spans))


def count_check(masked: MaskedSentence, translated_template: str) -> str | None:
    """Check that translation preserved the placeholder multiset.

    Returns None on pass, otherwise the failure reason: a repeated index is
    ``duplicate-placeholder``, any other deviation from the exact index set
    {0..n-1} is ``placeholder-count-mismatch``.
    """
    indices = [h.index for h in find_placeholders(translated_template)]
    if len(indices) != len(set(indices)):
        return REASON_DUPLICATE
    if set(indices) != set(range(len(masked.entities))):
        return REASON_COUNT_MISMATCH
    return None


def unmask(
    translated_template: str,
    translated_entities: list[str],
    labels: list[str],
    origin_index: int = 0,
) -> TaggedSentence:
    """Insert translated entities back into a translated template.

    Placeholder i (wherever translation moved it) is expanded to the
    whitespace-split tokens of ``translated_entities[i]``, tagged
    B-labels[i] then I-labels[i]; every other token is tagged O.
    """
    if len(translated_entities) != len(labels):
        raise ValueError(
            f"{len(translated_entities)} entity translations vs {len(labels)} labels"
        )
    for idx, entity in enumerate(translated_entities):
        if not entity.strip():
            raise EmptyEntityTranslation(f"entity {idx} translated to whitespace")

    hits = find_placeholders(translated_template)
    seen = set()
    for hit in hits:
        if hit.index >= len(translated_entities):
            raise UnknownIndex(f"placeholder index {hit.index} but only {len(translated_entities)} entities")
        if hit.index in seen:
            raise DuplicateIndex(f"placeholder index {hit.index} occurs more than once")
        seen.add(hit.index)

    # Swap each hit for a sentinel token padded with spaces so placeholders
    # glued to punctuation split off cleanly, then tokenize on whitespace.
    base = ""
    while base in translated_template:
        base += ""
    pieces = []
    last = 0
    for k, hit in enumerate(hits):
        pieces.append(translated_template[last:hit.start])
        pieces.append(f" {base}{k} ")
        last = hit.end
    pieces.append(translated_template[last:])
    sentinel_to_hit = {f"{base}{k}": hit for k, hit in enumerate(hits)}

    tokens: list[str] = []
    tags: list[Tag] = []
    for word in "".join(pieces).split():
        hit = sentinel_to_hit.get(word)
        if hit is None:
            tokens.append(word)
            tags.append(Tag.outside())
        else:
            label = labels[hit.index]
            for j, ent_word in enumerate(translated_entities[hit.index].split()):
                tokens.append(ent_word)
                tags.append(Tag.begin(label) if j == 0 else Tag.inside(label))
    return TaggedSentence(tokens, tags, origin_index)
