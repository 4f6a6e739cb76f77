"""End-to-end projection of a tagged corpus through a translation backend.

Per sentence: validate the tag scheme, extract spans, mask them with
indexed placeholders, translate template and entity surfaces, check that
the placeholder multiset survived, reinsert the translated entities, and
re-check token/tag consistency. Any failing stage turns the sentence into
an exclusion with a machine-readable reason instead of an error.
"""

from __future__ import annotations

import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

from . import placeholder as ph
from .backends import (
    Backend,
    BackendCounters,
    BackendError,
    MemoryCache,
    TranslationCache,
    TranslationRequest,
    translate_batch,
)
from .conll_io import DatasetSplit, InvalidSentence, TaggedSentence, validate_scheme
from .placeholder import MaskedSentence

REASON_PATTERN_COLLISION = "pattern-collision"
REASON_COUNT_MISMATCH = ph.REASON_COUNT_MISMATCH
REASON_DUPLICATE = ph.REASON_DUPLICATE
REASON_EMPTY_ENTITY = "empty-entity-translation"
REASON_INVALID_SCHEME = "invalid-scheme"
REASON_TOKEN_TAG_MISMATCH = "token-tag-mismatch"
REASON_BACKEND_FAILURE = "backend-failure"

ALL_REASONS = (
    REASON_PATTERN_COLLISION,
    REASON_COUNT_MISMATCH,
    REASON_DUPLICATE,
    REASON_EMPTY_ENTITY,
    REASON_INVALID_SCHEME,
    REASON_TOKEN_TAG_MISMATCH,
    REASON_BACKEND_FAILURE,
)

POLICY_LENIENT = "lenient"
POLICY_STRICT = "strict"


class AbortedRun(RuntimeError):
    """Raised under the strict policy when the backend fails for good."""


@dataclass(frozen=True)
class ProjectionOutcome:
    """Either a projected sentence or an exclusion, for one source sentence."""

    origin_index: int
    sentence: TaggedSentence | None = None
    reason: str | None = None
    detail: str | None = None

    @property
    def projected(self) -> bool:
        return self.sentence is not None


@dataclass
class SplitCounts:
    total: int = 0
    projected: int = 0
    excluded: int = 0
    dropped_empty: int = 0


@dataclass
class RunReport:
    splits: dict[str, SplitCounts] = field(default_factory=dict)
    reasons: Counter = field(default_factory=Counter)
    backend_calls: int = 0
    texts_translated: int = 0
    cache_hits: int = 0
    duration_seconds: float = 0.0
    config: dict | None = None

    def merge(self, other: "RunReport") -> None:
        for name, counts in other.splits.items():
            mine = self.splits.setdefault(name, SplitCounts())
            mine.total += counts.total
            mine.projected += counts.projected
            mine.excluded += counts.excluded
            mine.dropped_empty += counts.dropped_empty
        self.reasons.update(other.reasons)
        self.backend_calls += other.backend_calls
        self.texts_translated += other.texts_translated
        self.cache_hits += other.cache_hits
        self.duration_seconds += other.duration_seconds

    def to_dict(self) -> dict:
        return {
            "splits": {
                name: {
                    "total": c.total,
                    "projected": c.projected,
                    "excluded": c.excluded,
                    "dropped_empty": c.dropped_empty,
                }
                for name, c in self.splits.items()
            },
            "exclusions_by_reason": dict(self.reasons),
            "backend_calls": self.backend_calls,
            "texts_translated": self.texts_translated,
            "cache_hits": self.cache_hits,
            "duration_seconds": round(self.duration_seconds, 3),
            "config": self.config,
        }

    def render(self) -> str:
        lines = [f"{'split':<8} {'total':>6} {'projected':>10} {'excluded':>9}"]
        for name, c in self.splits.items():
            lines.append(f"{name:<8} {c.total:>6} {c.projected:>10} {c.excluded:>9}")
        if self.reasons:
            lines.append("exclusions by reason:")
            for reason, n in sorted(self.reasons.items()):
                lines.append(f"  {reason}: {n}")
        else:
            lines.append("exclusions by reason: none")
        lines.append(
            f"backend: {self.backend_calls} calls, {self.texts_translated} texts translated, "
            f"{self.cache_hits} cache hits"
        )
        lines.append(f"duration: {self.duration_seconds:.2f} s")
        return "\n".join(lines) + "\n"


def _prepare(sentence: TaggedSentence) -> tuple[MaskedSentence | None, str | None, str | None]:
    """Stages before translation: (masked, reason, detail)."""
    violations = validate_scheme(sentence)
    if violations:
        return None, REASON_INVALID_SCHEME, violations[0].message
    try:
        masked = ph.mask(sentence)
    except ph.PatternCollision as exc:
        return None, REASON_PATTERN_COLLISION, str(exc)
    return masked, None, None


def _finish(
    sentence: TaggedSentence, masked: MaskedSentence, translated: list[str]
) -> ProjectionOutcome:
    """Stages after translation; translated is [template] + entity surfaces."""
    origin = sentence.origin_index
    template = translated[0]
    entities = translated[1:]
    reason = ph.count_check(masked, template)
    if reason is not None:
        return ProjectionOutcome(origin, reason=reason, detail=template)
    try:
        out = ph.unmask(template, entities, [e.label for e in masked.entities], origin)
    except ph.EmptyEntityTranslation as exc:
        return ProjectionOutcome(origin, reason=REASON_EMPTY_ENTITY, detail=str(exc))
    except ph.DuplicateIndex as exc:
        return ProjectionOutcome(origin, reason=REASON_DUPLICATE, detail=str(exc))
    except ph.UnknownIndex as exc:
        return ProjectionOutcome(origin, reason=REASON_COUNT_MISMATCH, detail=str(exc))
    except InvalidSentence as exc:
        return ProjectionOutcome(origin, reason=REASON_TOKEN_TAG_MISMATCH, detail=str(exc))
    if len(out.tokens) != len(out.tags) or not out.tokens or validate_scheme(out):
        return ProjectionOutcome(origin, reason=REASON_TOKEN_TAG_MISMATCH,
                                 detail="post-translation consistency check failed")
    return ProjectionOutcome(origin, sentence=out)


def project_sentence(
    sentence: TaggedSentence,
    backend: Backend,
    source_lang: str,
    target_lang: str,
    *,
    cache: TranslationCache | MemoryCache | None = None,
    counters: BackendCounters | None = None,
    on_error: str = POLICY_LENIENT,
) -> ProjectionOutcome:
    """Project one sentence; every failure mode is an Excluded outcome except
    backend failure under the strict policy, which raises AbortedRun."""
    masked, reason, detail = _prepare(sentence)
    if masked is None:
        return ProjectionOutcome(sentence.origin_index, reason=reason, detail=detail)
    texts = [masked.template] + [e.surface for e in masked.entities]
    request = TranslationRequest(tuple(texts), source_lang, target_lang)
    try:
        translated = translate_batch(request, backend, cache, counters)
    except BackendError as exc:
        if on_error == POLICY_STRICT:
            raise AbortedRun(str(exc)) from exc
        return ProjectionOutcome(sentence.origin_index, reason=REASON_BACKEND_FAILURE, detail=str(exc))
    return _finish(sentence, masked, translated)


def project_split(
    split: DatasetSplit,
    backend: Backend,
    source_lang: str,
    target_lang: str,
    *,
    parallelism: int = 1,
    batch: int = 32,
    cache: TranslationCache | MemoryCache | None = None,
    on_error: str = POLICY_LENIENT,
) -> tuple[DatasetSplit, list[ProjectionOutcome], RunReport]:
    """Project a whole split.

    Unique texts are collected across the split (each surface translated at
    most once per run), batched ``batch`` at a time, and translated on up to
    ``parallelism`` workers. Output order, and output bytes, do not depend
    on parallelism for a deterministic backend.
    """
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    if batch < 1:
        raise ValueError("batch must be >= 1")
    started = time.monotonic()

    prepared: list[tuple[TaggedSentence, MaskedSentence | None, str | None, str | None]] = []
    unique: dict[str, None] = {}
    for sentence in split.sentences:
        masked, reason, detail = _prepare(sentence)
        prepared.append((sentence, masked, reason, detail))
        if masked is not None:
            unique.setdefault(masked.template)
            for span in masked.entities:
                unique.setdefault(span.surface)

    counters = BackendCounters()
    unique_texts = list(unique)
    batches = [unique_texts[i:i + batch] for i in range(0, len(unique_texts), batch)]
    translations: dict[str, str] = {}
    failures: dict[str, str] = {}

    def run_batch(texts: list[str]):
        request = TranslationRequest(tuple(texts), source_lang, target_lang)
        return translate_batch(request, backend, cache, counters)

    if batches:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            settled = list(pool.map(lambda b: _settle(run_batch, b), batches))
        for texts, result, error in settled:
            if error is None:
                translations.update(zip(texts, result))
            else:
                if on_error == POLICY_STRICT:
                    raise AbortedRun(error)
                for t in texts:
                    failures[t] = error

    outcomes: list[ProjectionOutcome] = []
    for sentence, masked, reason, detail in prepared:
        if masked is None:
            outcomes.append(ProjectionOutcome(sentence.origin_index, reason=reason, detail=detail))
            continue
        texts = [masked.template] + [e.surface for e in masked.entities]
        failed = next((t for t in texts if t in failures), None)
        if failed is not None:
            outcomes.append(
                ProjectionOutcome(
                    sentence.origin_index, reason=REASON_BACKEND_FAILURE, detail=failures[failed]
                )
            )
            continue
        outcomes.append(_finish(sentence, masked, [translations[t] for t in texts]))

    projected = [o.sentence for o in outcomes if o.projected]
    out_split = DatasetSplit(
        split.name,
        [replace(s, origin_index=i) for i, s in enumerate(projected)],
    )

    report = RunReport()
    counts = SplitCounts(
        total=len(split.sentences),
        projected=len(projected),
        excluded=len(outcomes) - len(projected),
        dropped_empty=split.dropped_empty,
    )
    report.splits[split.name] = counts
    report.reasons.update(o.reason for o in outcomes if o.reason)
    report.backend_calls = counters.backend_calls
    report.texts_translated = counters.texts_translated
    report.cache_hits = counters.cache_hits
    report.duration_seconds = time.monotonic() - started
    return out_split, outcomes, report


def _settle(fn, texts):
    """Run one batch, capturing backend errors instead of raising in-pool."""
    try:
        return texts, fn(texts), None
    except BackendError as exc:
        return texts, None, str(exc)
