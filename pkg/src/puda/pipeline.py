"""Transformation engine: page text extraction, per-page processing, per-user
aggregation, threshold filtering, closed-set category subsets, and
condition-specific context assembly."""

from __future__ import annotations

from dataclasses import dataclass, field
from html.parser import HTMLParser
from typing import Sequence

from puda.backends import (
    BackendError,
    BackendSet,
    BackendTimeout,
    MalformedResponse,
    StubBackend,
    TransportError,
)
from puda.model import (
    CaptureRef,
    ConditionKind,
    GranularityCondition,
    HistoryEntry,
    Keyword,
    PageCapture,
    PageRecord,
    Profile,
    UserDataset,
    canonical_json_bytes,
    condition_scope,
    utc_now,
)
from puda.taxonomy import CategoryPath, CategoryTaxonomy, project_tier, validate_subset

PIPELINE_VERSION = "1.0.0"
DEFAULT_KEYWORDS_PER_PAGE = 20
DEFAULT_CATEGORIES_PER_TIER = 10

_SKIPPED_ELEMENTS = frozenset({"script", "style", "head", "template", "noscript"})


class PageProcessingError(Exception):
    """A page failed processing; carries the capture reference for reporting."""

    def __init__(self, capture_ref: CaptureRef, cause: Exception):
        super().__init__(f"{capture_ref.url} @ {capture_ref.captured_at}: {cause}")
        self.capture_ref = capture_ref
        self.cause = cause


class _TextExtractor(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self._chunks: list[str] = []
        self._skip_depth = 0

    def handle_starttag(self, tag, attrs):
        if tag in _SKIPPED_ELEMENTS:
            self._skip_depth += 1

    def handle_endtag(self, tag):
        if tag in _SKIPPED_ELEMENTS and self._skip_depth > 0:
            self._skip_depth -= 1

    def handle_data(self, data):
        if self._skip_depth == 0:
            self._chunks.append(data)

    def text(self) -> str:
        return " ".join(" ".join(self._chunks).split())


def extract_text(html_body: str) -> str:
    """Visible text of a page: script/style/head dropped, tags stripped,
    entities decoded, whitespace collapsed. Never raises on bad markup."""
    parser = _TextExtractor()
    parser.feed(html_body)
    parser.close()
    return parser.text()


def process_page(
    capture: PageCapture,
    backends: BackendSet,
    max_keywords: int = DEFAULT_KEYWORDS_PER_PAGE,
) -> PageRecord:
    """Per-page stage: extract text, summarize (short derives from long),
    extract keywords. Failures are wrapped with the capture reference."""
    ref = CaptureRef(capture.user_id, capture.url, capture.captured_at)
    try:
        text = extract_text(capture.html_body)
        summary_long = backends.summarize(text, "long")
        summary_short = backends.summarize(summary_long, "short")
        keywords = backends.extract_keywords(text, max_keywords)
        deduped: dict[str, Keyword] = {}
        for kw in keywords:
            deduped.setdefault(kw.text, kw)
        return PageRecord(
            capture_ref=ref,
            title=capture.title,
            summary_long=summary_long,
            summary_short=summary_short,
            keywords=tuple(deduped.values()),
        )
    except Exception as exc:
        raise PageProcessingError(ref, exc) from exc


def aggregate_history(records: Sequence[PageRecord], variant: str) -> list[HistoryEntry]:
    """One entry per record, newest first; timestamp ties break by URL."""
    if variant not in ("short", "long"):
        raise ValueError(f"variant must be 'short' or 'long', got {variant!r}")
    entries = [
        HistoryEntry(
            url=r.capture_ref.url,
            title=r.title,
            summary=r.summary_long if variant == "long" else r.summary_short,
            captured_at=r.capture_ref.captured_at,
        )
        for r in records
    ]
    entries.sort(key=lambda e: e.url)
    entries.sort(key=lambda e: e.captured_at, reverse=True)
    return entries


def aggregate_keywords(records: Sequence[PageRecord]) -> list[Keyword]:
    """Merge page keywords by normalized text. The kept score is the maximum
    across pages; the kept sentiment comes from the max-scoring occurrence
    (earliest capture, then URL, on ties)."""
    best: dict[str, tuple[Keyword, CaptureRef]] = {}
    for record in records:
        for kw in record.keywords:
            current = best.get(kw.text)
            if current is None:
                best[kw.text] = (kw, record.capture_ref)
                continue
            kept, kept_ref = current
            candidate_key = (-kw.score, record.capture_ref.captured_at, record.capture_ref.url)
            kept_key = (-kept.score, kept_ref.captured_at, kept_ref.url)
            if candidate_key < kept_key:
                best[kw.text] = (kw, record.capture_ref)
    merged = [kw for kw, _ in best.values()]
    merged.sort(key=lambda k: (-k.score, k.text))
    return merged


def filter_keywords(keywords: Sequence[Keyword], threshold: float) -> list[Keyword]:
    """Keep exactly the keywords scoring at or above the threshold."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must be in [0,1], got {threshold}")
    return [k for k in keywords if k.score >= threshold]


def compose_category_context(
    history_long: Sequence[HistoryEntry], keywords: Sequence[Keyword]
) -> str:
    """Context text fed to the categorizer: every long-summary history entry
    plus every keyword with its sentiment and score, unfiltered."""
    lines: list[str] = []
    for entry in history_long:
        lines.append(f"{entry.title} | {entry.url}")
        lines.append(entry.summary)
    for kw in keywords:
        lines.append(f"{kw.text} ({kw.sentiment.value}, {kw.score})")
    return "\n".join(lines)


def build_category_subset(
    history_long: Sequence[HistoryEntry],
    keywords: Sequence[Keyword],
    taxonomy: CategoryTaxonomy,
    tier: int,
    backends: BackendSet,
    max_items: int = DEFAULT_CATEGORIES_PER_TIER,
    provenance: dict[str, str] | None = None,
) -> list[CategoryPath]:
    """Closed-set category extraction for one tier.

    Whatever the backend emits goes through taxonomy membership validation, so
    the result is always a subset of project_tier(taxonomy, tier). Transport
    failures and empty/invalid answers fall back to the deterministic stub
    categorizer; fallback use is recorded in `provenance` when given.
    """
    allowed = project_tier(taxonomy, tier)
    if not allowed:
        raise ValueError(f"taxonomy has no paths at tier {tier}")
    context = compose_category_context(history_long, keywords)
    if not history_long and not keywords:
        return []

    fallback_note: str | None = None
    try:
        candidates = backends.categorize(context, allowed, max_items)
    except (TransportError, BackendTimeout, MalformedResponse) as exc:
        candidates = []
        fallback_note = f"backend error: {type(exc).__name__}"
    subset = validate_subset(taxonomy, candidates, tier)

    primary_is_stub = type(backends.categorizer) is StubBackend
    if fallback_note is None and not subset and not primary_is_stub:
        fallback_note = "backend returned no valid categories"
    if fallback_note is not None:
        stub_candidates = StubBackend().categorize(context, allowed, max_items)
        subset = validate_subset(taxonomy, stub_candidates, tier)
        if provenance is not None:
            provenance[f"categories:{tier}"] = f"stub fallback ({fallback_note})"
    return subset


def build_dataset(
    user_id: str,
    profile: Profile,
    records: Sequence[PageRecord],
    taxonomy: CategoryTaxonomy,
    backends: BackendSet,
    max_categories_per_tier: int = DEFAULT_CATEGORIES_PER_TIER,
) -> UserDataset:
    """Assemble the full per-user dataset: both history variants, merged
    keywords, and a category subset per tier."""
    history_long = aggregate_history(records, "long")
    history_short = aggregate_history(records, "short")
    keywords = aggregate_keywords(records)
    provenance: dict[str, str] = {}
    categories = {
        tier: tuple(
            build_category_subset(
                history_long,
                keywords,
                taxonomy,
                tier,
                backends,
                max_categories_per_tier,
                provenance,
            )
        )
        for tier in (1, 2, 3)
    }
    return UserDataset(
        user_id=user_id,
        profile=profile,
        history_long=tuple(history_long),
        history_short=tuple(history_short),
        keywords=tuple(keywords),
        categories=categories,
        built_at=utc_now(),
        pipeline_version=PIPELINE_VERSION,
        provenance=provenance,
    )


@dataclass(frozen=True)
class ContextBundle:
    """The context payload assembled for one condition; `serialized_bytes`
    measures its canonical JSON form (the bytes a consumer receives)."""

    condition: GranularityCondition
    profile: Profile | None = None
    categories: tuple[CategoryPath, ...] | None = None
    keywords: tuple[Keyword, ...] | None = None
    history: tuple[HistoryEntry, ...] | None = None
    serialized_bytes: int = 0

    def payload_dict(self) -> dict:
        payload: dict = {}
        if self.profile is not None:
            payload["profile"] = self.profile.to_dict()
        if self.categories is not None:
            payload["categories"] = [p.canonical for p in self.categories]
        if self.keywords is not None:
            payload["keywords"] = [k.to_dict() for k in self.keywords]
        if self.history is not None:
            payload["history"] = [e.to_dict() for e in self.history]
        return payload

    def payload_bytes(self) -> bytes:
        return canonical_json_bytes(self.payload_dict())


def build_context(dataset: UserDataset, condition: GranularityCondition) -> ContextBundle:
    """Populate exactly the fields the condition's scopes authorize."""
    scopes = condition_scope(condition)
    profile = dataset.profile if scopes else None
    categories = keywords = history = None
    kind = condition.kind
    if kind is ConditionKind.CATEGORIES:
        categories = dataset.categories.get(condition.tier, ())
    elif kind is ConditionKind.KEYWORDS:
        keywords = tuple(filter_keywords(dataset.keywords, condition.threshold))
    elif kind is ConditionKind.HISTORY:
        history = dataset.history_short if condition.variant == "short" else dataset.history_long
    bundle = ContextBundle(
        condition=condition,
        profile=profile,
        categories=categories,
        keywords=keywords,
        history=history,
    )
    return ContextBundle(
        condition=condition,
        profile=profile,
        categories=categories,
        keywords=keywords,
        history=history,
        serialized_bytes=len(bundle.payload_bytes()),
    )
