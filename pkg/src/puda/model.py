"""Shared domain types, canonical JSON serialization, and the privacy ladder.

Everything here is an immutable value type; instances are safe to share
across threads.
"""

from __future__ import annotations

import hashlib
import json
import re
import unicodedata
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone
from enum import Enum
from typing import Any, Iterable, Mapping
from urllib.parse import urlparse

from puda.taxonomy import CategoryPath


class ValidationError(ValueError):
    """A value violates a domain invariant; `field` names the offender."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


# --- canonical serialization -------------------------------------------------

def canonical_json(value: Any) -> str:
    """Minified JSON with sorted keys; the one serialization used for byte
    counts, checksums, and on-disk snapshots."""
    return json.dumps(value, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def canonical_json_bytes(value: Any) -> bytes:
    return canonical_json(value).encode("utf-8")


def format_ts(dt: datetime) -> str:
    """RFC 3339 UTC timestamp with millisecond precision."""
    dt = dt.astimezone(timezone.utc)
    return f"{dt:%Y-%m-%dT%H:%M:%S}.{dt.microsecond // 1000:03d}Z"


def parse_ts(text: str) -> datetime:
    raw = text.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(raw)
    except ValueError as exc:
        raise ValidationError(f"bad timestamp {text!r}") from exc
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return truncate_ms(dt.astimezone(timezone.utc))


def truncate_ms(dt: datetime) -> datetime:
    return dt.replace(microsecond=(dt.microsecond // 1000) * 1000)


def utc_now() -> datetime:
    return truncate_ms(datetime.now(timezone.utc))


def normalize_keyword_text(text: str) -> str:
    """Keyword identity: NFC, case-folded, trimmed."""
    return unicodedata.normalize("NFC", text).casefold().strip()


# user ids become directory names in the store, so keep them path-safe
_USER_ID_RE = re.compile(r"^[A-Za-z0-9][A-Za-z0-9._-]{0,63}$")


def validate_user_id(user_id: str) -> str:
    if not isinstance(user_id, str) or not _USER_ID_RE.match(user_id):
        raise ValidationError(
            "user_id must be 1-64 chars of [A-Za-z0-9._-], starting alphanumeric",
            field="user_id",
        )
    return user_id


# --- domain types ------------------------------------------------------------

class Sentiment(str, Enum):
    POSITIVE = "positive"
    NEUTRAL = "neutral"
    NEGATIVE = "negative"


@dataclass(frozen=True)
class Keyword:
    """A scored, sentiment-labeled keyword; text is stored pre-normalized."""

    text: str
    sentiment: Sentiment
    score: float

    def __post_init__(self):
        normalized = normalize_keyword_text(self.text)
        if not normalized:
            raise ValidationError("keyword text empty after normalization", field="text")
        object.__setattr__(self, "text", normalized)
        object.__setattr__(self, "sentiment", Sentiment(self.sentiment))
        if not isinstance(self.score, (int, float)) or not 0.0 <= float(self.score) <= 1.0:
            raise ValidationError(f"score must be in [0,1], got {self.score!r}", field="score")
        object.__setattr__(self, "score", float(self.score))

    def to_dict(self) -> dict[str, Any]:
        return {"text": self.text, "sentiment": self.sentiment.value, "score": self.score}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Keyword:
        try:
            return cls(text=data["text"], sentiment=Sentiment(data["sentiment"]), score=data["score"])
        except (KeyError, ValueError, TypeError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"bad keyword object: {exc}") from exc


CLOCK_SKEW = timedelta(minutes=5)


@dataclass(frozen=True)
class PageCapture:
    """One raw browser record; the most sensitive data in the system."""

    url: str
    title: str
    html_body: str
    captured_at: datetime
    user_id: str

    def validate(self, now: datetime | None = None) -> PageCapture:
        parsed = urlparse(self.url)
        if not parsed.scheme or not parsed.netloc:
            raise ValidationError(f"url is not an absolute URI: {self.url!r}", field="url")
        if not self.html_body:
            raise ValidationError("html_body must be non-empty", field="html_body")
        validate_user_id(self.user_id)
        now = now or utc_now()
        if self.captured_at > now + CLOCK_SKEW:
            raise ValidationError(
                f"captured_at {format_ts(self.captured_at)} is in the future", field="captured_at"
            )
        return self

    def to_dict(self) -> dict[str, Any]:
        return {
            "url": self.url,
            "title": self.title,
            "html_body": self.html_body,
            "captured_at": format_ts(self.captured_at),
            "user_id": self.user_id,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> PageCapture:
        for name in ("url", "title", "html_body", "captured_at", "user_id"):
            if name not in data:
                raise ValidationError(f"missing field {name!r}", field=name)
            if name != "captured_at" and not isinstance(data[name], str):
                raise ValidationError(f"field {name!r} must be a string", field=name)
        return cls(
            url=data["url"],
            title=data["title"],
            html_body=data["html_body"],
            captured_at=parse_ts(data["captured_at"]) if isinstance(data["captured_at"], str) else _bad_ts(),
            user_id=data["user_id"],
        )


def _bad_ts() -> datetime:
    raise ValidationError("captured_at must be an RFC 3339 string", field="captured_at")


@dataclass(frozen=True)
class CaptureRef:
    """Stable reference to the capture a derived record came from."""

    user_id: str
    url: str
    captured_at: datetime

    def to_dict(self) -> dict[str, Any]:
        return {"user_id": self.user_id, "url": self.url, "captured_at": format_ts(self.captured_at)}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> CaptureRef:
        return cls(data["user_id"], data["url"], parse_ts(data["captured_at"]))


def word_count(text: str) -> int:
    return len(text.split())


@dataclass(frozen=True)
class PageRecord:
    """Per-page processed output: two summaries plus scored keywords."""

    capture_ref: CaptureRef
    title: str
    summary_long: str
    summary_short: str
    keywords: tuple[Keyword, ...]

    def __post_init__(self):
        if word_count(self.summary_short) > word_count(self.summary_long):
            raise ValidationError("summary_short longer than summary_long", field="summary_short")
        texts = [k.text for k in self.keywords]
        if len(texts) != len(set(texts)):
            raise ValidationError("keywords not deduplicated by normalized text", field="keywords")
        object.__setattr__(self, "keywords", tuple(self.keywords))

    def to_dict(self) -> dict[str, Any]:
        return {
            "capture_ref": self.capture_ref.to_dict(),
            "title": self.title,
            "summary_long": self.summary_long,
            "summary_short": self.summary_short,
            "keywords": [k.to_dict() for k in self.keywords],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> PageRecord:
        return cls(
            capture_ref=CaptureRef.from_dict(data["capture_ref"]),
            title=data["title"],
            summary_long=data["summary_long"],
            summary_short=data["summary_short"],
            keywords=tuple(Keyword.from_dict(k) for k in data["keywords"]),
        )


@dataclass(frozen=True)
class Profile:
    """Static account-style basics; treated as the mandatory baseline for
    every data-providing condition."""

    name: str
    age: int
    date_of_birth: date
    gender: str
    address: str

    def __post_init__(self):
        for name in ("name", "gender", "address"):
            if not getattr(self, name):
                raise ValidationError(f"profile field {name!r} must be present", field=name)
        if not isinstance(self.age, int) or self.age < 0:
            raise ValidationError("age must be a non-negative integer", field="age")

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "age": self.age,
            "date_of_birth": self.date_of_birth.isoformat(),
            "gender": self.gender,
            "address": self.address,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Profile:
        try:
            dob = date.fromisoformat(data["date_of_birth"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError("bad or missing date_of_birth", field="date_of_birth") from exc
        for name in ("name", "age", "gender", "address"):
            if name not in data:
                raise ValidationError(f"missing profile field {name!r}", field=name)
        return cls(
            name=data["name"],
            age=data["age"],
            date_of_birth=dob,
            gender=data["gender"],
            address=data["address"],
        )


@dataclass(frozen=True)
class HistoryEntry:
    url: str
    title: str
    summary: str
    captured_at: datetime

    def __post_init__(self):
        if not self.summary:
            raise ValidationError("history entry summary must be non-empty", field="summary")

    def to_dict(self) -> dict[str, Any]:
        return {
            "url": self.url,
            "title": self.title,
            "summary": self.summary,
            "captured_at": format_ts(self.captured_at),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> HistoryEntry:
        return cls(data["url"], data["title"], data["summary"], parse_ts(data["captured_at"]))


@dataclass(frozen=True)
class UserDataset:
    """Per-user aggregate of everything the provision endpoints can serve."""

    user_id: str
    profile: Profile
    history_long: tuple[HistoryEntry, ...]
    history_short: tuple[HistoryEntry, ...]
    keywords: tuple[Keyword, ...]
    categories: Mapping[int, tuple[CategoryPath, ...]]
    built_at: datetime
    pipeline_version: str
    provenance: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "history_long", tuple(self.history_long))
        object.__setattr__(self, "history_short", tuple(self.history_short))
        object.__setattr__(self, "keywords", tuple(self.keywords))
        object.__setattr__(
            self, "categories", {int(k): tuple(v) for k, v in dict(self.categories).items()}
        )
        object.__setattr__(self, "provenance", dict(self.provenance))
        for name in ("history_long", "history_short"):
            entries = getattr(self, name)
            stamps = [e.captured_at for e in entries]
            if stamps != sorted(stamps, reverse=True):
                raise ValidationError(f"{name} not sorted by captured_at descending", field=name)
        texts = [k.text for k in self.keywords]
        if len(texts) != len(set(texts)):
            raise ValidationError("merged keywords not deduplicated", field="keywords")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, UserDataset):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def to_dict(self) -> dict[str, Any]:
        return {
            "user_id": self.user_id,
            "profile": self.profile.to_dict(),
            "history_long": [e.to_dict() for e in self.history_long],
            "history_short": [e.to_dict() for e in self.history_short],
            "keywords": [k.to_dict() for k in self.keywords],
            "categories": {str(t): [p.canonical for p in ps] for t, ps in self.categories.items()},
            "built_at": format_ts(self.built_at),
            "pipeline_version": self.pipeline_version,
            "provenance": dict(self.provenance),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> UserDataset:
        return cls(
            user_id=data["user_id"],
            profile=Profile.from_dict(data["profile"]),
            history_long=tuple(HistoryEntry.from_dict(e) for e in data["history_long"]),
            history_short=tuple(HistoryEntry.from_dict(e) for e in data["history_short"]),
            keywords=tuple(Keyword.from_dict(k) for k in data["keywords"]),
            categories={
                int(t): tuple(CategoryPath.parse(p) for p in ps)
                for t, ps in data["categories"].items()
            },
            built_at=parse_ts(data["built_at"]),
            pipeline_version=data["pipeline_version"],
            provenance=data.get("provenance", {}),
        )

    def content_version(self) -> str:
        """Deterministic version of the dataset content, ignoring built_at."""
        payload = self.to_dict()
        payload.pop("built_at")
        return hashlib.sha256(canonical_json_bytes(payload)).hexdigest()[:12]


# --- granularity conditions and scopes ----------------------------------------

KEYWORD_THRESHOLDS: tuple[float, ...] = (0.90, 0.85, 0.80, 0.75)
HISTORY_VARIANTS: tuple[str, ...] = ("short", "long")

_THRESHOLD_CODES = {0.90: "090", 0.85: "085", 0.80: "080", 0.75: "075"}
_CODE_THRESHOLDS = {v: k for k, v in _THRESHOLD_CODES.items()}


def threshold_code(threshold: float) -> str:
    try:
        return _THRESHOLD_CODES[threshold]
    except KeyError:
        raise ValidationError(f"threshold must be one of {KEYWORD_THRESHOLDS}, got {threshold}")


def code_threshold(code: str) -> float:
    try:
        return _CODE_THRESHOLDS[code]
    except KeyError:
        raise ValidationError(f"unknown threshold code {code!r}")


class ConditionKind(str, Enum):
    NO_DATA = "no_data"
    PROFILE_ONLY = "profile_only"
    CATEGORIES = "categories"
    KEYWORDS = "keywords"
    HISTORY = "history"


class Ordering(Enum):
    MORE_PROTECTIVE = "more_protective"
    EQUAL = "equal"
    LESS_PROTECTIVE = "less_protective"


@dataclass(frozen=True)
class GranularityCondition:
    """One of the 11 user-context conditions; parameters depend on kind."""

    kind: ConditionKind
    tier: int | None = None
    threshold: float | None = None
    variant: str | None = None

    def __post_init__(self):
        kind = ConditionKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is ConditionKind.CATEGORIES:
            if self.tier not in (1, 2, 3) or self.threshold is not None or self.variant is not None:
                raise ValidationError(f"categories condition needs tier 1|2|3, got {self}")
        elif kind is ConditionKind.KEYWORDS:
            if self.threshold not in KEYWORD_THRESHOLDS or self.tier is not None or self.variant is not None:
                raise ValidationError(f"keywords condition needs threshold in {KEYWORD_THRESHOLDS}")
        elif kind is ConditionKind.HISTORY:
            if self.variant not in HISTORY_VARIANTS or self.tier is not None or self.threshold is not None:
                raise ValidationError("history condition needs variant short|long")
        else:
            if self.tier is not None or self.threshold is not None or self.variant is not None:
                raise ValidationError(f"{kind.value} condition takes no parameters")

    @classmethod
    def no_data(cls) -> GranularityCondition:
        return cls(ConditionKind.NO_DATA)

    @classmethod
    def profile_only(cls) -> GranularityCondition:
        return cls(ConditionKind.PROFILE_ONLY)

    @classmethod
    def categories(cls, tier: int) -> GranularityCondition:
        return cls(ConditionKind.CATEGORIES, tier=tier)

    @classmethod
    def keywords(cls, threshold: float) -> GranularityCondition:
        return cls(ConditionKind.KEYWORDS, threshold=threshold)

    @classmethod
    def history(cls, variant: str) -> GranularityCondition:
        return cls(ConditionKind.HISTORY, variant=variant)

    @property
    def label(self) -> str:
        if self.kind is ConditionKind.CATEGORIES:
            return f"categories:{self.tier}"
        if self.kind is ConditionKind.KEYWORDS:
            return f"keywords:{threshold_code(self.threshold)}"
        if self.kind is ConditionKind.HISTORY:
            return f"history:{self.variant}"
        return self.kind.value

    @classmethod
    def from_label(cls, label: str) -> GranularityCondition:
        head, _, arg = label.partition(":")
        if head == "categories" and arg in ("1", "2", "3"):
            return cls.categories(int(arg))
        if head == "keywords" and arg in _CODE_THRESHOLDS:
            return cls.keywords(code_threshold(arg))
        if head == "history" and arg in HISTORY_VARIANTS:
            return cls.history(arg)
        if not arg and head in (ConditionKind.NO_DATA.value, ConditionKind.PROFILE_ONLY.value):
            return cls(ConditionKind(head))
        raise ValidationError(f"unknown condition label {label!r}")


NO_DATA = GranularityCondition.no_data()
PROFILE_ONLY = GranularityCondition.profile_only()

# Most protective first. Profile-only sits between the no-data baseline and
# every behavioral-data condition because it carries no behavioral data.
ALL_CONDITIONS: tuple[GranularityCondition, ...] = (
    NO_DATA,
    PROFILE_ONLY,
    GranularityCondition.categories(1),
    GranularityCondition.categories(2),
    GranularityCondition.categories(3),
    GranularityCondition.keywords(0.90),
    GranularityCondition.keywords(0.85),
    GranularityCondition.keywords(0.80),
    GranularityCondition.keywords(0.75),
    GranularityCondition.history("short"),
    GranularityCondition.history("long"),
)

_RANK = {c: i for i, c in enumerate(ALL_CONDITIONS)}


def privacy_rank(condition: GranularityCondition) -> int:
    """Position in the protection ladder; 0 is most protective."""
    return _RANK[condition]


def privacy_order(a: GranularityCondition, b: GranularityCondition) -> Ordering:
    """Strict total order over conditions by privacy protection."""
    ra, rb = privacy_rank(a), privacy_rank(b)
    if ra < rb:
        return Ordering.MORE_PROTECTIVE
    if ra > rb:
        return Ordering.LESS_PROTECTIVE
    return Ordering.EQUAL


# --- scope strings -------------------------------------------------------------

PROFILE_SCOPE = "puda:profile"
REGISTER_SCOPE = "puda:register"

# the 10 data scopes, in ladder order
DATA_SCOPES: tuple[str, ...] = (
    PROFILE_SCOPE,
    "puda:categories:1",
    "puda:categories:2",
    "puda:categories:3",
    "puda:keywords:090",
    "puda:keywords:085",
    "puda:keywords:080",
    "puda:keywords:075",
    "puda:history:short",
    "puda:history:long",
)

_SCOPE_RE = re.compile(
    r"^puda:(profile|categories:[123]|keywords:(090|085|080|075)|history:(short|long))$"
)


def is_valid_scope(scope: str) -> bool:
    return bool(_SCOPE_RE.match(scope))


def condition_scope(condition: GranularityCondition) -> frozenset[str]:
    """Authorization scopes a client needs for this condition. Profile is a
    mandatory component of every data-providing condition."""
    kind = condition.kind
    if kind is ConditionKind.NO_DATA:
        return frozenset()
    if kind is ConditionKind.PROFILE_ONLY:
        return frozenset({PROFILE_SCOPE})
    if kind is ConditionKind.CATEGORIES:
        return frozenset({PROFILE_SCOPE, f"puda:categories:{condition.tier}"})
    if kind is ConditionKind.KEYWORDS:
        return frozenset({PROFILE_SCOPE, f"puda:keywords:{threshold_code(condition.threshold)}"})
    return frozenset({PROFILE_SCOPE, f"puda:history:{condition.variant}"})


def scope_data_path(scope: str) -> str:
    """Provision endpoint path bound to a data scope."""
    if scope == PROFILE_SCOPE:
        return "/data/profile"
    for prefix, route in (("puda:categories:", "/data/categories/"),
                          ("puda:keywords:", "/data/keywords/"),
                          ("puda:history:", "/data/history/")):
        if scope.startswith(prefix) and is_valid_scope(scope):
            return route + scope[len(prefix):]
    raise ValidationError(f"not a data scope: {scope!r}")
