"""Generation backends for the three content tasks.

Ships a deterministic offline stub (the default everywhere, including tests)
and an HTTP client for remote model servers. Every task can be pointed at a
separate endpoint; anything unconfigured falls back to the stub.
"""

from __future__ import annotations

import re
import time
import unicodedata
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources
from typing import Any, Mapping, Protocol, Sequence

import httpx

from puda.model import Keyword, Sentiment
from puda.taxonomy import CategoryPath

LONG_WORD_BUDGET = 200
SHORT_WORD_BUDGET = 40
DEFAULT_TIMEOUT_S = 60.0


class BackendError(Exception):
    """Base class for backend failures."""


class EmptyInput(BackendError):
    pass


class EmptyAllowedList(BackendError):
    pass


class TransportError(BackendError):
    pass


class BackendTimeout(BackendError):
    pass


class MalformedResponse(BackendError):
    pass


class Task(str, Enum):
    SUMMARIZE_LONG = "summarize_long"
    SUMMARIZE_SHORT = "summarize_short"
    EXTRACT_KEYWORDS = "extract_keywords"
    CATEGORIZE = "categorize"


@dataclass(frozen=True)
class BackendRequest:
    task: Task
    input_text: str
    max_items: int
    allowed_categories: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.task is Task.CATEGORIZE and not self.allowed_categories:
            raise ValueError("categorize requests must carry allowed_categories")
        if self.max_items < 1:
            raise ValueError("max_items must be positive")

    def to_dict(self) -> dict[str, Any]:
        body: dict[str, Any] = {
            "task": self.task.value,
            "input_text": self.input_text,
            "max_items": self.max_items,
        }
        if self.allowed_categories is not None:
            body["allowed_categories"] = list(self.allowed_categories)
        return body


@dataclass(frozen=True)
class BackendResponse:
    task: Task
    payload: Any
    backend_id: str
    elapsed_ms: int


class Backend(Protocol):
    def summarize(self, text: str, variant: str) -> str: ...

    def extract_keywords(self, text: str, max_items: int) -> list[Keyword]: ...

    def categorize(
        self, context_text: str, allowed: Sequence[CategoryPath], max_items: int
    ) -> list[str]: ...


# --- deterministic stub --------------------------------------------------------

_TOKEN_RE = re.compile(r"[^\W\d_]+", re.UNICODE)
_SENTENCE_RE = re.compile(r"[^.!?。]+[.!?。]*")


def tokenize(text: str) -> list[str]:
    """Letter runs, NFC-normalized and case-folded; digits and punctuation split."""
    return [m.group(0).casefold() for m in _TOKEN_RE.finditer(unicodedata.normalize("NFC", text))]


@lru_cache(maxsize=None)
def _stopwords() -> frozenset[str]:
    text = resources.files("puda.data").joinpath("stopwords.txt").read_text(encoding="utf-8")
    return frozenset(
        line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#")
    )


@lru_cache(maxsize=None)
def _polarity() -> dict[str, Sentiment]:
    text = resources.files("puda.data").joinpath("polarity.txt").read_text(encoding="utf-8")
    table: dict[str, Sentiment] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        token, label = line.split()
        table[token] = Sentiment(label)
    return table


def split_sentences(text: str) -> list[str]:
    return [m.group(0).strip() for m in _SENTENCE_RE.finditer(text) if m.group(0).strip()]


def _lead_sentences(text: str, budget: int) -> str:
    """Longest sentence prefix within the word budget; within-budget input is
    returned verbatim, and an oversized first sentence is hard-truncated."""
    if len(text.split()) <= budget:
        return text
    kept: list[str] = []
    used = 0
    for sentence in split_sentences(text):
        n = len(sentence.split())
        if used + n > budget:
            break
        kept.append(sentence)
        used += n
    if not kept:
        return " ".join(text.split()[:budget])
    return " ".join(kept)


class StubBackend:
    """Model-free implementation: lead-sentence summaries, frequency-scored
    keywords, token-overlap category ranking. Pure and deterministic."""

    backend_id = "stub"

    def summarize(self, text: str, variant: str) -> str:
        if not text.strip():
            raise EmptyInput("summarize requires non-empty text")
        if variant not in ("long", "short"):
            raise ValueError(f"variant must be 'long' or 'short', got {variant!r}")
        long_summary = _lead_sentences(text, LONG_WORD_BUDGET)
        if variant == "long":
            return long_summary
        return _lead_sentences(long_summary, SHORT_WORD_BUDGET)

    def extract_keywords(self, text: str, max_items: int) -> list[Keyword]:
        if not text.strip():
            raise EmptyInput("extract_keywords requires non-empty text")
        if max_items < 1:
            raise ValueError("max_items must be >= 1")
        stop = _stopwords()
        first_pos: dict[str, int] = {}
        counts: Counter[str] = Counter()
        for pos, token in enumerate(tokenize(text)):
            if len(token) < 3 or token in stop:
                continue
            counts[token] += 1
            first_pos.setdefault(token, pos)
        if not counts:
            return []
        max_freq = max(counts.values())
        polarity = _polarity()
        ranked = sorted(counts, key=lambda t: (-counts[t] / max_freq, first_pos[t]))
        return [
            Keyword(
                text=token,
                sentiment=polarity.get(token, Sentiment.NEUTRAL),
                score=counts[token] / max_freq,
            )
            for token in ranked[:max_items]
        ]

    def categorize(
        self, context_text: str, allowed: Sequence[CategoryPath], max_items: int
    ) -> list[str]:
        if not allowed:
            raise EmptyAllowedList("categorize requires a non-empty allowed list")
        context_tokens = set(tokenize(context_text))
        scored: list[tuple[int, int, CategoryPath]] = []
        for index, path in enumerate(allowed):
            label_tokens = set(tokenize(" ".join(path.segments)))
            overlap = len(label_tokens & context_tokens)
            if overlap >= 1:
                scored.append((overlap, index, path))
        scored.sort(key=lambda item: (-item[0], item[1]))
        return [path.canonical for _, _, path in scored[:max_items]]


# --- remote backend -------------------------------------------------------------

def remote_backend_call(
    endpoint: str, request: BackendRequest, timeout_s: float = DEFAULT_TIMEOUT_S
) -> BackendResponse:
    """One HTTP POST of the canonical JSON request; the response payload is
    type-checked against the request task before being returned."""
    started = time.perf_counter()
    try:
        response = httpx.post(endpoint, json=request.to_dict(), timeout=timeout_s)
    except httpx.TimeoutException as exc:
        raise BackendTimeout(f"backend call to {endpoint} timed out: {exc}") from exc
    except httpx.HTTPError as exc:
        raise TransportError(f"backend call to {endpoint} failed: {exc}") from exc
    elapsed_ms = max(1, int((time.perf_counter() - started) * 1000))
    if response.status_code != 200:
        raise TransportError(f"backend {endpoint} returned HTTP {response.status_code}")
    try:
        body = response.json()
    except ValueError as exc:
        raise MalformedResponse(f"backend {endpoint} returned non-JSON body") from exc
    if not isinstance(body, dict):
        raise MalformedResponse("backend response must be a JSON object")
    if body.get("task") != request.task.value:
        raise MalformedResponse(
            f"backend answered task {body.get('task')!r} for a {request.task.value} request"
        )
    payload = _check_payload(request.task, body.get("payload"))
    return BackendResponse(
        task=request.task,
        payload=payload,
        backend_id=str(body.get("backend_id", "unknown")),
        elapsed_ms=elapsed_ms,
    )


def _check_payload(task: Task, payload: Any) -> Any:
    if task in (Task.SUMMARIZE_LONG, Task.SUMMARIZE_SHORT):
        if not isinstance(payload, str):
            raise MalformedResponse(f"{task.value} payload must be a string")
        return payload
    if task is Task.EXTRACT_KEYWORDS:
        if not isinstance(payload, list):
            raise MalformedResponse("extract_keywords payload must be a list")
        try:
            return [Keyword.from_dict(item) for item in payload]
        except (ValueError, TypeError) as exc:
            raise MalformedResponse(f"bad keyword in payload: {exc}") from exc
    if not isinstance(payload, list) or not all(isinstance(item, str) for item in payload):
        raise MalformedResponse("categorize payload must be a list of strings")
    return payload


class RemoteBackend:
    """Backend adapter speaking the HTTP wire protocol to a model server."""

    def __init__(self, endpoint: str, timeout_s: float = DEFAULT_TIMEOUT_S):
        self.endpoint = endpoint
        self.timeout_s = timeout_s
        self.backend_id = f"remote:{endpoint}"

    def summarize(self, text: str, variant: str) -> str:
        if not text.strip():
            raise EmptyInput("summarize requires non-empty text")
        task = Task.SUMMARIZE_LONG if variant == "long" else Task.SUMMARIZE_SHORT
        request = BackendRequest(task=task, input_text=text, max_items=1)
        return remote_backend_call(self.endpoint, request, self.timeout_s).payload

    def extract_keywords(self, text: str, max_items: int) -> list[Keyword]:
        if not text.strip():
            raise EmptyInput("extract_keywords requires non-empty text")
        request = BackendRequest(task=Task.EXTRACT_KEYWORDS, input_text=text, max_items=max_items)
        return remote_backend_call(self.endpoint, request, self.timeout_s).payload

    def categorize(
        self, context_text: str, allowed: Sequence[CategoryPath], max_items: int
    ) -> list[str]:
        if not allowed:
            raise EmptyAllowedList("categorize requires a non-empty allowed list")
        request = BackendRequest(
            task=Task.CATEGORIZE,
            input_text=context_text,
            max_items=max_items,
            allowed_categories=tuple(p.canonical for p in allowed),
        )
        return remote_backend_call(self.endpoint, request, self.timeout_s).payload


STUB = StubBackend()


@dataclass(frozen=True)
class BackendSet:
    """Per-task backend selection; tasks may target different servers."""

    summarizer: Backend = STUB
    keyworder: Backend = STUB
    categorizer: Backend = STUB

    @classmethod
    def stub(cls) -> BackendSet:
        return cls()

    @classmethod
    def from_config(cls, config: Mapping[str, str]) -> BackendSet:
        """Build from flat config keys backend.<task>.url; absent keys mean stub."""

        def pick(key: str) -> Backend:
            url = config.get(key)
            return RemoteBackend(url) if url else STUB

        return cls(
            summarizer=pick("backend.summarize.url"),
            keyworder=pick("backend.keywords.url"),
            categorizer=pick("backend.categorize.url"),
        )

    def summarize(self, text: str, variant: str) -> str:
        return self.summarizer.summarize(text, variant)

    def extract_keywords(self, text: str, max_items: int) -> list[Keyword]:
        return self.keyworder.extract_keywords(text, max_items)

    def categorize(
        self, context_text: str, allowed: Sequence[CategoryPath], max_items: int
    ) -> list[str]:
        return self.categorizer.categorize(context_text, allowed, max_items)
