"""Closed three-tier category list: loading, validation, and subset filtering.

The taxonomy is the fixed output space for the highest-protection data
granularity: anything not in it is dropped, never served.
"""

from __future__ import annotations

import hashlib
import unicodedata
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable


class TaxonomyError(ValueError):
    """Base class for taxonomy file and path violations."""


class MalformedLine(TaxonomyError):
    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class DuplicatePath(TaxonomyError):
    def __init__(self, canonical: str, line_no: int):
        super().__init__(f"line {line_no}: duplicate path {canonical!r}")
        self.canonical = canonical
        self.line_no = line_no


class OrphanPath(TaxonomyError):
    def __init__(self, canonical: str, missing_prefix: str):
        super().__init__(f"{canonical!r} has no parent {missing_prefix!r}")
        self.canonical = canonical
        self.missing_prefix = missing_prefix


class EmptyTaxonomy(TaxonomyError):
    def __init__(self):
        super().__init__("taxonomy contains no paths")


MAX_DEPTH = 3


@dataclass(frozen=True)
class CategoryPath:
    """A 1- to 3-segment category path, e.g. /Travel/Hotels & Accommodations."""

    segments: tuple[str, ...]

    def __post_init__(self):
        if not 1 <= len(self.segments) <= MAX_DEPTH:
            raise TaxonomyError(f"path depth must be 1..{MAX_DEPTH}, got {len(self.segments)}")
        for seg in self.segments:
            if not seg or seg != seg.strip():
                raise TaxonomyError(f"bad segment {seg!r}")
            if "/" in seg:
                raise TaxonomyError(f"segment contains '/': {seg!r}")

    @property
    def canonical(self) -> str:
        return "/" + "/".join(self.segments)

    @property
    def depth(self) -> int:
        return len(self.segments)

    @property
    def parent(self) -> CategoryPath | None:
        if self.depth == 1:
            return None
        return CategoryPath(self.segments[:-1])

    @classmethod
    def parse(cls, text: str) -> CategoryPath:
        """Parse a canonical path string; NFC-normalizes and trims the input.

        Raises TaxonomyError on anything that is not a well-formed path.
        Matching elsewhere is exact on the parsed canonical form: no case
        folding, no fuzzy matching.
        """
        cleaned = unicodedata.normalize("NFC", text).strip()
        if not cleaned.startswith("/"):
            raise TaxonomyError(f"path must start with '/': {text!r}")
        return cls(tuple(cleaned[1:].split("/")))

    def __str__(self) -> str:
        return self.canonical


@dataclass(frozen=True)
class CategoryTaxonomy:
    """Validated, immutable taxonomy; `paths` preserves source file order."""

    paths: tuple[CategoryPath, ...]
    version: str

    @cached_property
    def tier_counts(self) -> tuple[int, int, int]:
        counts = [0, 0, 0]
        for p in self.paths:
            counts[p.depth - 1] += 1
        return tuple(counts)  # type: ignore[return-value]

    @cached_property
    def _tiers(self) -> dict[int, tuple[CategoryPath, ...]]:
        tiers: dict[int, list[CategoryPath]] = {1: [], 2: [], 3: []}
        for p in self.paths:
            tiers[p.depth].append(p)
        return {k: tuple(v) for k, v in tiers.items()}

    @cached_property
    def _canonical_by_tier(self) -> dict[int, frozenset[str]]:
        return {k: frozenset(p.canonical for p in v) for k, v in self._tiers.items()}


def load_taxonomy(source: str, version: str | None = None) -> CategoryTaxonomy:
    """Parse taxonomy file content: one canonical path per line, '#' comments.

    Enforces uniqueness and prefix closure (every deeper path's parent must
    itself be listed). Raises MalformedLine, DuplicatePath, OrphanPath, or
    EmptyTaxonomy.
    """
    paths: list[CategoryPath] = []
    seen: dict[str, int] = {}
    for line_no, raw in enumerate(source.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            path = CategoryPath.parse(line)
        except TaxonomyError as exc:
            raise MalformedLine(str(exc), line_no) from exc
        if path.canonical in seen:
            raise DuplicatePath(path.canonical, line_no)
        seen[path.canonical] = line_no
        paths.append(path)

    if not paths:
        raise EmptyTaxonomy()

    for path in paths:
        parent = path.parent
        if parent is not None and parent.canonical not in seen:
            raise OrphanPath(path.canonical, parent.canonical)

    if version is None:
        digest = hashlib.sha256(serialize_taxonomy_paths(paths).encode("utf-8"))
        version = digest.hexdigest()[:12]
    return CategoryTaxonomy(paths=tuple(paths), version=version)


def load_taxonomy_file(path: str | Path) -> CategoryTaxonomy:
    return load_taxonomy(Path(path).read_text(encoding="utf-8"))


def serialize_taxonomy_paths(paths: Iterable[CategoryPath]) -> str:
    return "\n".join(p.canonical for p in paths) + "\n"


def serialize_taxonomy(taxonomy: CategoryTaxonomy) -> str:
    """Render back to file form; load_taxonomy(serialize_taxonomy(t)) == t."""
    return serialize_taxonomy_paths(taxonomy.paths)


def project_tier(taxonomy: CategoryTaxonomy, tier: int) -> tuple[CategoryPath, ...]:
    """All paths of depth exactly `tier`, in source file order."""
    if tier not in (1, 2, 3):
        raise ValueError(f"tier must be 1, 2, or 3, got {tier}")
    return taxonomy._tiers[tier]


def validate_subset(
    taxonomy: CategoryTaxonomy, candidates: Iterable[str], tier: int
) -> list[CategoryPath]:
    """Filter candidate strings down to taxonomy members at the given tier.

    Order-preserving, deduplicated. Candidates that fail to parse or are not
    exact members are silently dropped: the result is a subset of
    project_tier(taxonomy, tier) no matter what the input contains.
    """
    members = taxonomy._canonical_by_tier[tier] if tier in (1, 2, 3) else frozenset()
    if tier not in (1, 2, 3):
        raise ValueError(f"tier must be 1, 2, or 3, got {tier}")
    kept: list[CategoryPath] = []
    seen: set[str] = set()
    for raw in candidates:
        if not isinstance(raw, str):
            continue
        try:
            path = CategoryPath.parse(raw)
        except (TaxonomyError, ValueError):
            continue
        if path.canonical in members and path.canonical not in seen:
            seen.add(path.canonical)
            kept.append(path)
    return kept
