"""Durable per-user persistence: an append-only, checksummed event log plus
last-writer-wins snapshots for the dataset and grants.

Layout under the data directory, one subdirectory per user:
    <data_dir>/<user_id>/events.jsonl   append-only log, one record per line
    <data_dir>/<user_id>/dataset.json   latest dataset snapshot
    <data_dir>/<user_id>/grants.json    latest grants snapshot

Everything is plain UTF-8 JSON so the owner can read their own store with a
text editor.
"""

from __future__ import annotations

import errno
import json
import os
import zlib
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any

from filelock import FileLock

from puda.model import (
    PageCapture,
    UserDataset,
    canonical_json,
    format_ts,
    parse_ts,
    utc_now,
    validate_user_id,
)


class StoreError(Exception):
    pass


class StorageFull(StoreError):
    pass


class CorruptLog(StoreError):
    """The event log is damaged; `offset` is the first unreadable record."""

    def __init__(self, user_id: str, offset: int, reason: str):
        super().__init__(f"user {user_id}: corrupt log record at offset {offset}: {reason}")
        self.user_id = user_id
        self.offset = offset


class EventKind(str, Enum):
    CAPTURE = "capture"
    DATASET_BUILT = "dataset_built"
    GRANT_CREATED = "grant_created"
    GRANT_REVOKED = "grant_revoked"
    TOKEN_ISSUED = "token_issued"


@dataclass(frozen=True)
class EventRecord:
    offset: int
    kind: EventKind
    payload: dict[str, Any]
    recorded_at: datetime

    def to_dict(self) -> dict[str, Any]:
        return {
            "offset": self.offset,
            "kind": self.kind.value,
            "payload": self.payload,
            "recorded_at": format_ts(self.recorded_at),
        }


def _encode_line(record: EventRecord) -> bytes:
    body = canonical_json(record.to_dict())
    checksum = zlib.crc32(body.encode("utf-8"))
    return f"{body}\t{checksum:08x}\n".encode("utf-8")


def _decode_line(line: bytes, expected_offset: int, user_id: str) -> EventRecord:
    try:
        text = line.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CorruptLog(user_id, expected_offset, f"undecodable bytes: {exc}") from exc
    body, sep, checksum_hex = text.rstrip("\n").rpartition("\t")
    if not sep:
        raise CorruptLog(user_id, expected_offset, "missing checksum field")
    if f"{zlib.crc32(body.encode('utf-8')):08x}" != checksum_hex:
        raise CorruptLog(user_id, expected_offset, "checksum mismatch")
    try:
        data = json.loads(body)
        record = EventRecord(
            offset=data["offset"],
            kind=EventKind(data["kind"]),
            payload=data["payload"],
            recorded_at=parse_ts(data["recorded_at"]),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise CorruptLog(user_id, expected_offset, f"undecodable record: {exc}") from exc
    if record.offset != expected_offset:
        raise CorruptLog(
            user_id, expected_offset, f"offset gap: found {record.offset}, expected {expected_offset}"
        )
    return record


class Store:
    """Filesystem-backed store. One writer per user (advisory file lock);
    snapshot reads are lock-free and see the last completed write."""

    def __init__(self, data_dir: str | Path):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)

    def _user_dir(self, user_id: str, create: bool = False) -> Path:
        validate_user_id(user_id)
        path = self.data_dir / user_id
        if create:
            path.mkdir(parents=True, exist_ok=True)
        return path

    def _lock(self, user_id: str) -> FileLock:
        return FileLock(self._user_dir(user_id, create=True) / ".lock")

    def _events_path(self, user_id: str) -> Path:
        return self._user_dir(user_id) / "events.jsonl"

    # -- event log ------------------------------------------------------------

    def append(self, user_id: str, kind: EventKind, payload: dict[str, Any]) -> int:
        """Durably append one event; returns its offset. The log tail is
        validated on first contact so torn writes surface as CorruptLog."""
        with self._lock(user_id):
            offset = self._next_offset(user_id)
            record = EventRecord(offset=offset, kind=kind, payload=payload, recorded_at=utc_now())
            line = _encode_line(record)
            path = self._events_path(user_id)
            try:
                with open(path, "ab") as fh:
                    fh.write(line)
                    fh.flush()
                    os.fsync(fh.fileno())
            except OSError as exc:
                if exc.errno == errno.ENOSPC:
                    raise StorageFull(str(exc)) from exc
                raise StoreError(str(exc)) from exc
            return offset

    def _next_offset(self, user_id: str) -> int:
        return len(self.read_events(user_id))

    def read_events(self, user_id: str) -> list[EventRecord]:
        """All events in offset order; raises CorruptLog at the first record
        that fails its checksum, shape, or offset-continuity check."""
        path = self._events_path(user_id)
        if not path.exists():
            return []
        records: list[EventRecord] = []
        with open(path, "rb") as fh:
            raw = fh.read()
        for chunk in raw.split(b"\n"):
            if not chunk:
                continue
            records.append(_decode_line(chunk, len(records), user_id))
        return records

    def load_captures(self, user_id: str) -> list[PageCapture]:
        return [
            PageCapture.from_dict(e.payload)
            for e in self.read_events(user_id)
            if e.kind is EventKind.CAPTURE
        ]

    # -- snapshots ------------------------------------------------------------

    def _write_snapshot(self, user_id: str, name: str, payload: Any) -> None:
        directory = self._user_dir(user_id, create=True)
        final = directory / name
        tmp = directory / f".{name}.tmp"
        data = canonical_json(payload).encode("utf-8")
        with self._lock(user_id):
            try:
                with open(tmp, "wb") as fh:
                    fh.write(data)
                    fh.flush()
                    os.fsync(fh.fileno())
                os.replace(tmp, final)
            except OSError as exc:
                if exc.errno == errno.ENOSPC:
                    raise StorageFull(str(exc)) from exc
                raise StoreError(str(exc)) from exc

    def _read_snapshot(self, user_id: str, name: str) -> Any | None:
        path = self._user_dir(user_id) / name
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))

    def put_dataset(self, user_id: str, dataset: UserDataset) -> None:
        self._write_snapshot(user_id, "dataset.json", dataset.to_dict())

    def put_profile(self, user_id: str, profile_data: dict[str, Any]) -> None:
        self._write_snapshot(user_id, "profile.json", profile_data)

    def get_profile(self, user_id: str) -> dict[str, Any] | None:
        return self._read_snapshot(user_id, "profile.json")

    def get_dataset(self, user_id: str) -> UserDataset | None:
        data = self._read_snapshot(user_id, "dataset.json")
        return None if data is None else UserDataset.from_dict(data)

    def put_grants(self, user_id: str, grants: list[dict[str, Any]]) -> None:
        self._write_snapshot(user_id, "grants.json", grants)

    def get_grants(self, user_id: str) -> list[dict[str, Any]]:
        return self._read_snapshot(user_id, "grants.json") or []

    def known_users(self) -> list[str]:
        if not self.data_dir.exists():
            return []
        return sorted(p.name for p in self.data_dir.iterdir() if p.is_dir())
