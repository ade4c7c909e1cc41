from __future__ import annotations

import errno
import threading

import pytest
from hypothesis import given, strategies as st

from puda.model import PageCapture, utc_now
from puda.store import CorruptLog, EventKind, StorageFull, Store


@pytest.fixture()
def store(tmp_path):
    return Store(tmp_path / "data")


def _capture(i: int) -> PageCapture:
    return PageCapture(
        url=f"https://example.net/page-{i}",
        title=f"Page {i}",
        html_body=f"<p>body {i}</p>",
        captured_at=utc_now(),
        user_id="user-1",
    )


class TestAppend:
    def test_first_offset_is_zero(self, store):
        assert store.append("user-1", EventKind.CAPTURE, _capture(0).to_dict()) == 0

    def test_offsets_are_sequential(self, store):
        first = store.append("user-1", EventKind.CAPTURE, _capture(0).to_dict())
        second = store.append("user-1", EventKind.CAPTURE, _capture(1).to_dict())
        assert (first, second) == (0, 1)

    def test_per_user_isolation(self, store):
        store.append("user-1", EventKind.CAPTURE, _capture(0).to_dict())
        assert store.append("user-2", EventKind.CAPTURE, _capture(0).to_dict()) == 0

    def test_enospc_maps_to_storage_full(self, store, monkeypatch):
        import puda.store as store_module

        def fail(_fd):
            raise OSError(errno.ENOSPC, "no space left on device")

        monkeypatch.setattr(store_module.os, "fsync", fail)
        with pytest.raises(StorageFull):
            store.append("user-1", EventKind.CAPTURE, _capture(0).to_dict())

    def test_concurrent_appends_keep_offsets_dense(self, store):
        offsets: list[int] = []
        lock = threading.Lock()

        def worker(k: int):
            offset = store.append("user-1", EventKind.CAPTURE, _capture(k).to_dict())
            with lock:
                offsets.append(offset)

        threads = [threading.Thread(target=worker, args=(k,)) for k in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert sorted(offsets) == list(range(8))


class TestLoadCaptures:
    def test_unknown_user_is_empty(self, store):
        assert store.load_captures("nobody") == []

    def test_round_trip_in_order(self, store):
        originals = [_capture(i) for i in range(5)]
        for capture in originals:
            store.append("user-1", EventKind.CAPTURE, capture.to_dict())
        assert store.load_captures("user-1") == originals

    def test_kind_filter(self, store):
        store.append("user-1", EventKind.CAPTURE, _capture(0).to_dict())
        store.append("user-1", EventKind.GRANT_CREATED, {"grant_id": "g1"})
        store.append("user-1", EventKind.CAPTURE, _capture(1).to_dict())
        assert len(store.load_captures("user-1")) == 2
        assert len(store.read_events("user-1")) == 3


class TestDatasetSnapshot:
    def test_absent_before_put(self, store):
        assert store.get_dataset("user-1") is None

    def test_round_trip(self, store, stub_dataset):
        store.put_dataset(stub_dataset.user_id, stub_dataset)
        assert store.get_dataset(stub_dataset.user_id) == stub_dataset

    def test_last_writer_wins(self, store, stub_dataset, profile, taxonomy):
        from puda.backends import BackendSet
        from puda.pipeline import build_dataset

        store.put_dataset(stub_dataset.user_id, stub_dataset)
        empty = build_dataset(stub_dataset.user_id, profile, [], taxonomy, BackendSet.stub())
        store.put_dataset(stub_dataset.user_id, empty)
        assert store.get_dataset(stub_dataset.user_id) == empty


class TestCrashSafety:
    def _seed_log(self, store, n: int = 12) -> bytes:
        for i in range(n):
            store.append("user-1", EventKind.CAPTURE, _capture(i).to_dict())
        path = store.data_dir / "user-1" / "events.jsonl"
        return path.read_bytes()

    def test_mid_record_truncation_raises_corrupt_log(self, store):
        raw = self._seed_log(store, 3)
        path = store.data_dir / "user-1" / "events.jsonl"
        first_line_end = raw.index(b"\n")
        path.write_bytes(raw[: first_line_end + 10])  # tear the second record
        with pytest.raises(CorruptLog) as exc:
            store.read_events("user-1")
        assert exc.value.offset == 1

    def test_every_byte_boundary_recovers_prefix_or_corrupt(self, store):
        raw = self._seed_log(store, 12)
        path = store.data_dir / "user-1" / "events.jsonl"
        full = store.read_events("user-1")
        line_ends = {i + 1 for i, b in enumerate(raw) if b == ord("\n")}
        for cut in range(len(raw) + 1):
            path.write_bytes(raw[:cut])
            try:
                events = store.read_events("user-1")
            except CorruptLog as exc:
                # the torn record is the first one not fully on disk
                complete = sum(1 for end in line_ends if end <= cut)
                assert exc.offset == complete
                continue
            # recovered: must be a prefix with intact content; clean recovery
            # happens at line boundaries (or one byte short: newline lost,
            # record still checksum-complete)
            assert events == full[: len(events)]
            assert cut == 0 or cut in line_ends or cut + 1 in line_ends

    def test_flipped_byte_detected(self, store):
        raw = bytearray(self._seed_log(store, 2))
        # flip a byte inside the first record's JSON body
        raw[10] ^= 0x01
        path = store.data_dir / "user-1" / "events.jsonl"
        path.write_bytes(bytes(raw))
        with pytest.raises(CorruptLog) as exc:
            store.read_events("user-1")
        assert exc.value.offset == 0


class TestEventRoundTrip:
    @given(
        st.dictionaries(
            st.text(min_size=1, max_size=8),
            st.one_of(st.integers(), st.text(max_size=20), st.booleans()),
            max_size=5,
        )
    )
    def test_payload_round_trip(self, payload):
        import tempfile

        with tempfile.TemporaryDirectory() as tmp:
            store = Store(tmp)
            store.append("user-1", EventKind.DATASET_BUILT, payload)
            events = store.read_events("user-1")
            assert events[-1].payload == payload
