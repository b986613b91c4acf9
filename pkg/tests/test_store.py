from __future__ import annotations

import json
import os

import pytest

from conftest import make_stream
from sessionlens.analytics import ActivityInterval
from sessionlens.errors import NotFound, StaleWrite, StorageFailure
from sessionlens.ingest import TestResult
from sessionlens.store import (
    FileStore,
    MediaAsset,
    MemoryStore,
    Session,
    SessionTests,
    canonical_bytes,
    doc_to_session,
    session_to_doc,
)

SID_A = "a" * 32
SID_B = "b" * 32


def small_session(session_id: str = SID_A, version: int = 1) -> Session:
    return Session(
        session_id=session_id,
        session_start_ms=1_700_000_000_000,
        start_ms=0,
        end_ms=2_000,
        activities_version=version,
        activities=(ActivityInterval("warmup", 0, 1_500),),
        streams=(make_stream([0, 1_000, 2_000], [1.25, 2.5, 3.75]),),
        media=(MediaAsset("screen-00.mp4", "screen", f"media/{session_id}/screen-00.mp4",
                          0, 2_000),),
        tests=SessionTests(pretest=TestResult("pretest", 4.0, 10.0, (1.0, 3.0))),
        demographics={"age_band": "25-34"},
        derived={"version": version, "note": []},
    )


@pytest.fixture(params=["memory", "file"])
def store(request, tmp_path):
    if request.param == "memory":
        return MemoryStore()
    return FileStore(tmp_path / "store")


class TestCanonicalBytes:
    def test_sorted_compact_with_trailing_newline(self):
        data = canonical_bytes({"b": 1, "a": [1, 2]})
        assert data == b'{"a":[1,2],"b":1}\n'

    def test_unicode_not_escaped(self):
        assert "ü".encode("utf-8") in canonical_bytes({"k": "ü"})

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            canonical_bytes({"x": float("nan")})

    def test_doc_round_trip_preserves_session(self):
        session = small_session()
        assert doc_to_session(session_to_doc(session)) == session

    def test_corrupt_doc_is_storage_failure(self):
        doc = session_to_doc(small_session())
        del doc["streams"]
        with pytest.raises(StorageFailure):
            doc_to_session(doc)


class TestSessionValidation:
    def test_bad_session_id(self):
        session = small_session(session_id="short")
        with pytest.raises(ValueError):
            session.validate()

    def test_version_must_be_positive(self):
        session = small_session(version=0)
        with pytest.raises(ValueError):
            session.validate()

    def test_derived_version_may_not_exceed_current(self):
        session = small_session()
        session.derived = {"version": 2}
        with pytest.raises(ValueError):
            session.validate()


class TestPutGet:
    def test_round_trip(self, store):
        session = small_session()
        store.put_session(session)
        assert store.get_session(SID_A) == session

    def test_round_trip_bit_identical(self, store):
        session = small_session()
        before = canonical_bytes(session_to_doc(session))
        store.put_session(session)
        after = canonical_bytes(session_to_doc(store.get_session(SID_A)))
        assert after == before

    def test_get_missing(self, store):
        with pytest.raises(NotFound):
            store.get_session(SID_B)

    def test_create_with_token_rejected(self, store):
        with pytest.raises(StaleWrite):
            store.put_session(small_session(), expected="1:deadbeef")

    def test_second_create_rejected(self, store):
        store.put_session(small_session())
        with pytest.raises(StaleWrite):
            store.put_session(small_session())

    def test_update_with_current_token(self, store):
        token = store.put_session(small_session())
        updated = small_session(version=2)
        updated.derived = {"version": 2}
        new_token = store.put_session(updated, expected=token)
        assert new_token != token
        assert store.get_session(SID_A).activities_version == 2
        assert store.current_token(SID_A) == new_token

    def test_stale_token_rejected_without_state_change(self, store):
        token = store.put_session(small_session())
        second = small_session(version=2)
        second.derived = None
        store.put_session(second, expected=token)
        frozen = canonical_bytes(session_to_doc(store.get_session(SID_A)))
        third = small_session(version=3)
        third.derived = None
        with pytest.raises(StaleWrite):
            store.put_session(third, expected=token)
        assert canonical_bytes(session_to_doc(store.get_session(SID_A))) == frozen

    def test_version_decrease_rejected(self, store):
        first = small_session(version=3)
        first.derived = None
        token = store.put_session(first)
        downgraded = small_session(version=2)
        downgraded.derived = None
        with pytest.raises(ValueError):
            store.put_session(downgraded, expected=token)

    def test_same_content_writes_produce_same_token(self, store):
        token = store.put_session(small_session())
        again = store.put_session(small_session(), expected=token)
        assert again == token

    def test_list_sessions_summaries(self, store):
        store.put_session(small_session(SID_B))
        store.put_session(small_session(SID_A))
        listed = store.list_sessions()
        assert [row.session_id for row in listed] == [SID_A, SID_B]
        assert listed[0].activities_version == 1
        assert listed[0].summary == {
            "n_streams": 1, "n_activities": 1, "n_media": 1,
            "start_ms": 0, "end_ms": 2_000, "has_tests": True,
        }

    def test_delete_session(self, store):
        store.put_session(small_session())
        store.delete_session(SID_A)
        assert store.list_sessions() == []
        with pytest.raises(NotFound):
            store.get_session(SID_A)

    def test_delete_missing(self, store):
        with pytest.raises(NotFound):
            store.delete_session(SID_A)


class TestAnonymize:
    def test_mints_hex_id_and_digest(self, store):
        session_id, record = store.anonymize("learner-009@example.edu")
        assert len(session_id) == 32
        assert all(c in "0123456789abcdef" for c in session_id)
        assert record.session_id == session_id
        assert len(record.learner_ref_digest) == 64
        assert "learner-009" not in record.learner_ref_digest

    def test_same_learner_same_digest_fresh_id(self, store):
        id1, rec1 = store.anonymize("learner-009@example.edu")
        id2, rec2 = store.anonymize("learner-009@example.edu")
        assert id1 != id2
        assert rec1.learner_ref_digest == rec2.learner_ref_digest

    def test_different_learners_different_digests(self, store):
        _, rec1 = store.anonymize("learner-a")
        _, rec2 = store.anonymize("learner-b")
        assert rec1.learner_ref_digest != rec2.learner_ref_digest

    def test_ids_are_distinct(self, store):
        ids = {store.anonymize("learner-x")[0] for _ in range(100)}
        assert len(ids) == 100

    def test_memory_store_records_digests(self):
        store = MemoryStore()
        store.anonymize("learner-x")
        assert len(store.digests) == 1


class TestFileStoreLayout:
    def test_document_and_index_files(self, tmp_path):
        store = FileStore(tmp_path / "store")
        store.put_session(small_session())
        assert (tmp_path / "store" / "sessions" / f"{SID_A}.json").exists()
        index = json.loads((tmp_path / "store" / "index.json").read_text())
        assert SID_A in index["sessions"]

    def test_stored_bytes_are_canonical(self, tmp_path):
        store = FileStore(tmp_path / "store")
        session = small_session()
        store.put_session(session)
        on_disk = (tmp_path / "store" / "sessions" / f"{SID_A}.json").read_bytes()
        assert on_disk == canonical_bytes(session_to_doc(session))

    def test_index_rebuilt_when_missing(self, tmp_path):
        store = FileStore(tmp_path / "store")
        store.put_session(small_session())
        (tmp_path / "store" / "index.json").unlink()
        assert [row.session_id for row in store.list_sessions()] == [SID_A]

    def test_index_rebuilt_when_corrupt(self, tmp_path):
        store = FileStore(tmp_path / "store")
        store.put_session(small_session())
        (tmp_path / "store" / "index.json").write_text("{broken")
        assert [row.session_id for row in store.list_sessions()] == [SID_A]

    def test_corrupt_document_is_storage_failure(self, tmp_path):
        store = FileStore(tmp_path / "store")
        store.put_session(small_session())
        (tmp_path / "store" / "sessions" / f"{SID_A}.json").write_text("{broken")
        with pytest.raises(StorageFailure):
            store.get_session(SID_A)

    def test_crash_during_write_preserves_previous_version(self, tmp_path, monkeypatch):
        store = FileStore(tmp_path / "store")
        token = store.put_session(small_session())
        before = (tmp_path / "store" / "sessions" / f"{SID_A}.json").read_bytes()

        def boom(src, dst):
            raise OSError("disk gone")

        monkeypatch.setattr(os, "replace", boom)
        updated = small_session(version=2)
        updated.derived = None
        with pytest.raises(StorageFailure):
            store.put_session(updated, expected=token)
        monkeypatch.undo()

        assert (tmp_path / "store" / "sessions" / f"{SID_A}.json").read_bytes() == before
        leftovers = list((tmp_path / "store" / "sessions").glob("*.tmp"))
        assert leftovers == []
        assert store.get_session(SID_A).activities_version == 1

    def test_salt_survives_reopen(self, tmp_path):
        root = tmp_path / "store"
        _, rec1 = FileStore(root).anonymize("learner-x")
        _, rec2 = FileStore(root).anonymize("learner-x")
        assert rec1.learner_ref_digest == rec2.learner_ref_digest

    def test_digest_file_format(self, tmp_path):
        store = FileStore(tmp_path / "store")
        session_id, record = store.anonymize("learner-x")
        lines = (tmp_path / "store" / "anonymization.digests").read_text().splitlines()
        assert lines[0].startswith("# salt=")
        assert lines[1] == f"{record.learner_ref_digest} {session_id}"

    @pytest.mark.parametrize("bad_id", ["", "../escape", "a/b", ".hidden"])
    def test_traversal_session_ids_rejected(self, tmp_path, bad_id):
        store = FileStore(tmp_path / "store")
        with pytest.raises(NotFound):
            store.get_session(bad_id)


class TestFileStoreMedia:
    def test_add_and_read(self, tmp_path):
        store = FileStore(tmp_path / "store")
        source = tmp_path / "clip.mp4"
        source.write_bytes(b"\x00fake video")
        rel = store.add_media(SID_A, "screen-00.mp4", source)
        assert rel == f"media/{SID_A}/screen-00.mp4"
        assert store.read_media(SID_A, "screen-00.mp4") == b"\x00fake video"

    def test_read_missing(self, tmp_path):
        store = FileStore(tmp_path / "store")
        with pytest.raises(NotFound):
            store.read_media(SID_A, "nope.mp4")

    def test_traversal_media_id_rejected(self, tmp_path):
        store = FileStore(tmp_path / "store")
        with pytest.raises(NotFound):
            store.read_media(SID_A, "../index.json")

    def test_traversal_session_id_rejected(self, tmp_path):
        store = FileStore(tmp_path / "store")
        with pytest.raises(NotFound):
            store.read_media("../media", "x.mp4")

    def test_add_with_traversal_media_id_rejected(self, tmp_path):
        store = FileStore(tmp_path / "store")
        source = tmp_path / "clip.mp4"
        source.write_bytes(b"x")
        with pytest.raises(StorageFailure):
            store.add_media(SID_A, "../evil.mp4", source)

    def test_add_missing_source_fails(self, tmp_path):
        store = FileStore(tmp_path / "store")
        with pytest.raises(StorageFailure):
            store.add_media(SID_A, "clip.mp4", tmp_path / "absent.mp4")

    def test_delete_session_removes_media(self, tmp_path):
        store = FileStore(tmp_path / "store")
        source = tmp_path / "clip.mp4"
        source.write_bytes(b"x")
        store.put_session(small_session())
        store.add_media(SID_A, "screen-00.mp4", source)
        store.delete_session(SID_A)
        with pytest.raises(NotFound):
            store.read_media(SID_A, "screen-00.mp4")
