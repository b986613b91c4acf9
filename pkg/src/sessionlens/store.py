"""Anonymized session persistence.

A session document never contains the original learner reference; the
link survives only as a salted digest in a side file, so the session
store alone cannot re-identify anyone.

Two backends share one interface: `MemoryStore` for tests and
`FileStore`, a document-per-session JSON layout:

    <root>/sessions/<session_id>.json
    <root>/media/<session_id>/<media_id>
    <root>/index.json
    <root>/anonymization.digests

Documents are written with atomic replace (temp file + rename), and
concurrent writers are serialized by version tokens: every put carries
the token it read, and a mismatch is rejected as StaleWrite. Tokens are
derived from the stored bytes themselves (activities_version plus a
content digest), so they survive process restarts.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import os
import secrets
import shutil
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, NamedTuple

from sessionlens.analytics import (
    ActivityInterval,
    CleaningReport,
    SignalStream,
    check_disjoint,
)
from sessionlens.errors import NotFound, StaleWrite, StorageFailure
from sessionlens.ingest import MEDIA_KINDS, SessionManifest, TestResult
from sessionlens.timeline import Sample


@dataclass(frozen=True)
class MediaAsset:
    media_id: str
    kind: str
    path: str  # storage-relative
    master_start_ms: int
    duration_ms: int

    def __post_init__(self) -> None:
        if self.kind not in MEDIA_KINDS:
            raise ValueError(f"unknown media kind {self.kind!r}")
        if self.duration_ms <= 0:
            raise ValueError(f"duration_ms must be positive, got {self.duration_ms}")


@dataclass(frozen=True)
class SessionTests:
    pretest: TestResult | None = None
    posttest: TestResult | None = None


@dataclass(frozen=True)
class AnonymizationRecord:
    session_id: str
    learner_ref_digest: str


@dataclass
class Session:
    """The anonymized document aggregating everything known about a session."""

    session_id: str
    session_start_ms: int
    start_ms: int
    end_ms: int
    activities_version: int
    activities: tuple[ActivityInterval, ...]
    streams: tuple[SignalStream, ...]
    media: tuple[MediaAsset, ...] = ()
    tests: SessionTests | None = None
    demographics: dict[str, str] = field(default_factory=dict)
    derived: dict[str, Any] | None = None

    def validate(self) -> None:
        if len(self.session_id) != 32 or any(c not in "0123456789abcdef"
                                             for c in self.session_id):
            raise ValueError(f"session_id must be 32 hex chars, got {self.session_id!r}")
        if self.activities_version < 1:
            raise ValueError("activities_version must be >= 1")
        check_disjoint(self.activities)
        if self.derived is not None:
            cached = self.derived.get("version")
            if not isinstance(cached, int) or cached > self.activities_version:
                raise ValueError(
                    f"derived cache version {cached!r} exceeds "
                    f"activities_version {self.activities_version}")


class SessionSummary(NamedTuple):
    session_id: str
    activities_version: int
    summary: dict[str, Any]


# ---------------------------------------------------------------------------
# canonical JSON serialization
# ---------------------------------------------------------------------------


def canonical_bytes(doc: dict[str, Any]) -> bytes:
    """The one serialized form: sorted keys, compact, UTF-8, trailing LF."""
    return (json.dumps(doc, sort_keys=True, ensure_ascii=False,
                       separators=(",", ":"), allow_nan=False) + "\n").encode("utf-8")


def _test_doc(t: TestResult | None) -> dict[str, Any] | None:
    if t is None:
        return None
    return {"kind": t.kind, "score": t.score, "max_score": t.max_score,
            "per_item": None if t.per_item is None else list(t.per_item)}


def _test_from(doc: dict[str, Any] | None) -> TestResult | None:
    if doc is None:
        return None
    return TestResult(
        kind=doc["kind"], score=doc["score"], max_score=doc["max_score"],
        per_item=None if doc["per_item"] is None else tuple(doc["per_item"]))


def session_to_doc(session: Session) -> dict[str, Any]:
    return {
        "session_id": session.session_id,
        "session_start_ms": session.session_start_ms,
        "start_ms": session.start_ms,
        "end_ms": session.end_ms,
        "activities_version": session.activities_version,
        "activities": [
            {"name": a.name, "start_ms": a.start_ms, "end_ms": a.end_ms}
            for a in session.activities
        ],
        "streams": [
            {
                "modality": s.modality,
                "source_id": s.source_id,
                "cleaned": s.cleaned,
                "samples": [[t, v] for t, v in s.samples],
                "report": None if s.report is None else {
                    "total": s.report.total, "kept": s.report.kept,
                    "non_finite": s.report.non_finite,
                    "out_of_range": s.report.out_of_range,
                    "duplicate_ts": s.report.duplicate_ts,
                },
            }
            for s in session.streams
        ],
        "media": [
            {"media_id": m.media_id, "kind": m.kind, "path": m.path,
             "master_start_ms": m.master_start_ms, "duration_ms": m.duration_ms}
            for m in session.media
        ],
        "tests": None if session.tests is None else {
            "pretest": _test_doc(session.tests.pretest),
            "posttest": _test_doc(session.tests.posttest),
        },
        "demographics": session.demographics,
        "derived": session.derived,
    }


def doc_to_session(doc: dict[str, Any]) -> Session:
    try:
        return Session(
            session_id=doc["session_id"],
            session_start_ms=doc["session_start_ms"],
            start_ms=doc["start_ms"],
            end_ms=doc["end_ms"],
            activities_version=doc["activities_version"],
            activities=tuple(
                ActivityInterval(a["name"], a["start_ms"], a["end_ms"])
                for a in doc["activities"]),
            streams=tuple(
                SignalStream(
                    modality=s["modality"], source_id=s["source_id"],
                    samples=tuple(Sample(int(t), float(v)) for t, v in s["samples"]),
                    cleaned=s["cleaned"],
                    report=None if s["report"] is None else CleaningReport(**s["report"]))
                for s in doc["streams"]),
            media=tuple(
                MediaAsset(m["media_id"], m["kind"], m["path"],
                           m["master_start_ms"], m["duration_ms"])
                for m in doc["media"]),
            tests=None if doc["tests"] is None else SessionTests(
                pretest=_test_from(doc["tests"]["pretest"]),
                posttest=_test_from(doc["tests"]["posttest"])),
            demographics=dict(doc["demographics"]),
            derived=doc["derived"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise StorageFailure(f"corrupt session document: {exc}") from exc


def _summary_of(session: Session) -> dict[str, Any]:
    return {
        "n_streams": len(session.streams),
        "n_activities": len(session.activities),
        "n_media": len(session.media),
        "start_ms": session.start_ms,
        "end_ms": session.end_ms,
        "has_tests": session.tests is not None,
    }


def _token(activities_version: int, data: bytes) -> str:
    return f"{activities_version}:{hashlib.sha256(data).hexdigest()[:16]}"


def _decode_doc(data: bytes) -> dict[str, Any]:
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise StorageFailure(f"stored document is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise StorageFailure("stored document is not a JSON object")
    return doc


def _token_of_bytes(data: bytes) -> str:
    doc = _decode_doc(data)
    try:
        return _token(doc["activities_version"], data)
    except KeyError as exc:
        raise StorageFailure("stored document lacks activities_version") from exc


# ---------------------------------------------------------------------------
# store interface
# ---------------------------------------------------------------------------


class SessionStore(ABC):
    """Durable home of session documents, media bytes, and the id registry."""

    # -- documents ---------------------------------------------------------

    def put_session(self, session: Session, expected: str | None = None) -> str:
        """Durably write a session; returns the new version token.

        `expected` is the token the writer read (None when creating).
        A mismatch with the stored state raises StaleWrite and leaves the
        store untouched. activities_version may never decrease.
        """
        session.validate()
        data = canonical_bytes(session_to_doc(session))
        current = self._read_doc_bytes(session.session_id)
        if current is None:
            if expected is not None:
                raise StaleWrite(
                    f"session {session.session_id} does not exist; token {expected!r}")
        else:
            current_token = _token_of_bytes(current)
            if expected != current_token:
                raise StaleWrite(
                    f"token {expected!r} does not match current {current_token!r}")
            stored_version = int(current_token.split(":", 1)[0])
            if session.activities_version < stored_version:
                raise ValueError(
                    f"activities_version may not decrease "
                    f"({stored_version} -> {session.activities_version})")
        self._write_doc_bytes(session.session_id, data,
                              _summary_of(session), session.activities_version)
        return _token(session.activities_version, data)

    def get_session(self, session_id: str) -> Session:
        data = self._read_doc_bytes(session_id)
        if data is None:
            raise NotFound(f"session {session_id} not found")
        return doc_to_session(_decode_doc(data))

    def get_session_with_token(self, session_id: str) -> tuple[Session, str]:
        data = self._read_doc_bytes(session_id)
        if data is None:
            raise NotFound(f"session {session_id} not found")
        return doc_to_session(_decode_doc(data)), _token_of_bytes(data)

    def current_token(self, session_id: str) -> str:
        data = self._read_doc_bytes(session_id)
        if data is None:
            raise NotFound(f"session {session_id} not found")
        return _token_of_bytes(data)

    # -- anonymization -----------------------------------------------------

    def anonymize(self, manifest: SessionManifest | str) -> tuple[str, AnonymizationRecord]:
        """Mint a fresh random session id for a learner reference.

        The id is 128 random bits, hex encoded, retried on the (negligible)
        collision with an existing session. The learner reference itself is
        recorded only as a salted digest, outside any session document.
        """
        learner_ref = manifest.learner_ref if isinstance(manifest, SessionManifest) \
            else manifest
        while True:
            session_id = secrets.token_hex(16)
            if not self._id_exists(session_id):
                break
        digest = hmac.new(self._salt(), learner_ref.encode("utf-8"),
                          hashlib.sha256).hexdigest()
        record = AnonymizationRecord(session_id=session_id, learner_ref_digest=digest)
        self._append_digest(record)
        return session_id, record

    # -- backend hooks -----------------------------------------------------

    @abstractmethod
    def _read_doc_bytes(self, session_id: str) -> bytes | None: ...

    @abstractmethod
    def _write_doc_bytes(self, session_id: str, data: bytes,
                         summary: dict[str, Any], activities_version: int) -> None: ...

    @abstractmethod
    def _id_exists(self, session_id: str) -> bool: ...

    @abstractmethod
    def _salt(self) -> bytes: ...

    @abstractmethod
    def _append_digest(self, record: AnonymizationRecord) -> None: ...

    @abstractmethod
    def list_sessions(self) -> list[SessionSummary]:
        """All sessions, ordered by session_id."""

    @abstractmethod
    def delete_session(self, session_id: str) -> None: ...

    # -- media -------------------------------------------------------------

    @abstractmethod
    def add_media(self, session_id: str, media_id: str, source: Path) -> str:
        """Copy a media file into the store; returns its storage-relative path."""

    @abstractmethod
    def read_media(self, session_id: str, media_id: str) -> bytes: ...


# ---------------------------------------------------------------------------
# in-memory backend
# ---------------------------------------------------------------------------


class MemoryStore(SessionStore):
    """Volatile backend with the exact semantics of the file layout."""

    def __init__(self) -> None:
        self._docs: dict[str, bytes] = {}
        self._summaries: dict[str, tuple[int, dict[str, Any]]] = {}
        self._media: dict[tuple[str, str], bytes] = {}
        self._digest_salt = secrets.token_bytes(16)
        self.digests: list[AnonymizationRecord] = []

    def _read_doc_bytes(self, session_id: str) -> bytes | None:
        return self._docs.get(session_id)

    def _write_doc_bytes(self, session_id: str, data: bytes,
                         summary: dict[str, Any], activities_version: int) -> None:
        self._docs[session_id] = data
        self._summaries[session_id] = (activities_version, summary)

    def _id_exists(self, session_id: str) -> bool:
        return session_id in self._docs or session_id in self._summaries

    def _salt(self) -> bytes:
        return self._digest_salt

    def _append_digest(self, record: AnonymizationRecord) -> None:
        self.digests.append(record)

    def list_sessions(self) -> list[SessionSummary]:
        return [SessionSummary(sid, version, dict(summary))
                for sid, (version, summary) in sorted(self._summaries.items())]

    def delete_session(self, session_id: str) -> None:
        if session_id not in self._docs:
            raise NotFound(f"session {session_id} not found")
        del self._docs[session_id]
        self._summaries.pop(session_id, None)
        for key in [k for k in self._media if k[0] == session_id]:
            del self._media[key]

    def add_media(self, session_id: str, media_id: str, source: Path) -> str:
        try:
            data = Path(source).read_bytes()
        except OSError as exc:
            raise StorageFailure(f"copy of {source} failed: {exc}") from exc
        self._media[(session_id, media_id)] = data
        return f"media/{session_id}/{media_id}"

    def read_media(self, session_id: str, media_id: str) -> bytes:
        try:
            return self._media[(session_id, media_id)]
        except KeyError:
            raise NotFound(f"media {media_id} of session {session_id} not found") from None


# ---------------------------------------------------------------------------
# file backend
# ---------------------------------------------------------------------------


class FileStore(SessionStore):
    """Document-per-session JSON under a root directory.

    Writes go through a temp file in the same directory followed by an
    atomic rename, so a crash mid-write leaves the previous version
    readable. index.json is a rebuildable summary cache.
    """

    def __init__(self, root: Path | str) -> None:
        self.root = Path(root)
        self.sessions_dir = self.root / "sessions"
        self.media_dir = self.root / "media"
        self.index_path = self.root / "index.json"
        self.digests_path = self.root / "anonymization.digests"
        self.sessions_dir.mkdir(parents=True, exist_ok=True)
        self.media_dir.mkdir(parents=True, exist_ok=True)

    # -- internals ----------------------------------------------------------

    def _doc_path(self, session_id: str) -> Path:
        if not session_id or "/" in session_id or session_id.startswith("."):
            raise NotFound(f"session {session_id!r} not found")
        return self.sessions_dir / f"{session_id}.json"

    def _atomic_write(self, path: Path, data: bytes) -> None:
        tmp = path.with_name(f".{path.name}.{secrets.token_hex(4)}.tmp")
        try:
            with open(tmp, "wb") as fh:
                fh.write(data)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, path)
        except OSError as exc:
            raise StorageFailure(f"write to {path} failed: {exc}") from exc
        finally:
            tmp.unlink(missing_ok=True)

    def _load_index(self) -> dict[str, Any]:
        if not self.index_path.exists():
            return self._rebuild_index()
        try:
            return json.loads(self.index_path.read_text("utf-8"))
        except (OSError, json.JSONDecodeError):
            return self._rebuild_index()

    def _rebuild_index(self) -> dict[str, Any]:
        index: dict[str, Any] = {"sessions": {}}
        for path in sorted(self.sessions_dir.glob("*.json")):
            try:
                session = doc_to_session(json.loads(path.read_text("utf-8")))
            except (StorageFailure, json.JSONDecodeError, OSError):
                continue
            index["sessions"][session.session_id] = {
                "activities_version": session.activities_version,
                "summary": _summary_of(session),
            }
        self._atomic_write(self.index_path, canonical_bytes(index))
        return index

    # -- backend hooks ------------------------------------------------------

    def _read_doc_bytes(self, session_id: str) -> bytes | None:
        path = self._doc_path(session_id)
        try:
            return path.read_bytes()
        except FileNotFoundError:
            return None
        except OSError as exc:
            raise StorageFailure(f"read of {path} failed: {exc}") from exc

    def _write_doc_bytes(self, session_id: str, data: bytes,
                         summary: dict[str, Any], activities_version: int) -> None:
        self._atomic_write(self._doc_path(session_id), data)
        index = self._load_index()
        index["sessions"][session_id] = {
            "activities_version": activities_version, "summary": summary}
        self._atomic_write(self.index_path, canonical_bytes(index))

    def _id_exists(self, session_id: str) -> bool:
        return self._doc_path(session_id).exists()

    def _salt(self) -> bytes:
        if self.digests_path.exists():
            first = self.digests_path.read_text("utf-8").split("\n", 1)[0]
            if first.startswith("# salt="):
                return bytes.fromhex(first.removeprefix("# salt="))
        salt = secrets.token_bytes(16)
        self._atomic_write(self.digests_path, f"# salt={salt.hex()}\n".encode("utf-8"))
        return salt

    def _append_digest(self, record: AnonymizationRecord) -> None:
        self._salt()  # ensure the file and its salt header exist
        try:
            with open(self.digests_path, "a", encoding="utf-8") as fh:
                fh.write(f"{record.learner_ref_digest} {record.session_id}\n")
                fh.flush()
                os.fsync(fh.fileno())
        except OSError as exc:
            raise StorageFailure(f"append to {self.digests_path} failed: {exc}") from exc

    def list_sessions(self) -> list[SessionSummary]:
        index = self._load_index()
        return [
            SessionSummary(sid, entry["activities_version"], dict(entry["summary"]))
            for sid, entry in sorted(index["sessions"].items())
        ]

    def delete_session(self, session_id: str) -> None:
        path = self._doc_path(session_id)
        if not path.exists():
            raise NotFound(f"session {session_id} not found")
        path.unlink()
        shutil.rmtree(self.media_dir / session_id, ignore_errors=True)
        index = self._load_index()
        index["sessions"].pop(session_id, None)
        self._atomic_write(self.index_path, canonical_bytes(index))

    def add_media(self, session_id: str, media_id: str, source: Path) -> str:
        self._doc_path(session_id)  # reject traversal in the session id
        if "/" in media_id or media_id.startswith("."):
            raise StorageFailure(f"invalid media id {media_id!r}")
        target_dir = self.media_dir / session_id
        target_dir.mkdir(parents=True, exist_ok=True)
        try:
            shutil.copyfile(source, target_dir / media_id)
        except OSError as exc:
            raise StorageFailure(f"copy of {source} failed: {exc}") from exc
        return f"media/{session_id}/{media_id}"

    def read_media(self, session_id: str, media_id: str) -> bytes:
        self._doc_path(session_id)  # reject traversal in the session id
        if "/" in media_id or media_id.startswith("."):
            raise NotFound(f"media {media_id!r} not found")
        path = self.media_dir / session_id / media_id
        try:
            return path.read_bytes()
        except FileNotFoundError:
            raise NotFound(
                f"media {media_id} of session {session_id} not found") from None
