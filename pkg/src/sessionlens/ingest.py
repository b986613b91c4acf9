"""Parsers for every external input file.

All parsers are pure functions from bytes to domain values and perform
no cleaning: out-of-range or out-of-order samples pass through untouched
and are resolved by `analytics.clean_signal`. Path fields are recorded
verbatim; existence is checked later by the ingest pipeline.

Formats (all UTF-8):

- session manifest: strict JSON object, unknown keys rejected
- signal log:       CSV with header exactly ``timestamp_ms,value``
- activity log:     JSONL, one ``{"name", "start_ms", "end_ms"}`` per line
- test result:      JSON object ``{"score", "max_score", "per_item"?}``
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

from sessionlens.errors import (
    EmptyFile,
    InvalidManifest,
    InvalidRecord,
    InvalidTest,
    MalformedManifest,
    MalformedRow,
    MalformedTest,
)
from sessionlens.timeline import ClockMapping

MODALITIES = frozenset({
    "attention",
    "meditation",
    "wave_delta",
    "wave_theta",
    "wave_alpha",
    "wave_beta",
    "wave_gamma",
    "heart_rate",
    "pupil_diameter",
})

MEDIA_KINDS = frozenset({"screen", "webcam_front", "webcam_side", "fixation_overlay"})

TEST_KINDS = frozenset({"pretest", "posttest"})

# A clock entry is either an explicit mapping or a list of marker pairs
# (t_source_ms, t_master_ms); None means the identity mapping.
ClockSpec = ClockMapping | list[tuple[int, int]] | None


@dataclass(frozen=True)
class SignalFileSpec:
    path: str
    modality: str
    source_id: str
    clock: ClockSpec = None


@dataclass(frozen=True)
class MediaFileSpec:
    path: str
    kind: str
    source_start_ms: int
    duration_ms: int
    source_id: str
    clock: ClockSpec = None


@dataclass(frozen=True)
class TestFilesSpec:
    pretest: str | None = None
    posttest: str | None = None


@dataclass(frozen=True)
class SessionManifest:
    """Validated description of one recorded session's input files."""

    learner_ref: str
    session_start_ms: int
    signal_files: tuple[SignalFileSpec, ...]
    activity_file: str
    media_files: tuple[MediaFileSpec, ...] = ()
    test_files: TestFilesSpec | None = None
    demographics: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class RawActivityRecord:
    """One activity span on the activity log's own clock."""

    name: str
    start_ms: int
    end_ms: int


@dataclass(frozen=True)
class TestResult:
    kind: str
    score: float
    max_score: float
    per_item: tuple[float, ...] | None = None


# ---------------------------------------------------------------------------
# manifest
# ---------------------------------------------------------------------------

_TOP_KEYS = {
    "learner_ref", "session_start_ms", "signal_files", "activity_file",
    "media_files", "test_files", "demographics",
}
_SIGNAL_KEYS = {"path", "modality", "source_id", "clock"}
_MEDIA_KEYS = {"path", "kind", "source_start_ms", "duration_ms", "source_id", "clock"}
_CLOCK_KEYS = {"scale", "offset_ms"}


def _require(obj: dict, key: str, where: str) -> Any:
    if key not in obj:
        raise InvalidManifest(f"{where}.{key}" if where else key, "missing required key")
    return obj[key]


def _reject_unknown(obj: dict, allowed: set[str], where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        name = sorted(unknown)[0]
        raise InvalidManifest(f"{where}.{name}" if where else name, "unknown key")


def _as_str(value: Any, where: str, *, nonempty: bool = True) -> str:
    if not isinstance(value, str):
        raise InvalidManifest(where, f"expected string, got {type(value).__name__}")
    if nonempty and not value:
        raise InvalidManifest(where, "must be non-empty")
    return value


def _as_int(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InvalidManifest(where, f"expected integer, got {type(value).__name__}")
    return value


def _parse_clock(value: Any, where: str) -> ClockSpec:
    if value is None:
        return None
    if isinstance(value, dict):
        _reject_unknown(value, _CLOCK_KEYS, where)
        scale = value.get("scale", 1.0)
        offset = value.get("offset_ms", 0.0)
        if isinstance(scale, bool) or not isinstance(scale, (int, float)):
            raise InvalidManifest(f"{where}.scale", "expected number")
        if isinstance(offset, bool) or not isinstance(offset, (int, float)):
            raise InvalidManifest(f"{where}.offset_ms", "expected number")
        try:
            return ClockMapping(scale=float(scale), offset_ms=float(offset))
        except ValueError as exc:
            raise InvalidManifest(where, str(exc)) from exc
    if isinstance(value, list):
        if not value:
            raise InvalidManifest(where, "marker list must be non-empty")
        pairs: list[tuple[int, int]] = []
        for i, pair in enumerate(value):
            if (not isinstance(pair, list)) or len(pair) != 2:
                raise InvalidManifest(f"{where}[{i}]", "expected [t_source_ms, t_master_ms]")
            pairs.append((_as_int(pair[0], f"{where}[{i}][0]"),
                          _as_int(pair[1], f"{where}[{i}][1]")))
        return pairs
    raise InvalidManifest(where, "expected mapping object, marker list, or null")


def parse_manifest(data: bytes) -> SessionManifest:
    """Parse and validate a session manifest.

    Raises MalformedManifest for syntax-level problems and InvalidManifest
    (carrying the offending field path) for schema or invariant violations.
    """
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedManifest(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedManifest(f"top level must be an object, got {type(doc).__name__}")

    _reject_unknown(doc, _TOP_KEYS, "")
    learner_ref = _as_str(_require(doc, "learner_ref", ""), "learner_ref")
    session_start_ms = _as_int(_require(doc, "session_start_ms", ""), "session_start_ms")
    if session_start_ms <= 0:
        raise InvalidManifest("session_start_ms", "must be positive")
    activity_file = _as_str(_require(doc, "activity_file", ""), "activity_file")

    raw_signals = _require(doc, "signal_files", "")
    if not isinstance(raw_signals, list):
        raise InvalidManifest("signal_files", "expected list")
    signals: list[SignalFileSpec] = []
    seen: set[tuple[str, str]] = set()
    for i, entry in enumerate(raw_signals):
        where = f"signal_files[{i}]"
        if not isinstance(entry, dict):
            raise InvalidManifest(where, "expected object")
        _reject_unknown(entry, _SIGNAL_KEYS, where)
        modality = _as_str(_require(entry, "modality", where), f"{where}.modality")
        if modality not in MODALITIES:
            raise InvalidManifest(f"{where}.modality", f"unknown modality {modality!r}")
        source_id = _as_str(_require(entry, "source_id", where), f"{where}.source_id")
        key = (modality, source_id)
        if key in seen:
            raise InvalidManifest(f"{where}", f"duplicate (modality, source_id) {key!r}")
        seen.add(key)
        signals.append(SignalFileSpec(
            path=_as_str(_require(entry, "path", where), f"{where}.path"),
            modality=modality,
            source_id=source_id,
            clock=_parse_clock(entry.get("clock"), f"{where}.clock"),
        ))

    media: list[MediaFileSpec] = []
    raw_media = doc.get("media_files", [])
    if not isinstance(raw_media, list):
        raise InvalidManifest("media_files", "expected list")
    for i, entry in enumerate(raw_media):
        where = f"media_files[{i}]"
        if not isinstance(entry, dict):
            raise InvalidManifest(where, "expected object")
        _reject_unknown(entry, _MEDIA_KEYS, where)
        kind = _as_str(_require(entry, "kind", where), f"{where}.kind")
        if kind not in MEDIA_KINDS:
            raise InvalidManifest(f"{where}.kind", f"unknown media kind {kind!r}")
        duration = _as_int(_require(entry, "duration_ms", where), f"{where}.duration_ms")
        if duration <= 0:
            raise InvalidManifest(f"{where}.duration_ms", "must be positive")
        media.append(MediaFileSpec(
            path=_as_str(_require(entry, "path", where), f"{where}.path"),
            kind=kind,
            source_start_ms=_as_int(_require(entry, "source_start_ms", where),
                                    f"{where}.source_start_ms"),
            duration_ms=duration,
            source_id=_as_str(_require(entry, "source_id", where), f"{where}.source_id"),
            clock=_parse_clock(entry.get("clock"), f"{where}.clock"),
        ))

    tests: TestFilesSpec | None = None
    if doc.get("test_files") is not None:
        raw_tests = doc["test_files"]
        if not isinstance(raw_tests, dict):
            raise InvalidManifest("test_files", "expected object")
        _reject_unknown(raw_tests, TEST_KINDS, "test_files")
        pre = raw_tests.get("pretest")
        post = raw_tests.get("posttest")
        tests = TestFilesSpec(
            pretest=None if pre is None else _as_str(pre, "test_files.pretest"),
            posttest=None if post is None else _as_str(post, "test_files.posttest"),
        )

    demographics: dict[str, str] = {}
    raw_demo = doc.get("demographics", {})
    if not isinstance(raw_demo, dict):
        raise InvalidManifest("demographics", "expected object")
    for key, value in raw_demo.items():
        if not isinstance(value, str):
            raise InvalidManifest(f"demographics.{key}", "values must be strings")
        demographics[key] = value

    return SessionManifest(
        learner_ref=learner_ref,
        session_start_ms=session_start_ms,
        signal_files=tuple(signals),
        activity_file=activity_file,
        media_files=tuple(media),
        test_files=tests,
        demographics=demographics,
    )


def serialize_manifest(manifest: SessionManifest) -> bytes:
    """Render a manifest back to its JSON form; parse_manifest inverts this."""

    def clock_doc(clock: ClockSpec) -> Any:
        if clock is None:
            return None
        if isinstance(clock, ClockMapping):
            return {"scale": clock.scale, "offset_ms": clock.offset_ms}
        return [[t_s, t_m] for t_s, t_m in clock]

    doc: dict[str, Any] = {
        "learner_ref": manifest.learner_ref,
        "session_start_ms": manifest.session_start_ms,
        "signal_files": [
            {"path": s.path, "modality": s.modality, "source_id": s.source_id,
             **({"clock": clock_doc(s.clock)} if s.clock is not None else {})}
            for s in manifest.signal_files
        ],
        "activity_file": manifest.activity_file,
        "media_files": [
            {"path": m.path, "kind": m.kind, "source_start_ms": m.source_start_ms,
             "duration_ms": m.duration_ms, "source_id": m.source_id,
             **({"clock": clock_doc(m.clock)} if m.clock is not None else {})}
            for m in manifest.media_files
        ],
    }
    if manifest.test_files is not None:
        tests: dict[str, str] = {}
        if manifest.test_files.pretest is not None:
            tests["pretest"] = manifest.test_files.pretest
        if manifest.test_files.posttest is not None:
            tests["posttest"] = manifest.test_files.posttest
        doc["test_files"] = tests
    if manifest.demographics:
        doc["demographics"] = manifest.demographics
    return (json.dumps(doc, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# signal CSV
# ---------------------------------------------------------------------------

_SIGNAL_HEADER = "timestamp_ms,value"


def _lines(data: bytes, what: str) -> list[str]:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedRow(0, f"{what} is not UTF-8: {exc}") from exc
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return [line[:-1] if line.endswith("\r") else line for line in lines]


def parse_signal_file(data: bytes, modality: str) -> list[tuple[int, float]]:
    """Parse one signal CSV into (t_source_ms, value) pairs in file order.

    No cleaning happens here: non-monotonic timestamps and out-of-range
    values are preserved for `analytics.clean_signal` to resolve.
    """
    if modality not in MODALITIES:
        raise ValueError(f"unknown modality {modality!r}")
    lines = _lines(data, "signal file")
    if not lines:
        raise EmptyFile("signal file has no content")
    if lines[0] != _SIGNAL_HEADER:
        raise MalformedRow(1, f"header must be {_SIGNAL_HEADER!r}, got {lines[0]!r}")
    if len(lines) == 1:
        raise EmptyFile("signal file has a header but no data rows")

    samples: list[tuple[int, float]] = []
    for row_no, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 2:
            raise MalformedRow(row_no, f"expected 2 comma-separated fields, got {len(parts)}")
        try:
            t = int(parts[0])
            v = float(parts[1])
        except ValueError as exc:
            raise MalformedRow(row_no, str(exc)) from exc
        samples.append((t, v))
    return samples


# ---------------------------------------------------------------------------
# activity JSONL
# ---------------------------------------------------------------------------

_ACTIVITY_KEYS = {"name", "start_ms", "end_ms"}


def parse_activity_log(data: bytes) -> list[RawActivityRecord]:
    """Parse the activity JSONL into records in file order.

    Each record's start < end is enforced here; overlap between records is
    deliberately not (it is checked at session assembly, after the clock
    mapping is applied).
    """
    lines = _lines(data, "activity log")
    if not lines:
        raise EmptyFile("activity log has no content")
    records: list[RawActivityRecord] = []
    for row_no, line in enumerate(lines, start=1):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRow(row_no, f"not valid JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise MalformedRow(row_no, "expected a JSON object")
        if set(obj) != _ACTIVITY_KEYS:
            raise MalformedRow(
                row_no, f"expected exactly keys {sorted(_ACTIVITY_KEYS)}, got {sorted(obj)}")
        name = obj["name"]
        if not isinstance(name, str):
            raise MalformedRow(row_no, "name must be a string")
        start, end = obj["start_ms"], obj["end_ms"]
        for label, value in (("start_ms", start), ("end_ms", end)):
            if isinstance(value, bool) or not isinstance(value, int):
                raise MalformedRow(row_no, f"{label} must be an integer")
        if not name:
            raise InvalidRecord(row_no, "name must be non-empty")
        if start >= end:
            raise InvalidRecord(row_no, f"start_ms {start} must be < end_ms {end}")
        records.append(RawActivityRecord(name=name, start_ms=start, end_ms=end))
    return records


# ---------------------------------------------------------------------------
# test JSON
# ---------------------------------------------------------------------------

_TEST_KEYS = {"score", "max_score", "per_item"}


def parse_test_file(data: bytes, kind: str) -> TestResult:
    """Parse one pretest/posttest score document."""
    if kind not in TEST_KINDS:
        raise ValueError(f"kind must be one of {sorted(TEST_KINDS)}, got {kind!r}")
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedTest(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedTest(f"top level must be an object, got {type(doc).__name__}")
    unknown = set(doc) - _TEST_KEYS
    if unknown:
        raise MalformedTest(f"unknown keys {sorted(unknown)}")
    for key in ("score", "max_score"):
        if key not in doc:
            raise MalformedTest(f"missing required key {key!r}")
        if isinstance(doc[key], bool) or not isinstance(doc[key], (int, float)):
            raise MalformedTest(f"{key} must be a number")

    score = float(doc["score"])
    max_score = float(doc["max_score"])
    if not (math.isfinite(score) and math.isfinite(max_score)):
        raise MalformedTest("score and max_score must be finite")
    if max_score <= 0:
        raise InvalidTest(f"max_score must be positive, got {max_score}")
    if not (0 <= score <= max_score):
        raise InvalidTest(f"score {score} outside [0, {max_score}]")

    per_item: tuple[float, ...] | None = None
    if doc.get("per_item") is not None:
        raw = doc["per_item"]
        if not isinstance(raw, list):
            raise MalformedTest("per_item must be a list of numbers")
        items: list[float] = []
        for i, item in enumerate(raw):
            if isinstance(item, bool) or not isinstance(item, (int, float)):
                raise MalformedTest(f"per_item[{i}] must be a number")
            items.append(float(item))
        if abs(sum(items) - score) > 1e-9:
            raise InvalidTest(
                f"per_item sums to {sum(items)!r}, score is {score!r}")
        per_item = tuple(items)

    return TestResult(kind=kind, score=score, max_score=max_score, per_item=per_item)
