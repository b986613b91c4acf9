"""The end-to-end engine behind the HTTP API and CLI.

`SessionService` owns no state of its own: every operation loads from
the store, computes with the analytics module, and writes back through
the store's version-token protocol. Ingest wires the full pipeline:

    parse -> clock mapping -> clean -> assemble -> anonymize -> persist

Derived analytics (stats, correlations, extrema, test comparison) are
cached on the session document keyed by activities_version and
recomputed synchronously whenever activities change.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Sequence

from sessionlens import analytics
from sessionlens.analytics import (
    ActivityInterval,
    SignalStream,
    check_disjoint,
)
from sessionlens.config import EngineConfig
from sessionlens.errors import (
    BadParams,
    IngestError,
    NotFound,
    OutOfBounds,
    SessionLensError,
    StaleWrite,
    UnknownActivity,
    VersionConflict,
)
from sessionlens.ingest import (
    SessionManifest,
    TestResult,
    parse_activity_log,
    parse_manifest,
    parse_signal_file,
    parse_test_file,
)
from sessionlens.store import (
    MediaAsset,
    Session,
    SessionStore,
    SessionTests,
    canonical_bytes,
    session_to_doc,
)
from sessionlens.timeline import (
    ClockMapping,
    apply_clock_mapping,
    estimate_clock_mapping,
    round_half_away,
)

ANALYTICS_KINDS = ("activity_stats", "correlations", "extrema", "ranking",
                   "test_comparison")


def _read_file(path: Path, stage: str) -> bytes:
    try:
        return path.read_bytes()
    except OSError as exc:
        raise IngestError(stage, str(path), exc) from exc


def _resolve_clock(spec_clock: Any, where: str) -> ClockMapping:
    if spec_clock is None:
        return ClockMapping.identity()
    if isinstance(spec_clock, ClockMapping):
        return spec_clock
    try:
        return estimate_clock_mapping(spec_clock)
    except SessionLensError as exc:
        raise IngestError("estimate_clock_mapping", where, exc) from exc


# ---------------------------------------------------------------------------
# derived analytics
# ---------------------------------------------------------------------------


def _stats_doc(s: analytics.ActivityStats) -> dict[str, Any]:
    return {"activity_name": s.activity_name, "modality": s.modality,
            "source_id": s.source_id, "n": s.n, "mean": s.mean,
            "min": s.min, "max": s.max, "stddev": s.stddev}


def _corr_doc(c: analytics.CorrelationMatrix) -> dict[str, Any]:
    return {"labels": [list(label) for label in c.labels],
            "r": [list(row) for row in c.r],
            "n_common": [list(row) for row in c.n_common],
            "step_ms": c.step_ms}


def _event_doc(e: analytics.ExtremumEvent) -> dict[str, Any]:
    return {"kind": e.kind, "t_ms": e.t_ms, "value": e.value,
            "prominence": e.prominence, "activity_name": e.activity_name}


def _comparison_doc(c: analytics.TestComparison) -> dict[str, Any]:
    return {"pre_score": c.pre_score, "post_score": c.post_score,
            "max_score": c.max_score, "delta": c.delta,
            "relative_gain": c.relative_gain}


def compute_derived(
    streams: Sequence[SignalStream],
    intervals: Sequence[ActivityInterval],
    tests: SessionTests | None,
    version: int,
    config: EngineConfig,
) -> dict[str, Any]:
    """All cached analytics for one activity-list version."""
    stats: list[dict[str, Any]] = []
    extrema: list[dict[str, Any]] = []
    for stream in streams:
        labeled = analytics.segment_by_activity(stream, intervals)
        stats.extend(_stats_doc(s) for s in analytics.activity_stats(
            labeled, stream.modality, stream.source_id))
        smoothed = analytics.smooth_sliding_window(stream, config.window_ms)
        events = analytics.detect_extrema(smoothed, intervals, config.prominence_frac)
        extrema.append({
            "modality": stream.modality, "source_id": stream.source_id,
            "window_ms": config.window_ms,
            "prominence_frac": config.prominence_frac,
            "events": [_event_doc(e) for e in events],
        })

    correlations = None
    if len(streams) >= 2:
        correlations = _corr_doc(analytics.correlate_streams(streams, config.step_ms))

    comparison = None
    if tests is not None and tests.pretest is not None and tests.posttest is not None:
        comparison = _comparison_doc(analytics.compare_tests(
            tests.pretest, tests.posttest))

    return {"version": version, "activity_stats": stats,
            "correlations": correlations, "extrema": extrema,
            "test_comparison": comparison}


# ---------------------------------------------------------------------------
# service
# ---------------------------------------------------------------------------


class SessionService:
    def __init__(self, store: SessionStore, config: EngineConfig | None = None) -> None:
        self.store = store
        self.config = config or EngineConfig()

    # -- ingest --------------------------------------------------------------

    def ingest_session(self, manifest_path: Path | str) -> str:
        """Run the full pipeline on a session bundle; returns the new id."""
        manifest_path = Path(manifest_path)
        base = manifest_path.parent
        raw = _read_file(manifest_path, "parse_manifest")
        try:
            manifest = parse_manifest(raw)
        except SessionLensError as exc:
            raise IngestError("parse_manifest", str(manifest_path), exc) from exc

        streams = self._ingest_streams(manifest, base)
        intervals = self._ingest_activities(manifest, base)
        tests = self._ingest_tests(manifest, base)

        session_id, _record = self.store.anonymize(manifest)
        media = self._ingest_media(manifest, base, session_id)

        start_candidates = [a.start_ms for a in intervals] + \
            [s.samples[0].t_ms for s in streams] + \
            [m.master_start_ms for m in media]
        end_candidates = [a.end_ms for a in intervals] + \
            [s.samples[-1].t_ms for s in streams] + \
            [m.master_start_ms + m.duration_ms for m in media]
        start_ms, end_ms = min(start_candidates), max(end_candidates)

        try:
            derived = compute_derived(streams, intervals, tests, 1, self.config)
        except SessionLensError as exc:
            raise IngestError("compute_derived", str(manifest_path), exc) from exc

        session = Session(
            session_id=session_id,
            session_start_ms=manifest.session_start_ms,
            start_ms=start_ms,
            end_ms=end_ms,
            activities_version=1,
            activities=tuple(intervals),
            streams=tuple(streams),
            media=tuple(media),
            tests=tests,
            demographics=dict(manifest.demographics),
            derived=derived,
        )
        self.store.put_session(session, expected=None)
        return session_id

    def _ingest_streams(self, manifest: SessionManifest,
                        base: Path) -> list[SignalStream]:
        streams: list[SignalStream] = []
        for spec in manifest.signal_files:
            path = base / spec.path
            raw = _read_file(path, "parse_signal_file")
            try:
                source_samples = parse_signal_file(raw, spec.modality)
            except SessionLensError as exc:
                raise IngestError("parse_signal_file", str(path), exc) from exc
            mapping = _resolve_clock(spec.clock, str(path))
            samples = apply_clock_mapping(source_samples, mapping)
            stream = SignalStream(modality=spec.modality, source_id=spec.source_id,
                                  samples=tuple(samples))
            try:
                cleaned, _report = analytics.clean_signal(
                    stream, self.config.range_for(spec.modality))
            except SessionLensError as exc:
                raise IngestError("clean_signal", str(path), exc) from exc
            streams.append(cleaned)
        return streams

    def _ingest_activities(self, manifest: SessionManifest,
                           base: Path) -> list[ActivityInterval]:
        path = base / manifest.activity_file
        raw = _read_file(path, "parse_activity_log")
        try:
            records = parse_activity_log(raw)
        except SessionLensError as exc:
            raise IngestError("parse_activity_log", str(path), exc) from exc
        # The activity log's clock IS the master timeline, so records map 1:1.
        intervals = [ActivityInterval(r.name, r.start_ms, r.end_ms) for r in records]
        try:
            check_disjoint(intervals)
        except SessionLensError as exc:
            raise IngestError("validate_activities", str(path), exc) from exc
        return intervals

    def _ingest_tests(self, manifest: SessionManifest,
                      base: Path) -> SessionTests | None:
        if manifest.test_files is None:
            return None
        results: dict[str, TestResult] = {}
        for kind, rel in (("pretest", manifest.test_files.pretest),
                          ("posttest", manifest.test_files.posttest)):
            if rel is None:
                continue
            path = base / rel
            raw = _read_file(path, "parse_test_file")
            try:
                results[kind] = parse_test_file(raw, kind)
            except SessionLensError as exc:
                raise IngestError("parse_test_file", str(path), exc) from exc
        if not results:
            return None
        return SessionTests(pretest=results.get("pretest"),
                            posttest=results.get("posttest"))

    def _ingest_media(self, manifest: SessionManifest, base: Path,
                      session_id: str) -> list[MediaAsset]:
        media: list[MediaAsset] = []
        for i, spec in enumerate(manifest.media_files):
            source = base / spec.path
            media_id = f"{spec.kind}-{i:02d}{Path(spec.path).suffix}"
            try:
                rel_path = self.store.add_media(session_id, media_id, source)
            except SessionLensError as exc:
                raise IngestError("store_media", str(source), exc) from exc
            mapping = _resolve_clock(spec.clock, str(source))
            media.append(MediaAsset(
                media_id=media_id, kind=spec.kind, path=rel_path,
                master_start_ms=round_half_away(mapping.map(spec.source_start_ms)),
                duration_ms=spec.duration_ms))
        return media

    # -- relabel ---------------------------------------------------------------

    def relabel(self, session_id: str, base_version: int,
                intervals: Sequence[ActivityInterval]) -> int:
        """Replace the activity list, bump the version, recompute analytics.

        Validation happens before anything is written: on any error the
        stored session is untouched.
        """
        session, token = self.store.get_session_with_token(session_id)
        if base_version != session.activities_version:
            raise VersionConflict(
                f"base_version {base_version} does not match current "
                f"{session.activities_version}")
        ordered = check_disjoint(intervals)
        for interval in ordered:
            if interval.start_ms < session.start_ms or interval.end_ms > session.end_ms:
                raise OutOfBounds(
                    f"activity {interval.name!r} [{interval.start_ms}, "
                    f"{interval.end_ms}) outside session span "
                    f"[{session.start_ms}, {session.end_ms}]")

        new_version = session.activities_version + 1
        session.activities = tuple(ordered)
        session.activities_version = new_version
        session.derived = compute_derived(
            session.streams, ordered, session.tests, new_version, self.config)
        try:
            self.store.put_session(session, expected=token)
        except StaleWrite as exc:
            raise VersionConflict(str(exc)) from exc
        return new_version

    # -- reads -----------------------------------------------------------------

    def list_sessions_payload(self) -> dict[str, Any]:
        return {"sessions": [
            {"session_id": sid, "activities_version": version, **summary}
            for sid, version, summary in self.store.list_sessions()
        ]}

    def get_session_payload(self, session_id: str) -> dict[str, Any]:
        session = self.store.get_session(session_id)
        doc = session_to_doc(session)
        return {
            "session_id": session.session_id,
            "session_start_ms": session.session_start_ms,
            "start_ms": session.start_ms,
            "end_ms": session.end_ms,
            "activities_version": session.activities_version,
            "activities": doc["activities"],
            "streams": [
                {"modality": s.modality, "source_id": s.source_id,
                 "n_samples": len(s.samples), "report": stream_doc["report"]}
                for s, stream_doc in zip(session.streams, doc["streams"])
            ],
            "media": doc["media"],
            "tests": doc["tests"],
            "demographics": doc["demographics"],
        }

    def get_activities_payload(self, session_id: str) -> dict[str, Any]:
        session = self.store.get_session(session_id)
        return {
            "session_id": session.session_id,
            "activities_version": session.activities_version,
            "span": {"start_ms": session.start_ms, "end_ms": session.end_ms},
            "activities": [
                {"name": a.name, "start_ms": a.start_ms, "end_ms": a.end_ms}
                for a in session.activities
            ],
        }

    def get_stream_payload(self, session_id: str, modality: str, source_id: str,
                           smooth_ms: int | None = None,
                           activity: str | None = None) -> dict[str, Any]:
        """Cleaned samples of one stream, optionally smoothed or filtered.

        Smoothing (when requested) runs over the whole stream before the
        activity filter, so filtered values keep their full trailing
        context. smooth_ms of 0 returns the raw cleaned samples.
        """
        session = self.store.get_session(session_id)
        stream = self._find_stream(session, modality, source_id)
        if activity is not None and \
                all(a.name != activity for a in session.activities):
            raise UnknownActivity(f"no activity named {activity!r}")

        if smooth_ms:
            samples = analytics.smooth_sliding_window(stream, smooth_ms)
        else:
            samples = list(stream.samples)
        if activity is not None:
            labels = [name for _s, name in
                      analytics.segment_by_activity(stream, session.activities)]
            samples = [s for s, name in zip(samples, labels) if name == activity]

        return {
            "session_id": session_id,
            "activities_version": session.activities_version,
            "modality": modality,
            "source_id": source_id,
            "smooth_window_ms": smooth_ms,
            "activity": activity,
            "samples": [[s.t_ms, s.value] for s in samples],
            "bands": [
                {"name": a.name, "start_ms": a.start_ms, "end_ms": a.end_ms}
                for a in session.activities
            ],
        }

    def get_analytics_payload(self, session_id: str, kind: str,
                              params: dict[str, Any] | None = None) -> dict[str, Any]:
        params = dict(params or {})
        if kind not in ANALYTICS_KINDS:
            raise BadParams(f"unknown analytics kind {kind!r}; "
                            f"expected one of {list(ANALYTICS_KINDS)}")
        session, derived = self._session_with_fresh_derived(session_id)
        payload: dict[str, Any] = {
            "session_id": session_id,
            "activities_version": session.activities_version,
            "kind": kind,
        }

        if kind == "activity_stats":
            stats = derived["activity_stats"]
            modality = params.get("modality")
            source_id = params.get("source_id")
            if modality is not None:
                stats = [s for s in stats if s["modality"] == modality]
            if source_id is not None:
                stats = [s for s in stats if s["source_id"] == source_id]
            payload["result"] = stats

        elif kind == "correlations":
            step_ms = _int_param(params, "step_ms", self.config.step_ms)
            activity = params.get("activity")
            if step_ms == self.config.step_ms and activity is None:
                payload["result"] = derived["correlations"]
            else:
                within = None
                if activity is not None:
                    matches = [a for a in session.activities if a.name == activity]
                    if not matches:
                        raise UnknownActivity(f"no activity named {activity!r}")
                    if len(matches) > 1:
                        raise BadParams(
                            f"activity name {activity!r} is ambiguous "
                            f"({len(matches)} intervals)")
                    within = matches[0]
                if len(session.streams) < 2:
                    payload["result"] = None
                else:
                    payload["result"] = _corr_doc(analytics.correlate_streams(
                        session.streams, step_ms, within=within))

        elif kind == "extrema":
            window_ms = _int_param(params, "window_ms", self.config.window_ms)
            frac = _float_param(params, "prominence_frac", self.config.prominence_frac)
            modality = params.get("modality")
            source_id = params.get("source_id")
            if window_ms == self.config.window_ms and frac == self.config.prominence_frac:
                entries = derived["extrema"]
            else:
                entries = []
                for stream in session.streams:
                    smoothed = analytics.smooth_sliding_window(stream, window_ms)
                    try:
                        events = analytics.detect_extrema(
                            smoothed, session.activities, frac)
                    except ValueError as exc:
                        raise BadParams(str(exc)) from exc
                    entries.append({
                        "modality": stream.modality, "source_id": stream.source_id,
                        "window_ms": window_ms, "prominence_frac": frac,
                        "events": [_event_doc(e) for e in events]})
            if modality is not None:
                entries = [e for e in entries if e["modality"] == modality]
            if source_id is not None:
                entries = [e for e in entries if e["source_id"] == source_id]
            payload["result"] = entries

        elif kind == "ranking":
            modality = params.get("modality")
            source_id = params.get("source_id")
            if not modality or not source_id:
                raise BadParams("ranking requires modality and source_id params")
            stats = [analytics.ActivityStats(**doc) for doc in derived["activity_stats"]]
            ranked = analytics.rank_activities(stats, modality, source_id)
            payload["result"] = [
                {"activity_name": name, "mean": mean} for name, mean in ranked]

        else:  # test_comparison
            payload["result"] = derived["test_comparison"]

        return payload

    def get_media_manifest(self, session_id: str) -> dict[str, Any]:
        session = self.store.get_session(session_id)
        return {
            "session_id": session_id,
            "assets": [
                {"media_id": m.media_id, "kind": m.kind,
                 "url": f"/media/{session_id}/{m.media_id}",
                 "master_start_ms": m.master_start_ms,
                 "duration_ms": m.duration_ms}
                for m in session.media
            ],
        }

    def export_session(self, session_id: str) -> bytes:
        return canonical_bytes(session_to_doc(self.store.get_session(session_id)))

    # -- helpers ---------------------------------------------------------------

    def _find_stream(self, session: Session, modality: str,
                     source_id: str) -> SignalStream:
        for stream in session.streams:
            if stream.modality == modality and stream.source_id == source_id:
                return stream
        raise NotFound(f"no stream ({modality!r}, {source_id!r}) "
                       f"in session {session.session_id}")

    def _session_with_fresh_derived(
            self, session_id: str) -> tuple[Session, dict[str, Any]]:
        session, token = self.store.get_session_with_token(session_id)
        derived = session.derived
        if derived is None or derived.get("version") != session.activities_version:
            derived = compute_derived(
                session.streams, session.activities, session.tests,
                session.activities_version, self.config)
            session.derived = derived
            try:
                self.store.put_session(session, expected=token)
            except StaleWrite:
                pass  # racing writer refreshed it; serve our freshly computed copy
        return session, derived


def _int_param(params: dict[str, Any], key: str, default: int) -> int:
    if key not in params or params[key] is None:
        return default
    try:
        return int(params[key])
    except (TypeError, ValueError):
        raise BadParams(f"{key} must be an integer, got {params[key]!r}") from None


def _float_param(params: dict[str, Any], key: str, default: float) -> float:
    if key not in params or params[key] is None:
        return default
    try:
        return float(params[key])
    except (TypeError, ValueError):
        raise BadParams(f"{key} must be a number, got {params[key]!r}") from None
