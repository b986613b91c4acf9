"""HTTP front end for `SessionService`.

One route per capability, all JSON except raw media. Errors leave as
``{"code", "message"}`` (plus ``"stage"`` for ingest failures) with the
status picked from the exception type, so clients never parse prose.
Responses are built from deterministic payload dicts: repeating a GET
against an unchanged session returns byte-identical bodies.
"""

from __future__ import annotations

import mimetypes
import re
from pathlib import Path

from fastapi import FastAPI, Query, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, ConfigDict

from sessionlens.analytics import ActivityInterval
from sessionlens.errors import (
    BadParams,
    IngestError,
    MismatchedScales,
    NoSuchModality,
    NotFound,
    OutOfBounds,
    OverlappingActivities,
    SessionLensError,
    StaleWrite,
    StorageFailure,
    UnknownActivity,
    VersionConflict,
)
from sessionlens.service import SessionService

_ERROR_STATUS: dict[type, tuple[int, str]] = {
    NotFound: (404, "not_found"),
    UnknownActivity: (404, "unknown_activity"),
    VersionConflict: (409, "version_conflict"),
    StaleWrite: (409, "stale_write"),
    OverlappingActivities: (422, "overlapping_activities"),
    OutOfBounds: (422, "out_of_bounds"),
    MismatchedScales: (422, "mismatched_scales"),
    NoSuchModality: (400, "no_such_modality"),
    BadParams: (400, "bad_params"),
    IngestError: (400, "ingest_error"),
    StorageFailure: (500, "storage_failure"),
}


def _status_for(exc: SessionLensError) -> tuple[int, str]:
    for klass in type(exc).__mro__:
        if klass in _ERROR_STATUS:
            return _ERROR_STATUS[klass]
    return 400, "error"


class ActivityIn(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    start_ms: int
    end_ms: int


class RelabelRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    base_version: int
    activities: list[ActivityIn]


class IngestRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    manifest_path: str


def create_app(service: SessionService,
               frontend_dir: Path | str | None = None) -> FastAPI:
    app = FastAPI(title="sessionlens")

    @app.exception_handler(SessionLensError)
    async def _domain_error(_request: Request, exc: SessionLensError) -> JSONResponse:
        status, code = _status_for(exc)
        body: dict[str, object] = {"code": code, "message": str(exc)}
        if isinstance(exc, IngestError):
            body["stage"] = exc.stage
        return JSONResponse(status_code=status, content=body)

    @app.exception_handler(RequestValidationError)
    async def _request_error(_request: Request,
                             exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(status_code=422, content={
            "code": "invalid_request", "message": str(exc.errors())})

    @app.get("/api/sessions")
    def list_sessions() -> dict:
        return service.list_sessions_payload()

    @app.post("/api/sessions", status_code=201)
    def ingest(body: IngestRequest) -> dict:
        session_id = service.ingest_session(Path(body.manifest_path))
        return {"session_id": session_id}

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        return service.get_session_payload(session_id)

    @app.get("/api/sessions/{session_id}/streams/{modality}/{source_id}")
    def get_stream(session_id: str, modality: str, source_id: str,
                   smooth: int | None = Query(default=None, ge=0),
                   activity: str | None = None) -> dict:
        return service.get_stream_payload(session_id, modality, source_id,
                                          smooth_ms=smooth, activity=activity)

    @app.get("/api/sessions/{session_id}/activities")
    def get_activities(session_id: str) -> dict:
        return service.get_activities_payload(session_id)

    @app.put("/api/sessions/{session_id}/activities")
    def put_activities(session_id: str, body: RelabelRequest) -> dict:
        try:
            intervals = [ActivityInterval(a.name, a.start_ms, a.end_ms)
                         for a in body.activities]
        except ValueError as exc:
            raise BadParams(str(exc)) from exc
        service.relabel(session_id, body.base_version, intervals)
        return service.get_activities_payload(session_id)

    @app.get("/api/sessions/{session_id}/analytics/{kind}")
    def get_analytics(session_id: str, kind: str,
                      modality: str | None = None,
                      source_id: str | None = None,
                      activity: str | None = None,
                      step_ms: int | None = Query(default=None, ge=1),
                      window_ms: int | None = Query(default=None, ge=0),
                      prominence_frac: float | None = None) -> dict:
        params = {k: v for k, v in {
            "modality": modality, "source_id": source_id, "activity": activity,
            "step_ms": step_ms, "window_ms": window_ms,
            "prominence_frac": prominence_frac,
        }.items() if v is not None}
        return service.get_analytics_payload(session_id, kind, params)

    @app.get("/api/sessions/{session_id}/media")
    def get_media_manifest(session_id: str) -> dict:
        return service.get_media_manifest(session_id)

    @app.get("/media/{session_id}/{media_id}")
    def get_media(session_id: str, media_id: str, request: Request) -> Response:
        data = service.store.read_media(session_id, media_id)
        media_type = mimetypes.guess_type(media_id)[0] or "application/octet-stream"
        base_headers = {"Accept-Ranges": "bytes"}
        header = request.headers.get("range")
        spec = None if header is None else _parse_range(header)
        if spec is None:
            return Response(data, media_type=media_type, headers=base_headers)
        span = _resolve_span(*spec, len(data))
        if span is None:
            return Response(status_code=416, headers={
                **base_headers, "Content-Range": f"bytes */{len(data)}"})
        start, end = span
        return Response(data[start:end + 1], status_code=206,
                        media_type=media_type, headers={
                            **base_headers,
                            "Content-Range": f"bytes {start}-{end}/{len(data)}"})

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True),
                  name="dashboard")

    return app


_RANGE_RE = re.compile(r"bytes=(\d*)-(\d*)")


def _parse_range(header: str) -> tuple[str, str] | None:
    """The single byte-range spec of a Range header, or None to ignore it.

    Unparsable headers and invalid specs (no bounds at all, or a last
    byte before the first) are ignored, serving the full body instead.
    """
    match = _RANGE_RE.fullmatch(header.strip())
    if match is None:
        return None
    first, last = match.groups()
    if first == "" and last == "":
        return None
    if first != "" and last != "" and int(last) < int(first):
        return None
    return first, last


def _resolve_span(first: str, last: str, size: int) -> tuple[int, int] | None:
    """Concrete [start, end] byte span, or None when unsatisfiable."""
    if size == 0:
        return None
    if first == "":  # suffix form: last N bytes
        n = int(last)
        if n == 0:
            return None
        return max(size - n, 0), size - 1
    start = int(first)
    if start >= size:
        return None
    end = min(int(last), size - 1) if last != "" else size - 1
    return start, end
