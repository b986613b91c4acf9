"""Exception hierarchy shared across the package.

Two broad families matter to callers: `ParseError` covers input that is
syntactically broken (bad JSON, bad CSV row), `ValidationError` covers
well-formed input that violates a documented invariant. Everything else
is operation-specific.
"""

from __future__ import annotations


class SessionLensError(Exception):
    """Base class for every error raised by this package."""


# ---------------------------------------------------------------------------
# ingest
# ---------------------------------------------------------------------------


class ParseError(SessionLensError):
    """Input does not match the documented grammar."""


class ValidationError(SessionLensError):
    """Input parsed but violates an invariant."""


class MalformedManifest(ParseError):
    pass


class InvalidManifest(ValidationError):
    """Carries the offending field path, e.g. ``signal_files[2].modality``."""

    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"{field}: {message}")
        self.field = field


class MalformedRow(ParseError):
    """A specific row of a line-oriented file failed to parse (1-based)."""

    def __init__(self, row: int, message: str) -> None:
        super().__init__(f"row {row}: {message}")
        self.row = row


class EmptyFile(ParseError):
    pass


class InvalidRecord(ValidationError):
    def __init__(self, row: int, message: str) -> None:
        super().__init__(f"row {row}: {message}")
        self.row = row


class MalformedTest(ParseError):
    pass


class InvalidTest(ValidationError):
    pass


# ---------------------------------------------------------------------------
# timeline
# ---------------------------------------------------------------------------


class DegenerateMarkers(SessionLensError):
    """Marker pairs do not determine an affine clock mapping."""


class TooFewSamples(SessionLensError):
    """Resampling needs at least two samples."""


# ---------------------------------------------------------------------------
# analytics
# ---------------------------------------------------------------------------


class AllSamplesDropped(SessionLensError):
    """Cleaning removed every sample of a stream."""


class OverlappingActivities(SessionLensError):
    """Two activity intervals overlap; carries the first offending pair."""

    def __init__(self, first: str, second: str, message: str | None = None) -> None:
        super().__init__(message or f"activities {first!r} and {second!r} overlap")
        self.first = first
        self.second = second


class NoSuchModality(SessionLensError):
    pass


class MismatchedScales(SessionLensError):
    """Pre and post test results use different max_score scales."""


# ---------------------------------------------------------------------------
# store
# ---------------------------------------------------------------------------


class StorageFailure(SessionLensError):
    pass


class StaleWrite(SessionLensError):
    """Optimistic-concurrency rejection: the write carried an outdated token."""


class NotFound(SessionLensError):
    pass


# ---------------------------------------------------------------------------
# service
# ---------------------------------------------------------------------------


class VersionConflict(SessionLensError):
    """Relabel base version no longer matches the stored activities_version."""


class OutOfBounds(SessionLensError):
    """A relabeled interval lies outside the recorded session span."""


class UnknownActivity(SessionLensError):
    pass


class BadParams(SessionLensError):
    pass


class IngestError(SessionLensError):
    """Wraps any failure inside the ingest pipeline with file and stage."""

    def __init__(self, stage: str, path: str, cause: Exception | str) -> None:
        detail = str(cause)
        super().__init__(f"[{stage}] {path}: {detail}")
        self.stage = stage
        self.path = path
        self.detail = detail
