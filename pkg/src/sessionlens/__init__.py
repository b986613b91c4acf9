"""Multimodal learning-session analytics engine.

Takes the raw output of a recorded learning session (biosignal CSV logs,
an activity log, media files, pre/post test scores), maps every source
clock onto one master timeline, cleans and smooths the signals, slices
them by activity, and persists the anonymized result where a dashboard
can read it back and correct activity labels.

Submodules:

- `ingest`    file parsers and manifest validation
- `timeline`  clock mappings, resampling onto common grids
- `analytics` cleaning, smoothing, segmentation, stats, correlations, extrema
- `store`     anonymized document persistence (memory or file backed)
- `service`   the end-to-end engine used by the HTTP API and CLI
- `api`       FastAPI application exposing the dashboard endpoints
- `demo`      synthetic session generator used by tests and demos
"""

from sessionlens import analytics, errors, ingest, timeline
from sessionlens.timeline import ClockMapping, Sample, TimeGrid

__version__ = "0.1.0"

__all__ = [
    "ClockMapping",
    "Sample",
    "TimeGrid",
    "analytics",
    "errors",
    "ingest",
    "timeline",
    "__version__",
]
