"""Engine configuration: file based with environment overrides.

The config file is JSON; every key is optional. Environment variables
beat the file, defaults fill the rest:

    SESSIONLENS_STORE_ROOT       store root directory
    SESSIONLENS_PORT             HTTP port
    SESSIONLENS_WINDOW_MS        default smoothing window
    SESSIONLENS_STEP_MS          correlation grid step
    SESSIONLENS_PROMINENCE_FRAC  extrema prominence threshold fraction

Modality valid ranges are overridable only via the file, e.g.:

    {"valid_ranges": {"heart_rate": {"lo": 30, "hi": 220}}}
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from sessionlens.analytics import (
    DEFAULT_PROMINENCE_FRAC,
    DEFAULT_STEP_MS,
    DEFAULT_VALID_RANGES,
    DEFAULT_WINDOW_MS,
    ValidRange,
)
from sessionlens.errors import BadParams

DEFAULT_STORE_ROOT = "sessionlens-data"
DEFAULT_PORT = 8000


@dataclass
class EngineConfig:
    store_root: Path = Path(DEFAULT_STORE_ROOT)
    port: int = DEFAULT_PORT
    window_ms: int = DEFAULT_WINDOW_MS
    step_ms: int = DEFAULT_STEP_MS
    prominence_frac: float = DEFAULT_PROMINENCE_FRAC
    valid_ranges: dict[str, ValidRange] = field(
        default_factory=lambda: dict(DEFAULT_VALID_RANGES))

    def range_for(self, modality: str) -> ValidRange:
        try:
            return self.valid_ranges[modality]
        except KeyError:
            raise BadParams(f"no valid range configured for {modality!r}") from None


def _range_from(doc: dict[str, Any], modality: str) -> ValidRange:
    base = DEFAULT_VALID_RANGES.get(modality, ValidRange(-float("inf"), float("inf")))
    return ValidRange(
        lo=float(doc.get("lo", base.lo)),
        hi=float(doc.get("hi", base.hi)),
        lo_open=bool(doc.get("lo_open", base.lo_open)),
        hi_open=bool(doc.get("hi_open", base.hi_open)),
    )


def load_config(path: Path | str | None = None,
                env: dict[str, str] | None = None) -> EngineConfig:
    """Build the effective config from defaults, an optional file, and env vars."""
    env = os.environ if env is None else env
    config = EngineConfig()

    if path is not None:
        try:
            doc = json.loads(Path(path).read_text("utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise BadParams(f"cannot load config {path}: {exc}") from exc
        if not isinstance(doc, dict):
            raise BadParams(f"config {path} must be a JSON object")
        if "store_root" in doc:
            config.store_root = Path(doc["store_root"])
        if "port" in doc:
            config.port = int(doc["port"])
        if "window_ms" in doc:
            config.window_ms = int(doc["window_ms"])
        if "step_ms" in doc:
            config.step_ms = int(doc["step_ms"])
        if "prominence_frac" in doc:
            config.prominence_frac = float(doc["prominence_frac"])
        for modality, rng in doc.get("valid_ranges", {}).items():
            config.valid_ranges[modality] = _range_from(rng, modality)

    if env.get("SESSIONLENS_STORE_ROOT"):
        config.store_root = Path(env["SESSIONLENS_STORE_ROOT"])
    if env.get("SESSIONLENS_PORT"):
        config.port = int(env["SESSIONLENS_PORT"])
    if env.get("SESSIONLENS_WINDOW_MS"):
        config.window_ms = int(env["SESSIONLENS_WINDOW_MS"])
    if env.get("SESSIONLENS_STEP_MS"):
        config.step_ms = int(env["SESSIONLENS_STEP_MS"])
    if env.get("SESSIONLENS_PROMINENCE_FRAC"):
        config.prominence_frac = float(env["SESSIONLENS_PROMINENCE_FRAC"])

    if config.window_ms < 0 or config.step_ms <= 0 or \
            not 0 < config.prominence_frac <= 1:
        raise BadParams("window_ms >= 0, step_ms > 0, prominence_frac in (0,1] required")
    return config
