"""Master-timeline alignment: clock mappings and grid resampling.

Every source device keeps its own clock. A `ClockMapping` is the affine
map ``t_master = scale * t_source + offset_ms`` that places one source
clock onto the master timeline (the activity log's clock). Mappings come
from the session manifest either explicitly or as marker pairs fitted by
`estimate_clock_mapping`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from sessionlens.errors import DegenerateMarkers, TooFewSamples


class Sample(NamedTuple):
    """One timestamped value on the master timeline."""

    t_ms: int
    value: float


@dataclass(frozen=True)
class ClockMapping:
    """Affine map from a source clock to the master timeline (ms)."""

    scale: float
    offset_ms: float

    def __post_init__(self) -> None:
        if not (self.scale > 0):
            raise ValueError(f"scale must be positive, got {self.scale}")
        if not (math.isfinite(self.scale) and math.isfinite(self.offset_ms)):
            raise ValueError("scale and offset_ms must be finite")

    @classmethod
    def identity(cls) -> "ClockMapping":
        return cls(scale=1.0, offset_ms=0.0)

    def map(self, t_source_ms: float) -> float:
        """Map a source timestamp to master milliseconds (unrounded)."""
        return self.scale * t_source_ms + self.offset_ms

    def compose(self, inner: "ClockMapping") -> "ClockMapping":
        """Mapping equivalent to applying `inner` first, then this one."""
        return ClockMapping(
            scale=self.scale * inner.scale,
            offset_ms=self.scale * inner.offset_ms + self.offset_ms,
        )


@dataclass(frozen=True)
class TimeGrid:
    """Regular grid of master-timeline instants: start_ms + k*step_ms."""

    start_ms: int
    step_ms: int
    count: int

    def __post_init__(self) -> None:
        if self.step_ms <= 0:
            raise ValueError(f"step_ms must be positive, got {self.step_ms}")
        if self.count <= 0:
            raise ValueError(f"count must be positive, got {self.count}")

    @classmethod
    def covering(cls, start_ms: int, end_ms: int, step_ms: int) -> "TimeGrid | None":
        """Grid anchored at start_ms with every point <= end_ms, or None."""
        if end_ms < start_ms:
            return None
        return cls(start_ms=start_ms, step_ms=step_ms,
                   count=(end_ms - start_ms) // step_ms + 1)

    def points(self) -> np.ndarray:
        return self.start_ms + self.step_ms * np.arange(self.count, dtype=np.int64)


def round_half_away(x: float) -> int:
    """Round to nearest integer, ties away from zero (not banker's)."""
    return int(math.floor(x + 0.5)) if x >= 0 else int(math.ceil(x - 0.5))


def estimate_clock_mapping(
    marker_pairs: Sequence[tuple[int, int]],
) -> ClockMapping:
    """Fit ``t_master = scale * t_source + offset`` to marker pairs.

    With a single pair the scale is pinned to 1 and only the offset is
    solved. With two or more pairs this is the exact least-squares fit,
    computed in rational arithmetic so collinear integer markers produce
    a residual limited only by the final float conversion.

    Raises DegenerateMarkers if no pairs are given, if >=2 pairs share one
    source timestamp, or if the fitted scale is not positive.
    """
    if len(marker_pairs) == 0:
        raise DegenerateMarkers("need at least one marker pair")
    if len(marker_pairs) == 1:
        t_s, t_m = marker_pairs[0]
        return ClockMapping(scale=1.0, offset_ms=float(t_m - t_s))

    source = [Fraction(t_s) for t_s, _ in marker_pairs]
    master = [Fraction(t_m) for _, t_m in marker_pairs]
    n = len(marker_pairs)
    mean_s = sum(source) / n
    mean_m = sum(master) / n
    sxx = sum((s - mean_s) ** 2 for s in source)
    if sxx == 0:
        raise DegenerateMarkers("all marker source timestamps are equal")
    sxy = sum((s - mean_s) * (m - mean_m) for s, m in zip(source, master))
    scale = sxy / sxx
    offset = mean_m - scale * mean_s
    if scale <= 0:
        raise DegenerateMarkers(f"fitted scale {float(scale):g} is not positive")
    return ClockMapping(scale=float(scale), offset_ms=float(offset))


def apply_clock_mapping(
    samples: Iterable[tuple[int, float]], mapping: ClockMapping
) -> list[Sample]:
    """Map each (t_source_ms, value) onto the master timeline.

    Timestamps are rounded half-away-from-zero to integer master ms;
    the input order is preserved untouched.
    """
    return [Sample(round_half_away(mapping.map(t)), float(v)) for t, v in samples]


def resample_linear(samples: Sequence[Sample], grid: TimeGrid) -> list[Sample]:
    """Linearly interpolate a stream at the grid points inside its span.

    Grid points before the first or after the last sample are omitted;
    no extrapolation ever happens. A grid point that coincides with a
    sample timestamp returns that sample's value exactly.

    Requires at least two samples with strictly increasing timestamps
    (the state guaranteed by `analytics.clean_signal`).
    """
    if len(samples) < 2:
        raise TooFewSamples(f"resampling needs >=2 samples, got {len(samples)}")
    t = np.asarray([s.t_ms for s in samples], dtype=np.int64)
    v = np.asarray([s.value for s in samples], dtype=np.float64)
    if np.any(np.diff(t) <= 0):
        raise ValueError("sample timestamps must be strictly increasing")

    g = grid.points()
    g = g[(g >= t[0]) & (g <= t[-1])]
    if g.size == 0:
        return []

    # Segment index such that t[idx-1] <= point < t[idx]; exact hits resolved below.
    idx = np.searchsorted(t, g, side="right")
    idx = np.clip(idx, 1, len(t) - 1)
    t0, t1 = t[idx - 1], t[idx]
    v0, v1 = v[idx - 1], v[idx]
    out = v0 + (g - t0) * (v1 - v0) / (t1 - t0)

    exact = np.searchsorted(t, g)
    hit = (exact < len(t)) & (t[np.minimum(exact, len(t) - 1)] == g)
    out[hit] = v[exact[hit]]

    return [Sample(int(ts), float(val)) for ts, val in zip(g, out)]
