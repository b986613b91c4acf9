"""Signal cleaning, smoothing, activity segmentation, and derived analytics.

Everything here is a pure function over cleaned streams on the master
timeline. The processing conventions, fixed once and relied on by tests:

- smoothing window is trailing and inclusive: the value at t is the mean
  of all samples in [t - window_ms, t], truncated at the stream start
- activity intervals are half-open [start_ms, end_ms); a sample on a
  shared boundary belongs to the interval that starts there
- stddev is the population form; single-sample groups report 0
- correlations are Pearson on a shared linear-interpolation grid
- extrema use topographic prominence on the smoothed series
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, replace
from statistics import fmean, pstdev
from typing import Sequence

import numpy as np

from sessionlens.errors import (
    AllSamplesDropped,
    MismatchedScales,
    NoSuchModality,
    OverlappingActivities,
)
from sessionlens.ingest import TestResult
from sessionlens.timeline import Sample, TimeGrid, resample_linear

UNASSIGNED = "unassigned"

DEFAULT_WINDOW_MS = 30_000
DEFAULT_STEP_MS = 1_000
DEFAULT_PROMINENCE_FRAC = 0.1


@dataclass(frozen=True)
class ValidRange:
    """Accepted value range for one modality; bounds may be open."""

    lo: float
    hi: float
    lo_open: bool = False
    hi_open: bool = False

    def contains(self, value: float) -> bool:
        above = value > self.lo if self.lo_open else value >= self.lo
        below = value < self.hi if self.hi_open else value <= self.hi
        return above and below


# Physiological plausibility bounds; overridable through the service config.
DEFAULT_VALID_RANGES: dict[str, ValidRange] = {
    "attention": ValidRange(0.0, 100.0),
    "meditation": ValidRange(0.0, 100.0),
    "wave_delta": ValidRange(0.0, math.inf),
    "wave_theta": ValidRange(0.0, math.inf),
    "wave_alpha": ValidRange(0.0, math.inf),
    "wave_beta": ValidRange(0.0, math.inf),
    "wave_gamma": ValidRange(0.0, math.inf),
    "heart_rate": ValidRange(25.0, 250.0),
    "pupil_diameter": ValidRange(0.0, 12.0, lo_open=True),
}


@dataclass(frozen=True)
class CleaningReport:
    total: int
    kept: int
    non_finite: int
    out_of_range: int
    duplicate_ts: int


@dataclass(frozen=True)
class SignalStream:
    """One modality's samples from one source, on the master timeline."""

    modality: str
    source_id: str
    samples: tuple[Sample, ...]
    cleaned: bool = False
    report: CleaningReport | None = None

    def span(self) -> tuple[int, int] | None:
        if not self.samples:
            return None
        return self.samples[0].t_ms, self.samples[-1].t_ms


@dataclass(frozen=True)
class ActivityInterval:
    """Half-open [start_ms, end_ms) span labeled with one task."""

    name: str
    start_ms: int
    end_ms: int

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("activity name must be non-empty")
        if self.start_ms >= self.end_ms:
            raise ValueError(
                f"activity {self.name!r}: start_ms {self.start_ms} must be "
                f"< end_ms {self.end_ms}")

    def contains(self, t_ms: int) -> bool:
        return self.start_ms <= t_ms < self.end_ms


@dataclass(frozen=True)
class ActivityStats:
    activity_name: str
    modality: str
    source_id: str
    n: int
    mean: float
    min: float
    max: float
    stddev: float


@dataclass(frozen=True)
class CorrelationMatrix:
    """Pairwise Pearson r between streams on shared 1/step_ms grids.

    ``r`` entries are None where a pair had fewer than two common grid
    points or zero variance; ``n_common`` records the grid points used.
    """

    labels: tuple[tuple[str, str], ...]
    r: tuple[tuple[float | None, ...], ...]
    n_common: tuple[tuple[int, ...], ...]
    step_ms: int


@dataclass(frozen=True)
class ExtremumEvent:
    kind: str  # "peak" | "trough"
    t_ms: int
    value: float
    prominence: float
    activity_name: str


@dataclass(frozen=True)
class TestComparison:
    pre_score: float
    post_score: float
    max_score: float
    delta: float
    relative_gain: float | None


# ---------------------------------------------------------------------------
# cleaning
# ---------------------------------------------------------------------------


def clean_signal(
    stream: SignalStream, valid_range: ValidRange | tuple[float, float]
) -> tuple[SignalStream, CleaningReport]:
    """Sort, de-duplicate, and range-filter a raw stream.

    Stable-sorts by timestamp, then drops non-finite values, out-of-range
    values, and repeated timestamps (keeping the first survivor at each
    timestamp). Raises AllSamplesDropped when nothing remains.
    """
    if stream.cleaned:
        raise ValueError("stream is already cleaned")
    if isinstance(valid_range, tuple):
        valid_range = ValidRange(*valid_range)

    ordered = sorted(stream.samples, key=lambda s: s.t_ms)
    kept: list[Sample] = []
    non_finite = out_of_range = duplicate_ts = 0
    for sample in ordered:
        if not math.isfinite(sample.value):
            non_finite += 1
        elif not valid_range.contains(sample.value):
            out_of_range += 1
        elif kept and kept[-1].t_ms == sample.t_ms:
            duplicate_ts += 1
        else:
            kept.append(sample)

    report = CleaningReport(
        total=len(ordered), kept=len(kept), non_finite=non_finite,
        out_of_range=out_of_range, duplicate_ts=duplicate_ts)
    if not kept:
        raise AllSamplesDropped(
            f"{stream.modality}/{stream.source_id}: no samples survived cleaning "
            f"({report})")
    cleaned = replace(stream, samples=tuple(kept), cleaned=True, report=report)
    return cleaned, report


# ---------------------------------------------------------------------------
# smoothing
# ---------------------------------------------------------------------------


def smooth_sliding_window(
    stream: SignalStream, window_ms: int = DEFAULT_WINDOW_MS
) -> list[Sample]:
    """Trailing-window mean of a cleaned stream, evaluated at every sample.

    Output sample k keeps timestamp t_k and carries the mean of all input
    values with timestamp in [t_k - window_ms, t_k]. At the stream start
    the window truncates to whatever exists; it always contains at least
    the sample at t_k, so window_ms = 0 is the identity.
    """
    if not stream.cleaned:
        raise ValueError("smooth_sliding_window requires a cleaned stream")
    if window_ms < 0:
        raise ValueError(f"window_ms must be >= 0, got {window_ms}")

    t = np.asarray([s.t_ms for s in stream.samples], dtype=np.int64)
    v = np.asarray([s.value for s in stream.samples], dtype=np.float64)
    n = len(t)
    lo = np.searchsorted(t, t - window_ms, side="left")

    # Extended-precision prefix sums keep the windowed means well inside
    # the 1e-12 relative agreement the brute-force oracle is held to.
    prefix = np.concatenate(([np.longdouble(0)], np.cumsum(v.astype(np.longdouble))))
    sums = prefix[np.arange(1, n + 1)] - prefix[lo]
    counts = np.arange(n, dtype=np.int64) - lo + 1
    means = (sums / counts).astype(np.float64)

    return [Sample(int(ts), float(m)) for ts, m in zip(t, means)]


# ---------------------------------------------------------------------------
# segmentation
# ---------------------------------------------------------------------------


def check_disjoint(activities: Sequence[ActivityInterval]) -> list[ActivityInterval]:
    """Return activities sorted by start; raise on the first overlap."""
    ordered = sorted(activities, key=lambda a: (a.start_ms, a.end_ms))
    for prev, cur in zip(ordered, ordered[1:]):
        if cur.start_ms < prev.end_ms:
            raise OverlappingActivities(prev.name, cur.name, (
                f"activities {prev.name!r} [{prev.start_ms}, {prev.end_ms}) and "
                f"{cur.name!r} [{cur.start_ms}, {cur.end_ms}) overlap"))
    return ordered


def segment_by_activity(
    stream: SignalStream, activities: Sequence[ActivityInterval]
) -> list[tuple[Sample, str]]:
    """Label every cleaned sample with its containing activity.

    A sample at an interval's start_ms belongs to it; one at end_ms does
    not (half-open spans). Samples covered by no interval are labeled
    ``"unassigned"``.
    """
    if not stream.cleaned:
        raise ValueError("segment_by_activity requires a cleaned stream")
    ordered = check_disjoint(activities)
    starts = [a.start_ms for a in ordered]

    labeled: list[tuple[Sample, str]] = []
    for sample in stream.samples:
        idx = bisect_right(starts, sample.t_ms) - 1
        if idx >= 0 and sample.t_ms < ordered[idx].end_ms:
            labeled.append((sample, ordered[idx].name))
        else:
            labeled.append((sample, UNASSIGNED))
    return labeled


def activity_stats(
    labeled: Sequence[tuple[Sample, str]], modality: str, source_id: str
) -> list[ActivityStats]:
    """Per-activity descriptive statistics for one labeled stream.

    Activities with zero samples are simply absent; the "unassigned"
    bucket appears as its own entry when non-empty. Entries are ordered
    by each label's first appearance in the stream, which for disjoint
    intervals is activity start order.
    """
    groups: dict[str, list[float]] = {}
    for sample, name in labeled:
        groups.setdefault(name, []).append(sample.value)
    return [
        ActivityStats(
            activity_name=name, modality=modality, source_id=source_id,
            n=len(values), mean=fmean(values), min=min(values), max=max(values),
            stddev=pstdev(values))
        for name, values in groups.items()
    ]


def rank_activities(
    stats: Sequence[ActivityStats], modality: str, source_id: str
) -> list[tuple[str, float]]:
    """Activities for one stream ordered by mean value, highest first.

    Ties keep the incoming order, which from `activity_stats` is activity
    start order. The "unassigned" bucket is not an activity and is left
    out. Raises NoSuchModality when no stats match the stream at all.
    """
    matching = [s for s in stats if s.modality == modality and s.source_id == source_id]
    if not matching:
        raise NoSuchModality(f"no stats for ({modality!r}, {source_id!r})")
    ranked = [s for s in matching if s.activity_name != UNASSIGNED]
    ranked.sort(key=lambda s: -s.mean)
    return [(s.activity_name, s.mean) for s in ranked]


# ---------------------------------------------------------------------------
# correlation
# ---------------------------------------------------------------------------


def _pearson(x: np.ndarray, y: np.ndarray) -> float | None:
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(np.dot(xc, xc))
    syy = float(np.dot(yc, yc))
    if sxx == 0.0 or syy == 0.0:
        return None
    return float(np.dot(xc, yc) / math.sqrt(sxx * syy))


def correlate_streams(
    streams: Sequence[SignalStream],
    step_ms: int = DEFAULT_STEP_MS,
    within: ActivityInterval | None = None,
) -> CorrelationMatrix:
    """Pairwise Pearson correlation between cleaned streams.

    Each pair is resampled onto the grid that starts at the later of the
    two stream starts and steps by step_ms through the earlier of the two
    ends. Pairs with fewer than two shared grid points, or zero variance
    after resampling, carry None instead of a coefficient. Pass `within`
    to restrict the computation to one activity's half-open span.
    """
    if len(streams) < 2:
        raise ValueError(f"correlation needs >= 2 streams, got {len(streams)}")
    if step_ms <= 0:
        raise ValueError(f"step_ms must be positive, got {step_ms}")
    for stream in streams:
        if not stream.cleaned:
            raise ValueError("correlate_streams requires cleaned streams")

    clipped: list[list[Sample]] = []
    for stream in streams:
        samples = list(stream.samples)
        if within is not None:
            samples = [s for s in samples if within.contains(s.t_ms)]
        clipped.append(samples)

    n = len(streams)
    r: list[list[float | None]] = [[None] * n for _ in range(n)]
    counts: list[list[int]] = [[0] * n for _ in range(n)]

    for i in range(n):
        r[i][i] = 1.0
        if clipped[i]:
            grid = TimeGrid.covering(clipped[i][0].t_ms, clipped[i][-1].t_ms, step_ms)
            counts[i][i] = grid.count if grid else 0

    for i in range(n):
        for j in range(i + 1, n):
            a, b = clipped[i], clipped[j]
            if len(a) < 2 or len(b) < 2:
                continue
            lo = max(a[0].t_ms, b[0].t_ms)
            hi = min(a[-1].t_ms, b[-1].t_ms)
            grid = TimeGrid.covering(lo, hi, step_ms)
            if grid is None:
                continue
            counts[i][j] = counts[j][i] = grid.count
            if grid.count < 2:
                continue
            xs = resample_linear(a, grid)
            ys = resample_linear(b, grid)
            coeff = _pearson(
                np.asarray([s.value for s in xs], dtype=np.float64),
                np.asarray([s.value for s in ys], dtype=np.float64))
            r[i][j] = r[j][i] = coeff

    return CorrelationMatrix(
        labels=tuple((s.modality, s.source_id) for s in streams),
        r=tuple(tuple(row) for row in r),
        n_common=tuple(tuple(row) for row in counts),
        step_ms=step_ms)


# ---------------------------------------------------------------------------
# extrema
# ---------------------------------------------------------------------------


def _prominence(values: np.ndarray, peak: int) -> float:
    """Topographic prominence of an interior peak in `values`.

    Walk outward until a strictly higher sample or the border; the base on
    each side is the lowest value passed, and prominence is the height
    above the higher of the two bases.
    """
    height = values[peak]
    left_min = math.inf
    for j in range(peak - 1, -1, -1):
        if values[j] > height:
            break
        left_min = min(left_min, values[j])
    right_min = math.inf
    for j in range(peak + 1, len(values)):
        if values[j] > height:
            break
        right_min = min(right_min, values[j])
    return float(height - max(left_min, right_min))


def detect_extrema(
    smoothed: Sequence[Sample],
    activities: Sequence[ActivityInterval],
    prominence_frac: float = DEFAULT_PROMINENCE_FRAC,
) -> list[ExtremumEvent]:
    """Prominent peaks and troughs of a smoothed series, in time order.

    Interior strict local extrema only; a plateau counts once, at its
    first point. An extremum is kept when its topographic prominence is
    at least prominence_frac times the series' global range, so constant
    series yield nothing. Each event is labeled with the activity whose
    half-open span contains it, else "unassigned".
    """
    if not 0 < prominence_frac <= 1:
        raise ValueError(f"prominence_frac must be in (0, 1], got {prominence_frac}")
    if len(smoothed) == 0:
        raise ValueError("smoothed series must be non-empty")

    v = np.asarray([s.value for s in smoothed], dtype=np.float64)
    value_range = float(v.max() - v.min())
    if value_range == 0.0:
        return []
    threshold = prominence_frac * value_range

    # Collapse equal-value runs; a run is an extremum iff its value beats
    # both neighboring runs, and it is reported at the run's first index.
    run_starts = [0]
    for i in range(1, len(v)):
        if v[i] != v[i - 1]:
            run_starts.append(i)
    run_values = v[run_starts]

    ordered = check_disjoint(activities)
    starts = [a.start_ms for a in ordered]

    def label_for(t_ms: int) -> str:
        idx = bisect_right(starts, t_ms) - 1
        if idx >= 0 and t_ms < ordered[idx].end_ms:
            return ordered[idx].name
        return UNASSIGNED

    events: list[ExtremumEvent] = []
    for k in range(1, len(run_starts) - 1):
        here, before, after = run_values[k], run_values[k - 1], run_values[k + 1]
        idx = run_starts[k]
        if here > before and here > after:
            kind, prom = "peak", _prominence(v, idx)
        elif here < before and here < after:
            kind, prom = "trough", _prominence(-v, idx)
        else:
            continue
        if prom >= threshold:
            sample = smoothed[idx]
            events.append(ExtremumEvent(
                kind=kind, t_ms=sample.t_ms, value=float(v[idx]),
                prominence=prom, activity_name=label_for(sample.t_ms)))
    return events


# ---------------------------------------------------------------------------
# pre/post tests
# ---------------------------------------------------------------------------


def compare_tests(pre: TestResult, post: TestResult) -> TestComparison:
    """Learning-gain comparison of a pretest and posttest on one scale.

    relative_gain is (post - pre) / (max - pre); it is None when the
    pretest already hit the maximum, where the ratio is undefined.
    """
    if pre.max_score != post.max_score:
        raise MismatchedScales(
            f"pretest max {pre.max_score} != posttest max {post.max_score}")
    delta = post.score - pre.score
    if post.max_score > pre.score:
        gain: float | None = delta / (post.max_score - pre.score)
    else:
        gain = None
    return TestComparison(
        pre_score=pre.score, post_score=post.score, max_score=post.max_score,
        delta=delta, relative_gain=gain)
