"""Follow two signals through the ingestion pipeline, stage by stage.

Uses the library functions directly instead of `SessionService.ingest`
so each intermediate result is visible: raw rows, the fitted clock,
the cleaning report, and per-activity statistics.
"""

from pathlib import Path

from sessionlens.analytics import (
    ActivityInterval,
    SignalStream,
    activity_stats,
    clean_signal,
    segment_by_activity,
)
from sessionlens.config import EngineConfig
from sessionlens.demo import write_demo_session
from sessionlens.ingest import parse_activity_log, parse_manifest, parse_signal_file
from sessionlens.timeline import ClockMapping, apply_clock_mapping, estimate_clock_mapping

bundle = Path("demo-bundle")
if not (bundle / "manifest.json").exists():
    write_demo_session(bundle)
manifest = parse_manifest((bundle / "manifest.json").read_bytes())
config = EngineConfig()

# Stage 1: parse. The heart-rate CSV carries the watch's own timestamps.
spec = next(s for s in manifest.signal_files if s.modality == "heart_rate")
raw = parse_signal_file((bundle / spec.path).read_bytes(), spec.modality)
print(f"{spec.path}: {len(raw)} rows, first source timestamp {raw[0][0]} ms")

# Stage 2: fit the clock from the manifest's sync markers, then map every
# timestamp onto the master timeline (the activity log's clock).
mapping = estimate_clock_mapping(spec.clock)
print(f"fitted clock: t_master = {mapping.scale:g} * t_source {mapping.offset_ms:+g} ms")
on_master = apply_clock_mapping(raw, mapping)
print(f"first master timestamp: {on_master[0].t_ms} ms")

# Stage 3: clean. The attention stream ships with deliberate damage, so
# the report has something to say.
spec = next(s for s in manifest.signal_files if s.modality == "attention")
raw = parse_signal_file((bundle / spec.path).read_bytes(), spec.modality)
stream = SignalStream(
    modality=spec.modality,
    source_id=spec.source_id,
    samples=tuple(apply_clock_mapping(raw, ClockMapping.identity())),
)
cleaned, report = clean_signal(stream, config.range_for(spec.modality))
print(f"\ncleaning {spec.path}:")
print(f"  {report.total} rows in, {report.kept} kept")
print(f"  dropped: {report.non_finite} non-finite, "
      f"{report.out_of_range} out of range, {report.duplicate_ts} duplicate timestamps")

# Stage 4: label each sample with its activity. Interval starts are
# inclusive, ends are exclusive; uncovered samples land in "unassigned".
records = parse_activity_log((bundle / manifest.activity_file).read_bytes())
activities = [ActivityInterval(r.name, r.start_ms, r.end_ms) for r in records]
labeled = segment_by_activity(cleaned, activities)

print("\nattention by activity:")
for row in activity_stats(labeled, cleaned.modality, cleaned.source_id):
    print(f"  {row.activity_name:<15} n={row.n:<4} mean={row.mean:6.2f} "
          f"min={row.min:5.1f} max={row.max:5.1f}")
print("next: python3 demos/03_correlations_and_extrema.py")
