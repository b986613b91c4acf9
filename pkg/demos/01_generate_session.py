"""Generate the bundled demo recording and look inside it.

Writes a ten-minute synthetic session: nine signal streams on four
device clocks, five labeled activities with one unlabeled gap, four
media placeholders, and a 40/100 -> 70/100 test pair.
"""

import json
from pathlib import Path

from sessionlens.demo import ACTIVITIES, write_demo_session

target = Path("demo-bundle")
manifest_path = write_demo_session(target)
print(f"bundle written to {target.resolve()}")

# The manifest is the single entry point for ingestion; everything else
# is referenced from it by relative path.
manifest = json.loads(manifest_path.read_text())

print(f"\n{len(manifest['signal_files'])} signal files:")
for spec in manifest["signal_files"]:
    clock = spec.get("clock")
    if clock is None:
        note = "already on the master clock"
    elif isinstance(clock, dict):
        note = f"affine clock, scale={clock['scale']} offset={clock['offset_ms']:+g} ms"
    else:
        note = f"{len(clock)} sync markers"
    print(f"  {spec['path']:<41} {spec['modality']:<15} {note}")

print(f"\n{len(manifest['media_files'])} media files:")
for spec in manifest["media_files"]:
    print(f"  {spec['path']:<28} kind={spec['kind']}")

print("\nactivity timeline (master clock, seconds):")
for name, start, end in ACTIVITIES:
    print(f"  {start // 1000:4d} - {end // 1000:4d}  {name}")
print("  (480 - 495 is deliberately left unlabeled)")

print("\ntest files:", ", ".join(sorted(manifest["test_files"])))
print("next: python3 demos/02_pipeline_walkthrough.py")
