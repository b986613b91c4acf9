"""Deterministic generator for the bundled demo session.

Writes a complete ingestable bundle (manifest, nine signal CSVs, an
activity log, four media placeholders, pre/post test files) under a
target directory. Everything is seeded, so repeated generation yields
identical files; tests lean on that.

The session is ten minutes on the master clock: five activities with
one unlabeled gap, one stream per supported modality, and a mix of
clock specs (identity, explicit mapping, marker pairs) so ingest
exercises every synchronization path.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from sessionlens.ingest import (
    ClockSpec,
    MediaFileSpec,
    SessionManifest,
    SignalFileSpec,
    TestFilesSpec,
    serialize_manifest,
)
from sessionlens.timeline import ClockMapping

DEMO_SEED = 7
SESSION_MS = 600_000
SESSION_START_MS = 1_714_380_000_000

ACTIVITIES = (
    ("baseline_rest", 0, 60_000),
    ("video_lecture", 60_000, 210_000),
    ("reading", 210_000, 330_000),
    ("quiz", 330_000, 480_000),
    ("wrapup_survey", 495_000, 600_000),
)

# Per-activity mean levels, plus a catch-all level for the gap.
_LEVELS = {
    "attention": {"baseline_rest": 35.0, "video_lecture": 55.0, "reading": 60.0,
                  "quiz": 72.0, "wrapup_survey": 45.0, None: 40.0},
    "meditation": {"baseline_rest": 70.0, "video_lecture": 52.0, "reading": 48.0,
                   "quiz": 38.0, "wrapup_survey": 60.0, None: 55.0},
    "heart_rate": {"baseline_rest": 62.0, "video_lecture": 68.0, "reading": 70.0,
                   "quiz": 78.0, "wrapup_survey": 66.0, None: 67.0},
    "pupil_diameter": {"baseline_rest": 3.1, "video_lecture": 3.6, "reading": 3.8,
                       "quiz": 4.2, "wrapup_survey": 3.4, None: 3.5},
    "wave_delta": {"baseline_rest": 66.0, "video_lecture": 58.0, "reading": 55.0,
                   "quiz": 50.0, "wrapup_survey": 60.0, None: 58.0},
    "wave_theta": {"baseline_rest": 44.0, "video_lecture": 40.0, "reading": 38.0,
                   "quiz": 35.0, "wrapup_survey": 42.0, None: 40.0},
    "wave_alpha": {"baseline_rest": 38.0, "video_lecture": 30.0, "reading": 28.0,
                   "quiz": 22.0, "wrapup_survey": 33.0, None: 30.0},
    "wave_beta": {"baseline_rest": 18.0, "video_lecture": 24.0, "reading": 26.0,
                  "quiz": 32.0, "wrapup_survey": 21.0, None: 24.0},
    "wave_gamma": {"baseline_rest": 9.0, "video_lecture": 12.0, "reading": 13.0,
                   "quiz": 16.0, "wrapup_survey": 10.0, None: 12.0},
}

_NOISE = {"attention": 6.0, "meditation": 6.0, "heart_rate": 2.5,
          "pupil_diameter": 0.15, "wave_delta": 5.0, "wave_theta": 4.0,
          "wave_alpha": 4.0, "wave_beta": 3.0, "wave_gamma": 2.0}

_CLIP = {"attention": (1.0, 99.0), "meditation": (1.0, 99.0),
         "heart_rate": (40.0, 180.0), "pupil_diameter": (1.5, 8.0),
         "wave_delta": (0.1, 500.0), "wave_theta": (0.1, 500.0),
         "wave_alpha": (0.1, 500.0), "wave_beta": (0.1, 500.0),
         "wave_gamma": (0.1, 500.0)}

PRETEST = {"score": 40, "max_score": 100,
           "per_item": [5, 3, 6, 2, 7, 4, 1, 6, 3, 3]}
POSTTEST = {"score": 70, "max_score": 100,
            "per_item": [8, 6, 9, 5, 9, 7, 4, 8, 7, 7]}


def _level_at(modality: str, t_ms: int) -> float:
    for name, start, end in ACTIVITIES:
        if start <= t_ms < end:
            return _LEVELS[modality][name]
    return _LEVELS[modality][None]


def _master_values(modality: str, t: np.ndarray,
                   rng: np.random.Generator) -> np.ndarray:
    values = np.array([_level_at(modality, int(ti)) for ti in t], dtype=np.float64)
    values += rng.normal(0.0, _NOISE[modality], size=len(t))
    if modality == "attention":
        # A mid-quiz surge and a mid-lecture dip survive 30 s smoothing
        # and show up as a peak and a trough on the dashboard.
        values[(t >= 390_000) & (t < 405_000)] += 22.0
        values[(t >= 120_000) & (t < 132_000)] -= 25.0
    lo, hi = _CLIP[modality]
    return np.clip(values, lo, hi)


def _master_grid(rng: np.random.Generator) -> np.ndarray:
    t = np.arange(0, SESSION_MS + 1, 1000, dtype=np.int64)
    jitter = rng.integers(-40, 41, size=len(t))
    jitter[0] = jitter[-1] = 0
    return t + jitter


def _csv_bytes(rows: list[tuple[int, float]]) -> bytes:
    lines = ["timestamp_ms,value"]
    lines.extend(f"{t},{v}" for t, v in rows)
    return ("\n".join(lines) + "\n").encode("utf-8")


def _to_source(master: np.ndarray, scale: float, offset_ms: float) -> np.ndarray:
    # Invert t_master = scale * t_source + offset_ms onto integer source ms.
    return np.rint((master - offset_ms) / scale).astype(np.int64)


def write_demo_session(target: Path | str, seed: int = DEMO_SEED) -> Path:
    """Write the demo bundle under `target`; returns the manifest path."""
    target = Path(target)
    (target / "signals").mkdir(parents=True, exist_ok=True)
    (target / "media").mkdir(exist_ok=True)
    (target / "tests").mkdir(exist_ok=True)
    rng = np.random.default_rng(seed)

    signal_specs: list[SignalFileSpec] = []

    def emit(modality: str, source_id: str, source_t: np.ndarray,
             values: np.ndarray, clock: ClockSpec, *, corrupt: bool = False) -> None:
        rows = [(int(t), float(v)) for t, v in zip(source_t, values)]
        if corrupt:
            # Exercise every cleaning rule: non-finite values, out-of-range
            # values, duplicate timestamps, and two swapped rows.
            rows[50] = (rows[50][0], float("nan"))
            rows[150] = (rows[150][0], float("inf"))
            rows[250] = (rows[250][0], 150.0)
            rows[350] = (rows[350][0], -10.0)
            rows.append((rows[100][0], 0.0))
            rows.append((rows[200][0], 99.0))
            rows[400], rows[401] = rows[401], rows[400]
        rel = f"signals/{modality}-{source_id}.csv"
        (target / rel).write_bytes(_csv_bytes(rows))
        signal_specs.append(SignalFileSpec(
            path=rel, modality=modality, source_id=source_id, clock=clock))

    # Headset indices ride the master clock directly.
    for modality in ("attention", "meditation"):
        t = _master_grid(rng)
        emit(modality, "headset-01", t, _master_values(modality, t, rng), None,
             corrupt=(modality == "attention"))

    # Band powers share the headset but a recorder that booted 1.5 s early.
    wave_clock = ClockMapping(scale=1.0, offset_ms=-1500.0)
    for modality in ("wave_delta", "wave_theta", "wave_alpha", "wave_beta",
                     "wave_gamma"):
        t = _master_grid(rng)
        emit(modality, "headset-01", _to_source(t, 1.0, -1500.0),
             _master_values(modality, t, rng), wave_clock)

    # The watch clock runs 250 ms behind; two sync taps pin the mapping.
    t = _master_grid(rng)
    emit("heart_rate", "watch-01", _to_source(t, 1.0, 250.0),
         _master_values("heart_rate", t, rng),
         [(4_750, 5_000), (304_750, 305_000)])

    # The eye tracker drifts: t_master = 1.0005 * t_source - 2000.
    t = _master_grid(rng)
    emit("pupil_diameter", "eyetracker-01", _to_source(t, 1.0005, -2000.0),
         _master_values("pupil_diameter", t, rng),
         [(2_000, 1), (402_000, 400_201)])

    with (target / "activities.jsonl").open("w", encoding="utf-8") as fh:
        for name, start, end in ACTIVITIES:
            fh.write(json.dumps(
                {"name": name, "start_ms": start, "end_ms": end}) + "\n")

    media_specs = _write_media(target, rng)

    for name, doc in (("pretest", PRETEST), ("posttest", POSTTEST)):
        (target / "tests" / f"{name}.json").write_text(
            json.dumps(doc, indent=2) + "\n", encoding="utf-8")

    manifest = SessionManifest(
        learner_ref="learner-042@example.edu",
        session_start_ms=SESSION_START_MS,
        signal_files=tuple(signal_specs),
        activity_file="activities.jsonl",
        media_files=tuple(media_specs),
        test_files=TestFilesSpec(pretest="tests/pretest.json",
                                 posttest="tests/posttest.json"),
        demographics={"age_band": "18-24", "program": "industrial-engineering",
                      "handedness": "right"},
    )
    manifest_path = target / "manifest.json"
    manifest_path.write_bytes(serialize_manifest(manifest))
    return manifest_path


def _write_media(target: Path, rng: np.random.Generator) -> list[MediaFileSpec]:
    specs: list[MediaFileSpec] = []

    def placeholder_video(name: str, size: int) -> str:
        rel = f"media/{name}"
        payload = b"\x00\x00\x00\x18ftypmp42" + rng.bytes(size)
        (target / rel).write_bytes(payload)
        return rel

    # Screen recorder timestamps frames 1 s ahead of the master clock.
    specs.append(MediaFileSpec(
        path=placeholder_video("screen-main.mp4", 6144), kind="screen",
        source_start_ms=1_000, duration_ms=SESSION_MS, source_id="screen-01",
        clock=ClockMapping(scale=1.0, offset_ms=-1000.0)))
    specs.append(MediaFileSpec(
        path=placeholder_video("webcam-front.mp4", 4096), kind="webcam_front",
        source_start_ms=0, duration_ms=SESSION_MS, source_id="cam-front-01"))
    specs.append(MediaFileSpec(
        path=placeholder_video("webcam-side.mp4", 4096), kind="webcam_side",
        source_start_ms=30_000, duration_ms=540_000, source_id="cam-side-01"))

    points = [{"t_ms": i * 10_000, "x": round(float(x), 4), "y": round(float(y), 4)}
              for i, (x, y) in enumerate(zip(rng.random(61), rng.random(61)))]
    rel = "media/fixation-overlay.json"
    (target / rel).write_text(json.dumps({"points": points}) + "\n",
                              encoding="utf-8")
    specs.append(MediaFileSpec(
        path=rel, kind="fixation_overlay", source_start_ms=0,
        duration_ms=SESSION_MS, source_id="eyetracker-01"))
    return specs


def main(argv: list[str] | None = None) -> int:
    import argparse

    parser = argparse.ArgumentParser(
        description="Write the bundled demo session to a directory.")
    parser.add_argument("target", type=Path)
    parser.add_argument("--seed", type=int, default=DEMO_SEED)
    args = parser.parse_args(argv)
    manifest_path = write_demo_session(args.target, args.seed)
    print(manifest_path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
