"""Cross-stream correlations, prominent extrema, and activity ranking.

Ingests the demo bundle into an in-memory store and reads the derived
analytics back through the service, the same way the HTTP API does.
"""

from pathlib import Path

from sessionlens.config import EngineConfig
from sessionlens.demo import write_demo_session
from sessionlens.service import SessionService
from sessionlens.store import MemoryStore


def main() -> None:
    bundle = Path("demo-bundle")
    if not (bundle / "manifest.json").exists():
        write_demo_session(bundle)

    service = SessionService(MemoryStore(), EngineConfig())
    session_id = service.ingest_session(bundle / "manifest.json")
    print(f"ingested as {session_id}")

    # Pairwise Pearson r between all nine streams, resampled onto a shared
    # one-second grid. None would mean fewer than two common points or a
    # flat series; here every pair overlaps most of the session.
    corr = service.get_analytics_payload(session_id, "correlations")["result"]
    labels = ["/".join(pair) for pair in corr["labels"]]
    width = max(len(label) for label in labels) + 2
    print(f"\ncorrelation matrix (step {corr['step_ms']} ms):")
    print(" " * width + " ".join(f"{label.split('/')[0][:9]:>9}" for label in labels))
    for label, row in zip(labels, corr["r"]):
        cells = " ".join("     None" if r is None else f"{r:9.2f}" for r in row)
        print(f"{label:<{width}}{cells}")

    # Extrema of the 30 s smoothed attention stream: peaks and troughs
    # whose prominence clears 10% of the smoothed range, tagged with the
    # activity they fall in.
    entry = service.get_analytics_payload(
        session_id, "extrema",
        {"modality": "attention", "source_id": "headset-01"})["result"][0]
    print(f"\nattention extrema (window {entry['window_ms']} ms, "
          f"prominence_frac {entry['prominence_frac']}):")
    for e in entry["events"]:
        print(f"  {e['kind']:<7} t={e['t_ms'] // 1000:3d}s value={e['value']:6.2f} "
              f"prominence={e['prominence']:5.2f} during {e['activity_name']}")

    # Which activity drew the highest mean attention? The "unassigned"
    # bucket is bookkeeping, not an activity, so it never ranks.
    ranking = service.get_analytics_payload(
        session_id, "ranking",
        {"modality": "attention", "source_id": "headset-01"})["result"]
    print("\nactivities by mean attention:")
    for place, row in enumerate(ranking, start=1):
        print(f"  {place}. {row['activity_name']:<15} {row['mean']:6.2f}")

    print("next: python3 demos/04_serve_and_relabel.py")


if __name__ == "__main__":
    main()
