"""Drive the HTTP API in process: ingest, read payloads, relabel, collide.

Runs the FastAPI app against a throwaway file store via the test client,
so no port is opened. `sessionlens serve` hosts the identical app for
the dashboard.
"""

import tempfile
import warnings
from pathlib import Path

# starlette warns at import time about its test client's httpx transport;
# not relevant to this walkthrough.
warnings.filterwarnings("ignore", message="Using `httpx` with `starlette.testclient`")

from fastapi.testclient import TestClient

from sessionlens.api import create_app
from sessionlens.config import EngineConfig
from sessionlens.demo import write_demo_session
from sessionlens.service import SessionService
from sessionlens.store import FileStore


def main() -> None:
    with tempfile.TemporaryDirectory() as scratch:
        manifest = write_demo_session(Path(scratch) / "bundle")
        config = EngineConfig(store_root=Path(scratch) / "store")
        service = SessionService(FileStore(config.store_root), config)
        client = TestClient(create_app(service))

        created = client.post("/api/sessions", json={"manifest_path": str(manifest)})
        session_id = created.json()["session_id"]
        print(f"POST /api/sessions -> {created.status_code}, session {session_id}")

        # The learning-gain card on the dashboard reads this payload.
        comparison = client.get(
            f"/api/sessions/{session_id}/analytics/test_comparison").json()["result"]
        print(f"test comparison: {comparison['pre_score']:.0f} -> "
              f"{comparison['post_score']:.0f} of {comparison['max_score']:.0f} "
              f"(relative gain {comparison['relative_gain']:.2f})")

        # A reviewer decides the quiz really started 10 s later and submits
        # the corrected list against the version they were looking at.
        acts = client.get(f"/api/sessions/{session_id}/activities").json()
        print(f"\nactivities_version {acts['activities_version']}, "
              f"{len(acts['activities'])} activities")
        edited = [dict(a) for a in acts["activities"]]
        quiz = next(a for a in edited if a["name"] == "quiz")
        quiz["start_ms"] += 10_000
        accepted = client.put(
            f"/api/sessions/{session_id}/activities",
            json={"base_version": acts["activities_version"], "activities": edited})
        print(f"PUT activities (quiz start +10 s) -> {accepted.status_code}, "
              f"now version {accepted.json()['activities_version']}")

        # A second editor still holding the old version gets a clean
        # conflict instead of silently clobbering the first edit.
        stale = client.put(
            f"/api/sessions/{session_id}/activities",
            json={"base_version": acts["activities_version"], "activities": edited})
        print(f"stale PUT with the old base_version -> {stale.status_code} "
              f"{stale.json()['code']}")

        # Media is byte-served with range support for the video player.
        assets = client.get(f"/api/sessions/{session_id}/media").json()["assets"]
        clip = next(a for a in assets if a["kind"] == "screen")
        head = client.get(clip["url"], headers={"Range": "bytes=0-15"})
        print(f"\nGET {clip['url']} (first 16 bytes) -> {head.status_code}, "
              f"{head.headers['content-range']}, type {head.headers['content-type']}")


if __name__ == "__main__":
    main()
