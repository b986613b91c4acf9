"""Record dashboard test fixtures from the live HTTP API.

Ingests the bundled demo session into a throwaway store, captures the
JSON every dashboard view consumes, then replays the two-editor story
(one relabel lands, the second hits a version conflict) so the conflict
fixtures are genuine server responses.

Run from the repository root after installing the engine:

    python3 frontend/scripts/record_fixtures.py
"""

import json
import tempfile
import warnings
from pathlib import Path

warnings.filterwarnings("ignore", message="Using `httpx` with `starlette.testclient`")

from fastapi.testclient import TestClient

from sessionlens.api import create_app
from sessionlens.config import EngineConfig
from sessionlens.demo import write_demo_session
from sessionlens.service import SessionService
from sessionlens.store import MemoryStore

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def dump(name: str, payload: object) -> None:
    path = FIXTURES / name
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    print(f"wrote {path.relative_to(Path.cwd()) if path.is_relative_to(Path.cwd()) else path}")


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as scratch:
        manifest = write_demo_session(Path(scratch) / "bundle")
        service = SessionService(MemoryStore(), EngineConfig())
        client = TestClient(create_app(service))

        created = client.post("/api/sessions",
                              json={"manifest_path": str(manifest)})
        created.raise_for_status()
        sid = created.json()["session_id"]

        reads = {
            "sessions.json": "/api/sessions",
            "session.json": f"/api/sessions/{sid}",
            "activities_v1.json": f"/api/sessions/{sid}/activities",
            "stream_attention_smoothed.json":
                f"/api/sessions/{sid}/streams/attention/headset-01?smooth=30000",
            "analytics_activity_stats.json":
                f"/api/sessions/{sid}/analytics/activity_stats",
            "analytics_correlations.json":
                f"/api/sessions/{sid}/analytics/correlations",
            "analytics_extrema.json": f"/api/sessions/{sid}/analytics/extrema",
            "analytics_test_comparison.json":
                f"/api/sessions/{sid}/analytics/test_comparison",
            "media.json": f"/api/sessions/{sid}/media",
        }
        for name, url in reads.items():
            response = client.get(url)
            response.raise_for_status()
            dump(name, response.json())

        # Another editor moves the quiz start 10 s later and lands first.
        acts = client.get(f"/api/sessions/{sid}/activities").json()
        moved = [dict(a) for a in acts["activities"]]
        next(a for a in moved if a["name"] == "quiz")["start_ms"] += 10_000
        accepted = client.put(
            f"/api/sessions/{sid}/activities",
            json={"base_version": acts["activities_version"], "activities": moved})
        accepted.raise_for_status()
        dump("activities_v2.json", accepted.json())

        # The losing editor replays the same base version and records the
        # 409 body its conflict banner has to explain.
        stale = client.put(
            f"/api/sessions/{sid}/activities",
            json={"base_version": acts["activities_version"], "activities": moved})
        assert stale.status_code == 409, stale.status_code
        dump("conflict_error.json",
             {"status": stale.status_code, "body": stale.json()})


if __name__ == "__main__":
    main()
