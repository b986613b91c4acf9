from __future__ import annotations

from pathlib import Path

import pytest

from sessionlens.analytics import SignalStream
from sessionlens.config import EngineConfig
from sessionlens.demo import write_demo_session
from sessionlens.service import SessionService
from sessionlens.store import FileStore, MemoryStore
from sessionlens.timeline import Sample


def make_stream(timestamps, values, modality: str = "attention",
                source_id: str = "s1", cleaned: bool = True) -> SignalStream:
    samples = tuple(Sample(int(t), float(v)) for t, v in zip(timestamps, values))
    return SignalStream(modality=modality, source_id=source_id,
                        samples=samples, cleaned=cleaned)


@pytest.fixture(scope="session")
def demo_manifest(tmp_path_factory) -> Path:
    """One shared demo bundle; treat its files as read-only."""
    target = tmp_path_factory.mktemp("demo-bundle")
    return write_demo_session(target)


@pytest.fixture()
def memory_service() -> SessionService:
    return SessionService(MemoryStore(), EngineConfig())


@pytest.fixture()
def file_service(tmp_path) -> SessionService:
    config = EngineConfig(store_root=tmp_path / "store")
    return SessionService(FileStore(config.store_root), config)


@pytest.fixture()
def ingested(file_service, demo_manifest):
    """A fresh FileStore service with the demo session already ingested."""
    session_id = file_service.ingest_session(demo_manifest)
    return file_service, session_id
