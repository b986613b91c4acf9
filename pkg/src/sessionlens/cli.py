"""Command-line entry points: ingest, analyze, serve, export."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from sessionlens.config import load_config
from sessionlens.errors import SessionLensError
from sessionlens.service import ANALYTICS_KINDS, SessionService
from sessionlens.store import FileStore


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sessionlens",
        description="Ingest, analyze, and serve multimodal learning-session "
                    "recordings.")
    parser.add_argument("--config", type=Path,
                        help="JSON config file (defaults plus env overrides)")
    parser.add_argument("--store-root", type=Path,
                        help="Session store directory (overrides config)")

    subparsers = parser.add_subparsers(dest="command", metavar="command")
    _register_ingest(subparsers)
    _register_analyze(subparsers)
    _register_serve(subparsers)
    _register_export(subparsers)
    return parser


def _register_ingest(subparsers) -> None:
    parser = subparsers.add_parser(
        "ingest", help="Run the pipeline on a session manifest")
    parser.add_argument("manifest", type=Path, help="Session manifest JSON")
    parser.set_defaults(handler=_handle_ingest)


def _register_analyze(subparsers) -> None:
    parser = subparsers.add_parser(
        "analyze", help="Print analytics JSON for a stored session")
    parser.add_argument("session_id", help="Anonymized session id")
    parser.add_argument("--kind", action="append", choices=ANALYTICS_KINDS,
                        help="Analytics kind (repeatable; default: all except "
                             "ranking)")
    parser.add_argument("--modality", help="Stream modality, required for ranking")
    parser.add_argument("--source-id", help="Stream source id, required for ranking")
    parser.set_defaults(handler=_handle_analyze)


def _register_serve(subparsers) -> None:
    parser = subparsers.add_parser("serve", help="Run the HTTP API")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, help="Port (overrides config)")
    parser.add_argument("--frontend", type=Path,
                        help="Built dashboard directory to serve at /")
    parser.set_defaults(handler=_handle_serve)


def _register_export(subparsers) -> None:
    parser = subparsers.add_parser(
        "export", help="Write a session's canonical JSON document")
    parser.add_argument("session_id", help="Anonymized session id")
    parser.add_argument("path", type=Path, help="Output file, or - for stdout")
    parser.set_defaults(handler=_handle_export)


def _make_service(args: argparse.Namespace) -> SessionService:
    config = load_config(args.config)
    if args.store_root is not None:
        config = replace(config, store_root=args.store_root)
    return SessionService(FileStore(config.store_root), config)


def _handle_ingest(args: argparse.Namespace) -> int:
    service = _make_service(args)
    session_id = service.ingest_session(args.manifest)
    print(session_id)
    return 0


def _handle_analyze(args: argparse.Namespace) -> int:
    service = _make_service(args)
    kinds = args.kind or [k for k in ANALYTICS_KINDS if k != "ranking"]
    params = {k: v for k, v in
              {"modality": args.modality, "source_id": args.source_id}.items()
              if v is not None}
    report = {kind: service.get_analytics_payload(args.session_id, kind, params)
              for kind in kinds}
    print(json.dumps(report, indent=2, ensure_ascii=False))
    return 0


def _handle_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from sessionlens.api import create_app

    config = load_config(args.config)
    if args.store_root is not None:
        config = replace(config, store_root=args.store_root)
    if args.port is not None:
        config = replace(config, port=args.port)
    service = SessionService(FileStore(config.store_root), config)
    app = create_app(service, frontend_dir=args.frontend)
    uvicorn.run(app, host=args.host, port=config.port)
    return 0


def _handle_export(args: argparse.Namespace) -> int:
    service = _make_service(args)
    data = service.export_session(args.session_id)
    if str(args.path) == "-":
        sys.stdout.buffer.write(data)
    else:
        args.path.write_bytes(data)
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "handler", None) is None:
        parser.print_help()
        return 0
    try:
        return args.handler(args)
    except SessionLensError as exc:
        print(f"sessionlens: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
