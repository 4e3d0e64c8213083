"""Operator command line: serve, migrate, import, search, export, stubs."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from litscreen.config import Settings, load_settings
from litscreen.errors import LitscreenError
from litscreen.store import Store


def _settings(args) -> Settings:
    return load_settings(args.config)


def _store(settings: Settings) -> Store:
    return Store(settings.store_url)


def cmd_serve(args) -> int:
    import uvicorn

    from litscreen.api import create_app

    settings = _settings(args)
    store = _store(settings)
    if store.schema_version() == 0:
        print("store is not migrated; run `litscreen migrate` first", file=sys.stderr)
        return 2
    app = create_app(settings, store)
    uvicorn.run(app, host=settings.host, port=settings.port, log_level="info")
    return 0


def cmd_migrate(args) -> int:
    settings = _settings(args)
    store = _store(settings)
    applied = store.migrate()
    if applied:
        print(f"applied migrations: {applied}")
    else:
        print(f"store already at schema version {store.schema_version()}")
    return 0


def cmd_import(args) -> int:
    from litscreen import ingest

    settings = _settings(args)
    store = _store(settings)
    payload = Path(args.file).read_bytes()
    if args.kind == "pdf":
        record, report = ingest.import_pdf(
            args.review, payload, mark_as_seed=args.seed, store=store, settings=settings
        )
        if record is not None:
            print(f"imported: {record.title}")
    else:
        report = ingest.import_references(
            args.review,
            payload,
            args.kind,
            mark_as_seed=args.seed,
            store=store,
            settings=settings,
        )
    print(
        f"parsed={report.parsed} rejected={len(report.rejected)} "
        f"new_after_dedup={report.new_after_dedup} seeds_marked={report.seeds_marked}"
    )
    for index, reason in report.rejected:
        print(f"  rejected entry {index}: {reason}", file=sys.stderr)
    return 0


def cmd_search(args) -> int:
    from litscreen import federation

    settings = _settings(args)
    store = _store(settings)
    protocol = store.get_protocol(args.review)
    run = federation.run_search(protocol, store, settings)
    print(
        f"new_papers={run.new_papers} duplicates_suppressed={run.duplicates_suppressed} "
        f"min_year={run.min_year}"
    )
    for cell in run.cells:
        status = cell.status if cell.status == "ok" else f"FAILED ({cell.error})"
        print(f"  [{cell.connector}] {cell.query!r}: fetched={cell.fetched} {status}")
    return 0


def cmd_export(args) -> int:
    from litscreen.export import export_json, export_review

    settings = _settings(args)
    store = _store(settings)
    document = export_review(args.review, store)
    text = export_json(document)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    return 0


def cmd_stub_model_server(args) -> int:
    from litscreen.stubs import StubModelServer

    script = args.script.split(",") if args.script else None
    server = StubModelServer(args.port, script=script, default_answer=args.default_answer)
    print(f"stub model server listening on {server.base_url}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return 0


def cmd_stub_connector_server(args) -> int:
    from litscreen.stubs import StubConnectorServer, load_corpus

    corpus = load_corpus(args.corpus) if args.corpus else None
    server = StubConnectorServer(
        args.port, corpus=corpus, synthetic_total=args.synthetic_total
    )
    size = args.synthetic_total if args.synthetic_total else len(corpus or [])
    print(f"stub connector server listening on {server.base_url} ({size} records)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="litscreen",
        description="Living literature review platform: search, screen, automate.",
    )
    parser.add_argument("--config", help="path to a TOML config file", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("serve", help="run the API service").set_defaults(func=cmd_serve)
    sub.add_parser("migrate", help="apply schema migrations").set_defaults(func=cmd_migrate)

    p = sub.add_parser("import", help="import a reference file or PDF into a review")
    p.add_argument("--review", required=True)
    p.add_argument("--kind", required=True, choices=["ris", "bib", "pdf"])
    p.add_argument("--file", required=True)
    p.add_argument("--seed", action="store_true", help="mark imports as seed studies")
    p.set_defaults(func=cmd_import)

    p = sub.add_parser("search", help="run (or living-update) a review search")
    p.add_argument("--review", required=True)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("export", help="export a review as JSON")
    p.add_argument("--review", required=True)
    p.add_argument("--out", default="-", help="output path, or - for stdout")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("stub-model-server", help="deterministic text-generation stub")
    p.add_argument("--port", type=int, default=8081)
    p.add_argument("--script", help="comma-separated answers cycled per request")
    p.add_argument("--default-answer", default="yes")
    p.set_defaults(func=cmd_stub_model_server)

    p = sub.add_parser("stub-connector-server", help="wire-contract search stub")
    p.add_argument("--port", type=int, default=8090)
    p.add_argument("--corpus", help="JSON corpus file (array or {results: [...]})")
    p.add_argument("--synthetic-total", type=int, help="serve N generated records instead")
    p.set_defaults(func=cmd_stub_connector_server)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except LitscreenError as exc:
        print(
            f"error [{exc.code}]: {exc.message}"
            + (f" {json.dumps(exc.details)}" if exc.details else ""),
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
