"""Fan-out search across connectors, with living-update year filtering.

A run fetches every (query, connector) pair concurrently, caps each pair at
the protocol's top-N, drops records older than the previous search year on
update runs, deduplicates the combined batch against itself and the stored
corpus, and persists the survivors atomically. Failed cells are reported,
not fatal; a run where every cell fails is an error.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime

import httpx

from litscreen.catalog import PaperRecord, ReviewProtocol, utcnow
from litscreen.config import Settings
from litscreen.connectors import fetch_connector, normalize_record
from litscreen.dedup import dedup_batch
from litscreen.errors import (
    ConnectorFetchError,
    SearchRunFailed,
    UntitledRecordError,
    ValidationError,
)
from litscreen.store import Store

logger = logging.getLogger(__name__)


@dataclass
class CellResult:
    """Outcome of one (query, connector) fetch."""

    query: str
    connector: str
    status: str = "ok"  # "ok" | "failed"
    fetched: int = 0  # records entering dedup (normalized, year-filtered)
    skipped: int = 0  # malformed payload items
    untitled: int = 0  # records rejected for missing titles
    year_dropped: int = 0  # records below the update-run year floor
    error: str | None = None

    def as_dict(self) -> dict:
        return {
            "query": self.query,
            "connector": self.connector,
            "status": self.status,
            "fetched": self.fetched,
            "skipped": self.skipped,
            "untitled": self.untitled,
            "year_dropped": self.year_dropped,
            "error": self.error,
        }


@dataclass
class SearchRun:
    review_id: str
    executed_at: datetime
    min_year: int | None
    cells: list[CellResult] = field(default_factory=list)
    new_papers: int = 0
    duplicates_suppressed: int = 0


def run_search(
    protocol: ReviewProtocol,
    store: Store,
    settings: Settings,
    *,
    executed_at: datetime | None = None,
    client: httpx.Client | None = None,
) -> SearchRun:
    """Execute one (possibly living-update) search run for a review."""
    registry = settings.connector_map()
    unknown = [name for name in protocol.connectors if name not in registry]
    if unknown:
        raise ValidationError(f"unregistered connectors selected: {unknown}")
    queries = [q for q in protocol.queries if q.strip()]
    if not queries:
        raise ValidationError("protocol has no non-empty queries")

    min_year = protocol.last_search_year  # set iff this is an update run
    executed_at = executed_at or utcnow()
    run = SearchRun(review_id=protocol.review_id, executed_at=executed_at, min_year=min_year)
    top_n = protocol.top_n

    def fetch_cell(pair: tuple[str, str]) -> tuple[CellResult, list[PaperRecord]]:
        query, name = pair
        connector = registry[name]
        cell = CellResult(query=query, connector=name)
        try:
            fetched = fetch_connector(
                connector,
                query,
                top_n,
                min_year,
                client=client,
                timeout=settings.connector_timeout,
            )
        except ConnectorFetchError as exc:
            cell.status = "failed"
            cell.error = str(exc)
            return cell, []
        cell.skipped = fetched.skipped
        records = []
        for raw in fetched.records:
            try:
                record = normalize_record(raw, name, retrieved_at=executed_at)
            except UntitledRecordError:
                cell.untitled += 1
                continue
            # keep absent-year records on update runs; dedup catches repeats
            if min_year is not None and record.year is not None and record.year < min_year:
                cell.year_dropped += 1
                continue
            records.append(record)
        cell.fetched = len(records)
        return cell, records

    pairs = [(query, name) for query in queries for name in protocol.connectors]
    batch: list[PaperRecord] = []
    with ThreadPoolExecutor(max_workers=min(8, len(pairs))) as pool:
        for cell, records in pool.map(fetch_cell, pairs):
            run.cells.append(cell)
            batch.extend(records)

    if all(cell.status == "failed" for cell in run.cells):
        raise SearchRunFailed(
            "every (query, connector) fetch failed",
            {"cells": [c.as_dict() for c in run.cells]},
        )

    with store.review_writer(protocol.review_id):
        corpus_keys = store.corpus_key_index(protocol.review_id)
        fresh, report = dedup_batch(
            batch,
            corpus_keys,
            threshold=settings.dedup_threshold,
            blocking=settings.dedup_blocking,
        )
        store.upsert_papers(protocol.review_id, fresh)
        run.new_papers = len(fresh)
        run.duplicates_suppressed = len(batch) - len(fresh)
        store.add_search_run(
            protocol.review_id,
            executed_at=executed_at,
            min_year=min_year,
            cells=[c.as_dict() for c in run.cells],
            new_papers=run.new_papers,
            duplicates_suppressed=run.duplicates_suppressed,
        )
        store.set_last_search_year(protocol.review_id, executed_at.year)
    return run
