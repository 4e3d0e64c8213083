"""Search connectors: one client adapter per source, plus rate limiting.

Every adapter translates its provider's native payload into the wire shape
(title, abstract, authors, venue, year, doi, url, source_id) so record
normalization is shared. The "wire" kind speaks the documented contract
directly and serves the internal index and test stubs.
"""

from __future__ import annotations

import logging
import os
import threading
import time
from dataclasses import dataclass, field

import httpx

from litscreen.catalog import PaperRecord, YEAR_MIN, normalize_doi, utcnow
from litscreen.config import ConnectorConfig
from litscreen.errors import ConnectorFetchError, UntitledRecordError, ValidationError

logger = logging.getLogger(__name__)


class RateLimiter:
    """Blocking per-connector budget: at most `rate` requests per second."""

    def __init__(self, rate: float):
        self.interval = 1.0 / rate
        self._lock = threading.Lock()
        self._next_slot = 0.0

    def acquire(self):
        with self._lock:
            now = time.monotonic()
            slot = max(now, self._next_slot)
            self._next_slot = slot + self.interval
        wait = slot - now
        if wait > 0:
            time.sleep(wait)


_limiters: dict[str, RateLimiter] = {}
_limiters_guard = threading.Lock()


def limiter_for(connector: ConnectorConfig) -> RateLimiter:
    """Process-global limiter per connector name."""
    with _limiters_guard:
        limiter = _limiters.get(connector.name)
        if limiter is None:
            limiter = RateLimiter(connector.rate_limit)
            _limiters[connector.name] = limiter
        return limiter


@dataclass
class FetchResult:
    records: list[dict] = field(default_factory=list)  # wire-shaped raw records
    skipped: int = 0  # malformed payload items


def _opt_str(value) -> str | None:
    if isinstance(value, str) and value.strip():
        return value.strip()
    return None


def _opt_year(value) -> int | None:
    if isinstance(value, bool):
        return None
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        digits = value.strip()[:4]
        if digits.isdigit():
            return int(digits)
    return None


def normalize_record(
    raw: dict, source_name: str, *, retrieved_at=None
) -> PaperRecord:
    """Wire-shaped raw record -> PaperRecord.

    Unparseable optional fields become absent; a missing or empty title is
    a typed rejection.
    """
    title = _opt_str(raw.get("title"))
    if not title:
        raise UntitledRecordError(f"untitled record from {source_name}")
    external_ids = {}
    doi = _opt_str(raw.get("doi"))
    if doi:
        normalized = normalize_doi(doi)
        if normalized:
            external_ids["doi"] = normalized
    source_id = _opt_str(raw.get("source_id"))
    if source_id:
        external_ids[source_name] = source_id
    authors = raw.get("authors")
    if not isinstance(authors, list):
        authors = []
    year = _opt_year(raw.get("year"))
    if year is not None and not (YEAR_MIN <= year <= utcnow().year + 1):
        year = None
    return PaperRecord(
        id=PaperRecord.new_id(),
        title=title,
        abstract=_opt_str(raw.get("abstract")),
        authors=tuple(a.strip() for a in authors if isinstance(a, str) and a.strip()),
        venue=_opt_str(raw.get("venue")),
        year=year,
        url=_opt_str(raw.get("url")),
        external_ids=external_ids,
        sources=frozenset({source_name}),
        retrieved_at=retrieved_at or utcnow(),
    )


# -- provider payload adapters ---------------------------------------------


def parse_wire_page(payload: dict) -> tuple[list[dict], int]:
    results = payload.get("results")
    if not isinstance(results, list):
        raise ConnectorFetchError("wire payload missing results array")
    return [r for r in results], int(payload.get("total", len(results)))


def parse_semantic_scholar_page(payload: dict) -> tuple[list[dict], int]:
    items = payload.get("data") or []
    out = []
    for item in items:
        if not isinstance(item, dict):
            continue
        ids = item.get("externalIds") or {}
        out.append({
            "title": item.get("title"),
            "abstract": item.get("abstract"),
            "authors": [a.get("name") for a in item.get("authors") or [] if isinstance(a, dict)],
            "venue": item.get("venue"),
            "year": item.get("year"),
            "doi": ids.get("DOI"),
            "url": item.get("url"),
            "source_id": item.get("paperId"),
        })
    return out, int(payload.get("total", len(out)))


def parse_core_page(payload: dict) -> tuple[list[dict], int]:
    items = payload.get("results") or []
    out = []
    for item in items:
        if not isinstance(item, dict):
            continue
        out.append({
            "title": item.get("title"),
            "abstract": item.get("abstract"),
            "authors": [a.get("name") for a in item.get("authors") or [] if isinstance(a, dict)],
            "venue": (item.get("journals") or [{}])[0].get("title")
            if item.get("journals")
            else item.get("publisher"),
            "year": item.get("yearPublished"),
            "doi": item.get("doi"),
            "url": item.get("downloadUrl"),
            "source_id": str(item["id"]) if item.get("id") is not None else None,
        })
    return out, int(payload.get("totalHits", len(out)))


def parse_pubmed_summaries(payload: dict) -> list[dict]:
    result = payload.get("result") or {}
    out = []
    for uid in result.get("uids") or []:
        item = result.get(uid)
        if not isinstance(item, dict):
            continue
        doi = None
        for idrec in item.get("articleids") or []:
            if isinstance(idrec, dict) and idrec.get("idtype") == "doi":
                doi = idrec.get("value")
                break
        out.append({
            "title": item.get("title"),
            "abstract": None,  # esummary carries no abstract
            "authors": [a.get("name") for a in item.get("authors") or [] if isinstance(a, dict)],
            "venue": item.get("fulljournalname") or item.get("source"),
            "year": (item.get("pubdate") or "")[:4],
            "doi": doi,
            "url": f"https://pubmed.ncbi.nlm.nih.gov/{uid}/",
            "source_id": uid,
        })
    return out


def _auth_headers(connector: ConnectorConfig) -> dict[str, str]:
    if not connector.api_key_env:
        return {}
    key = os.environ.get(connector.api_key_env)
    if not key:
        return {}
    if connector.kind == "semantic_scholar":
        return {"x-api-key": key}
    if connector.kind == "core":
        return {"Authorization": f"Bearer {key}"}
    return {}


def _fetch_page(
    connector: ConnectorConfig,
    client: httpx.Client,
    query: str,
    page_size: int,
    offset: int,
    min_year: int | None,
) -> tuple[list[dict], int]:
    base = connector.base_url.rstrip("/")
    headers = _auth_headers(connector)
    if connector.kind == "wire":
        params: dict = {"q": query, "limit": page_size, "offset": offset}
        if min_year is not None and connector.supports_year_filter:
            params["min_year"] = min_year
        response = client.get(f"{base}/search", params=params, headers=headers)
        response.raise_for_status()
        return parse_wire_page(response.json())
    if connector.kind == "semantic_scholar":
        params = {
            "query": query,
            "limit": page_size,
            "offset": offset,
            "fields": "title,abstract,authors,venue,year,externalIds,url",
        }
        if min_year is not None and connector.supports_year_filter:
            params["year"] = f"{min_year}-"
        response = client.get(f"{base}/paper/search", params=params, headers=headers)
        response.raise_for_status()
        return parse_semantic_scholar_page(response.json())
    if connector.kind == "core":
        body: dict = {"q": query, "limit": page_size, "offset": offset}
        if min_year is not None and connector.supports_year_filter:
            body["q"] = f"({query}) AND yearPublished>={min_year}"
        response = client.post(f"{base}/search/works", json=body, headers=headers)
        response.raise_for_status()
        return parse_core_page(response.json())
    if connector.kind == "pubmed":
        search_params = {
            "db": "pubmed",
            "term": query,
            "retmode": "json",
            "retmax": page_size,
            "retstart": offset,
        }
        if min_year is not None and connector.supports_year_filter:
            search_params["datetype"] = "pdat"
            search_params["mindate"] = str(min_year)
            search_params["maxdate"] = "3000"
        key = os.environ.get(connector.api_key_env or "", "")
        if key:
            search_params["api_key"] = key
        response = client.get(f"{base}/esearch.fcgi", params=search_params)
        response.raise_for_status()
        payload = response.json()
        id_list = (payload.get("esearchresult") or {}).get("idlist") or []
        total = int((payload.get("esearchresult") or {}).get("count", len(id_list)))
        if not id_list:
            return [], total
        summary_params = {"db": "pubmed", "retmode": "json", "id": ",".join(id_list)}
        if key:
            summary_params["api_key"] = key
        response = client.get(f"{base}/esummary.fcgi", params=summary_params)
        response.raise_for_status()
        return parse_pubmed_summaries(response.json()), total
    raise ValidationError(f"unknown connector kind {connector.kind!r}")


def fetch_connector(
    connector: ConnectorConfig,
    query: str,
    limit: int,
    min_year: int | None = None,
    *,
    client: httpx.Client | None = None,
    timeout: float = 30.0,
) -> FetchResult:
    """Fetch up to `limit` raw records, paginating per connector capabilities.

    The year filter is pushed to sources that support it and always
    re-applied client-side by the caller. Rate budgets are global per
    connector; requests are deferred, never dropped.
    """
    if limit < 1:
        raise ValidationError("limit must be >= 1")
    if not query.strip():
        raise ValidationError("query must be non-empty")
    limiter = limiter_for(connector)
    owns_client = client is None
    http = client or httpx.Client(timeout=timeout)
    result = FetchResult()
    try:
        offset = 0
        total_available: int | None = None
        while len(result.records) < limit:
            page_size = min(connector.max_page_size, limit - len(result.records))
            limiter.acquire()
            try:
                page, total = _fetch_page(connector, http, query, page_size, offset, min_year)
            except httpx.HTTPError as exc:
                raise ConnectorFetchError(
                    f"{connector.name} fetch failed: {exc}",
                    {"connector": connector.name, "query": query},
                ) from exc
            total_available = total
            kept = 0
            for item in page:
                if not isinstance(item, dict):
                    result.skipped += 1
                    continue
                result.records.append(item)
                kept += 1
                if len(result.records) >= limit:
                    break
            if not page:
                break
            offset += len(page)
            if total_available is not None and offset >= total_available:
                break
        return result
    finally:
        if owns_client:
            http.close()
