"""Direct imports that bypass search: RIS/BibTeX files and PDFs via GROBID.

Everything imported flows through batch dedup against the review corpus
before persistence, so importing the same file twice adds nothing. Records
marked as seed studies get an automatic include decision under the reserved
"seed-import" reviewer, which feeds classifier training.
"""

from __future__ import annotations

import logging
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field, replace
from datetime import datetime

import httpx

from litscreen.catalog import (
    DecisionOrigin,
    PaperRecord,
    SEED_REVIEWER,
    ScreeningDecision,
    Verdict,
    YEAR_MIN,
    normalize_doi,
    utcnow,
)
from litscreen.config import Settings
from litscreen.dedup import dedup_batch
from litscreen.errors import (
    ServiceUnavailableError,
    UntitledRecordError,
    ValidationError,
)
from litscreen.refparse import ParsedRefs, parse_bibtex, parse_ris
from litscreen.store import Store

logger = logging.getLogger(__name__)

TEI_NS = {"tei": "http://www.tei-c.org/ns/1.0"}


@dataclass
class ImportReport:
    source_kind: str  # "ris" | "bib" | "pdf"
    parsed: int = 0
    rejected: list[tuple[int, str]] = field(default_factory=list)
    new_after_dedup: int = 0
    seeds_marked: int = 0


def _mark_seed(record: PaperRecord) -> PaperRecord:
    return replace(record, is_seed=True, sources=record.sources | {"seed"})


def _persist_batch(
    review_id: str,
    records: list[PaperRecord],
    mark_as_seed: bool,
    store: Store,
    settings: Settings,
    decided_at: datetime,
) -> tuple[list[PaperRecord], int]:
    """Dedup against the corpus, persist, and label seeds. Returns (fresh, seeds)."""
    if mark_as_seed:
        records = [_mark_seed(r) for r in records]
    with store.review_writer(review_id):
        corpus_keys = store.corpus_key_index(review_id)
        fresh, _report = dedup_batch(
            records,
            corpus_keys,
            threshold=settings.dedup_threshold,
            blocking=settings.dedup_blocking,
        )
        store.upsert_papers(review_id, fresh)
        seeds = 0
        if mark_as_seed:
            for record in fresh:
                store.add_decision(
                    review_id,
                    ScreeningDecision(
                        paper_id=record.id,
                        reviewer_id=SEED_REVIEWER,
                        main=Verdict.INCLUDE,
                        origin=DecisionOrigin.MANUAL,
                        decided_at=decided_at,
                    ),
                )
                seeds += 1
    return fresh, seeds


def import_references(
    review_id: str,
    payload: bytes,
    kind: str,
    *,
    mark_as_seed: bool = False,
    store: Store,
    settings: Settings,
    retrieved_at: datetime | None = None,
) -> ImportReport:
    """Bulk upload from a RIS or BibTeX reference file."""
    if len(payload) > settings.upload_max_bytes:
        raise ValidationError(
            f"upload exceeds the {settings.upload_max_bytes} byte cap",
            {"size": len(payload)},
        )
    when = retrieved_at or utcnow()
    if kind == "ris":
        parsed: ParsedRefs = parse_ris(payload, retrieved_at=when)
    elif kind == "bib":
        parsed = parse_bibtex(payload, retrieved_at=when)
    else:
        raise ValidationError(f"unsupported reference kind {kind!r}")
    report = ImportReport(source_kind=kind, parsed=len(parsed.records), rejected=parsed.rejected)
    fresh, report.seeds_marked = _persist_batch(
        review_id, parsed.records, mark_as_seed, store, settings, when
    )
    report.new_after_dedup = len(fresh)
    return report


# -- PDF import via GROBID ----------------------------------------------------


class GrobidClient:
    """Client for GROBID's header-extraction endpoint."""

    def __init__(self, base_url: str, *, timeout: float = 60.0, client: httpx.Client | None = None):
        self.base_url = base_url.rstrip("/")
        self._client = client or httpx.Client(timeout=timeout)

    def is_alive(self) -> bool:
        try:
            response = self._client.get(f"{self.base_url}/api/isalive")
            return response.status_code == 200
        except httpx.HTTPError:
            return False

    def process_header(self, pdf_bytes: bytes) -> str:
        """Returns the TEI-XML header document."""
        try:
            response = self._client.post(
                f"{self.base_url}/api/processHeaderDocument",
                files={"input": ("upload.pdf", pdf_bytes, "application/pdf")},
            )
            response.raise_for_status()
        except httpx.HTTPError as exc:
            raise ServiceUnavailableError(f"GROBID request failed: {exc}") from exc
        return response.text

    def close(self):
        self._client.close()


def _tei_text(element) -> str:
    return " ".join("".join(element.itertext()).split())


def parse_tei_header(xml_text: str) -> dict:
    """Extract title/abstract/authors/year/venue/doi from a TEI header."""
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        raise ValidationError(f"GROBID returned invalid TEI XML: {exc}") from exc
    out: dict = {
        "title": None,
        "abstract": None,
        "authors": [],
        "year": None,
        "venue": None,
        "doi": None,
    }
    title = root.find(".//tei:fileDesc/tei:titleStmt/tei:title", TEI_NS)
    if title is not None:
        text = _tei_text(title)
        out["title"] = text or None
    abstract = root.find(".//tei:profileDesc/tei:abstract", TEI_NS)
    if abstract is not None:
        text = _tei_text(abstract)
        out["abstract"] = text or None
    for pers in root.findall(
        ".//tei:sourceDesc//tei:biblStruct//tei:author/tei:persName", TEI_NS
    ):
        forenames = [_tei_text(f) for f in pers.findall("tei:forename", TEI_NS)]
        surname = pers.find("tei:surname", TEI_NS)
        parts = [p for p in forenames if p]
        if surname is not None and _tei_text(surname):
            parts.append(_tei_text(surname))
        if parts:
            out["authors"].append(" ".join(parts))
    date = root.find(".//tei:sourceDesc//tei:biblStruct//tei:imprint/tei:date", TEI_NS)
    if date is None:
        date = root.find(".//tei:publicationStmt/tei:date", TEI_NS)
    if date is not None:
        raw = date.get("when") or _tei_text(date)
        match = re.search(r"\d{4}", raw or "")
        if match:
            year = int(match.group())
            if YEAR_MIN <= year <= utcnow().year + 1:
                out["year"] = year
    venue = root.find(".//tei:sourceDesc//tei:biblStruct/tei:monogr/tei:title", TEI_NS)
    if venue is not None and _tei_text(venue):
        out["venue"] = _tei_text(venue)
    doi = root.find(".//tei:idno[@type='DOI']", TEI_NS)
    if doi is not None and _tei_text(doi):
        out["doi"] = normalize_doi(_tei_text(doi))
    return out


def import_pdf(
    review_id: str,
    payload: bytes,
    *,
    mark_as_seed: bool = False,
    store: Store,
    settings: Settings,
    grobid: GrobidClient | None = None,
    retrieved_at: datetime | None = None,
) -> tuple[PaperRecord | None, ImportReport]:
    """Extract a PDF's header via GROBID and add it to the corpus.

    The PDF binary is not persisted, only the extracted metadata. Returns
    the parsed record (None if it was rejected) and the import report.
    """
    if len(payload) > settings.upload_max_bytes:
        raise ValidationError(
            f"upload exceeds the {settings.upload_max_bytes} byte cap",
            {"size": len(payload)},
        )
    client = grobid or GrobidClient(settings.grobid_base_url)
    if not client.is_alive():
        raise ServiceUnavailableError(
            f"GROBID service at {client.base_url} is unreachable"
        )
    when = retrieved_at or utcnow()
    header = parse_tei_header(client.process_header(payload))
    report = ImportReport(source_kind="pdf")
    if not header["title"]:
        report.rejected.append((0, "GROBID returned no title"))
        return None, report
    external_ids = {"doi": header["doi"]} if header["doi"] else {}
    record = PaperRecord(
        id=PaperRecord.new_id(),
        title=header["title"],
        abstract=header["abstract"],
        authors=tuple(header["authors"]),
        venue=header["venue"],
        year=header["year"],
        url=None,
        external_ids=external_ids,
        sources=frozenset({"pdf"}),
        retrieved_at=when,
    )
    report.parsed = 1
    fresh, report.seeds_marked = _persist_batch(
        review_id, [record], mark_as_seed, store, settings, when
    )
    report.new_after_dedup = len(fresh)
    return (fresh[0] if fresh else None), report
