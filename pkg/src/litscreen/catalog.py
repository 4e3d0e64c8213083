"""Domain model shared by every other module.

Plain value types plus the canonicalization routines (title normalization,
canonical keys) that deduplication builds on. Construction validates
invariants; nothing here mutates in place or touches storage.
"""

from __future__ import annotations

import unicodedata
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Optional

from litscreen.errors import ValidationError

YEAR_MIN = 1500

_DOI_PREFIXES = (
    "https://doi.org/",
    "http://doi.org/",
    "https://dx.doi.org/",
    "http://dx.doi.org/",
    "doi.org/",
    "doi:",
)


def utcnow() -> datetime:
    return datetime.now(timezone.utc)


def normalize_doi(raw: str) -> str:
    """Lowercase a DOI and strip scheme/host prefixes."""
    doi = raw.strip().lower()
    changed = True
    while changed:
        changed = False
        for prefix in _DOI_PREFIXES:
            if doi.startswith(prefix):
                doi = doi[len(prefix):]
                changed = True
    return doi.strip()


def normalize_title(raw: str) -> str:
    """Fold a title into its canonical comparison form.

    Unicode compatibility decomposition with combining marks dropped,
    lowercased, punctuation replaced by spaces, whitespace collapsed.
    Returns "" for titles that are all punctuation; callers treat such
    records as non-deduplicatable (exact-id matching only).
    """
    if not raw:
        raise ValidationError("title must be non-empty")
    folded = unicodedata.normalize("NFKD", raw)
    folded = "".join(ch for ch in folded if not unicodedata.combining(ch))
    folded = folded.lower()
    cleaned = "".join(ch if ch.isalnum() else " " for ch in folded)
    return " ".join(cleaned.split())


class ScreeningMode(str, Enum):
    STRICT = "strict"
    RELAXED = "relaxed"


class CriterionKind(str, Enum):
    INCLUSION = "inclusion"
    EXCLUSION = "exclusion"


class Verdict(str, Enum):
    INCLUDE = "include"
    MAYBE = "maybe"
    EXCLUDE = "exclude"


class CriterionAnswer(str, Enum):
    YES = "yes"
    NO = "no"
    UNANSWERED = "unanswered"


class DecisionOrigin(str, Enum):
    MANUAL = "manual"
    CLASSIFIER = "classifier"
    QA = "qa"


# Reserved reviewer identities for machine-written decisions.
SEED_REVIEWER = "seed-import"
CLASSIFIER_REVIEWER = "classifier"


@dataclass(frozen=True)
class PaperRecord:
    """One deduplicated candidate study with provenance from >=1 sources."""

    id: str
    title: str
    sources: frozenset[str]
    external_ids: dict[str, str] = field(default_factory=dict)
    abstract: Optional[str] = None
    authors: tuple[str, ...] = ()
    venue: Optional[str] = None
    year: Optional[int] = None
    url: Optional[str] = None
    is_seed: bool = False
    retrieved_at: datetime = field(default_factory=utcnow)

    def __post_init__(self):
        if not self.id:
            raise ValidationError("paper id must be non-empty")
        if not self.title or not self.title.strip():
            raise ValidationError("title must be non-empty")
        if self.year is not None:
            upper = utcnow().year + 1
            if not (YEAR_MIN <= self.year <= upper):
                raise ValidationError(
                    f"year {self.year} outside [{YEAR_MIN}, {upper}]",
                    {"year": self.year},
                )
        if not self.sources:
            raise ValidationError("sources must be non-empty")
        if self.is_seed and "seed" not in self.sources:
            raise ValidationError('seed records must carry the "seed" source tag')
        doi = self.external_ids.get("doi")
        if doi is not None:
            normalized = normalize_doi(doi)
            if not normalized:
                ids = dict(self.external_ids)
                del ids["doi"]
                object.__setattr__(self, "external_ids", ids)
            elif normalized != doi:
                ids = dict(self.external_ids)
                ids["doi"] = normalized
                object.__setattr__(self, "external_ids", ids)

    @property
    def doi(self) -> Optional[str]:
        return self.external_ids.get("doi")

    @staticmethod
    def new_id() -> str:
        return uuid.uuid4().hex


@dataclass(frozen=True)
class EligibilityCriterion:
    criterion_id: str
    kind: CriterionKind
    text: str

    def __post_init__(self):
        if not self.text or not self.text.strip():
            raise ValidationError("criterion text must be non-empty")
        if not self.criterion_id:
            raise ValidationError("criterion_id must be non-empty")


@dataclass(frozen=True)
class ReviewProtocol:
    review_id: str
    title: str
    queries: tuple[str, ...]
    connectors: tuple[str, ...]
    description: str = ""
    criteria: tuple[EligibilityCriterion, ...] = ()
    top_n: int = 500
    mode: ScreeningMode = ScreeningMode.RELAXED
    prior_knowledge_enabled: bool = False
    last_search_year: Optional[int] = None

    def __post_init__(self):
        if not self.title or not self.title.strip():
            raise ValidationError("review title must be non-empty")
        if not any(q.strip() for q in self.queries):
            raise ValidationError("at least one non-empty search query is required")
        if not self.connectors:
            raise ValidationError("at least one connector must be selected")
        if self.top_n < 1:
            raise ValidationError("top_n must be >= 1")
        ids = [c.criterion_id for c in self.criteria]
        if len(ids) != len(set(ids)):
            raise ValidationError("criterion ids must be unique within a protocol")

    def criterion_ids(self) -> set[str]:
        return {c.criterion_id for c in self.criteria}


@dataclass(frozen=True)
class ScreeningDecision:
    """An include/maybe/exclude verdict by a human or a model."""

    paper_id: str
    reviewer_id: str
    main: Verdict
    criterion_answers: dict[str, CriterionAnswer] = field(default_factory=dict)
    knew_paper: Optional[bool] = None
    knew_authors: Optional[bool] = None
    origin: DecisionOrigin = DecisionOrigin.MANUAL
    model_tag: Optional[str] = None
    decided_at: datetime = field(default_factory=utcnow)
    revision: int = 1

    def __post_init__(self):
        if self.origin is DecisionOrigin.MANUAL and self.model_tag is not None:
            raise ValidationError("manual decisions must not carry a model_tag")
        if self.origin is not DecisionOrigin.MANUAL and not self.model_tag:
            raise ValidationError(f"{self.origin.value} decisions require a model_tag")
        if self.revision < 1:
            raise ValidationError("revision must be >= 1")


@dataclass(frozen=True)
class CanonicalKey:
    """Dedup key: DOI dominates, then title+year, then title alone.

    `unkeyable` marks records that cannot be auto-merged (no DOI and a
    title that normalizes to nothing).
    """

    kind: str  # "doi" | "title_year" | "title" | "unkeyable"
    text: str = ""
    year: Optional[int] = None


UNKEYABLE = CanonicalKey(kind="unkeyable")


def canonical_key(record: PaperRecord) -> CanonicalKey:
    if record.doi:
        return CanonicalKey(kind="doi", text=record.doi)
    title = normalize_title(record.title)
    if not title:
        return UNKEYABLE
    if record.year is not None:
        return CanonicalKey(kind="title_year", text=title, year=record.year)
    return CanonicalKey(kind="title", text=title)
