"""Shared builders for tests: records, protocols, and the dedup fixture."""

from __future__ import annotations

from datetime import datetime, timedelta, timezone

from litscreen.catalog import (
    CriterionKind,
    EligibilityCriterion,
    PaperRecord,
    ReviewProtocol,
    ScreeningMode,
)

T0 = datetime(2024, 3, 1, 12, 0, 0, tzinfo=timezone.utc)


def make_record(
    id: str,
    title: str,
    *,
    year: int | None = None,
    doi: str | None = None,
    abstract: str | None = None,
    authors: tuple[str, ...] = (),
    venue: str | None = None,
    url: str | None = None,
    sources: frozenset[str] = frozenset({"test"}),
    is_seed: bool = False,
    offset_seconds: int = 0,
) -> PaperRecord:
    external_ids = {"doi": doi} if doi else {}
    return PaperRecord(
        id=id,
        title=title,
        abstract=abstract,
        authors=authors,
        venue=venue,
        year=year,
        url=url,
        external_ids=external_ids,
        sources=sources | ({"seed"} if is_seed else frozenset()),
        is_seed=is_seed,
        retrieved_at=T0 + timedelta(seconds=offset_seconds),
    )


def make_protocol(
    review_id: str = "rev1",
    *,
    queries: tuple[str, ...] = ("citation screening",),
    connectors: tuple[str, ...] = ("stub",),
    criteria: tuple[EligibilityCriterion, ...] = (),
    mode: ScreeningMode = ScreeningMode.RELAXED,
    top_n: int = 500,
    prior_knowledge_enabled: bool = False,
    last_search_year: int | None = None,
) -> ReviewProtocol:
    return ReviewProtocol(
        review_id=review_id,
        title="Test review",
        description="fixture protocol",
        queries=queries,
        criteria=criteria,
        connectors=connectors,
        top_n=top_n,
        mode=mode,
        prior_knowledge_enabled=prior_knowledge_enabled,
        last_search_year=last_search_year,
    )


def criteria_pair() -> tuple[EligibilityCriterion, EligibilityCriterion]:
    return (
        EligibilityCriterion("c1", CriterionKind.INCLUSION, "Does the study screen citations?"),
        EligibilityCriterion("c2", CriterionKind.EXCLUSION, "Is the study an opinion piece?"),
    )


# -- 50-record hand-labeled dedup fixture -------------------------------------
#
# 38 unique papers, 12 planted duplicate pairs:
#   4 matched by DOI (titles/years may differ),
#   4 matched by exact normalized title + year,
#   4 matched by trigram similarity >= 0.90 with equal years.
# Every fuzzy pair shares its first title token, so blocking and the
# exhaustive oracle agree. Expected duplicate pairs are returned alongside.

_DOI_PAIRS = [
    (
        ("Neural ranking models for academic search", 2019, "10.1000/nr.001"),
        ("Neural Ranking Models for Academic Search (extended report)", 2020, "10.1000/NR.001"),
    ),
    (
        ("Transfer learning for abstract triage", 2018, "10.1000/tl.002"),
        ("Transfer learning for abstract triage: a replication study", 2018, "https://doi.org/10.1000/tl.002"),
    ),
    (
        ("Query expansion heuristics in medical retrieval", 2016, "10.1234/qe.017"),
        ("Query expansion heuristics in MEDICAL retrieval", 2016, "10.1234/qe.017"),
    ),
    (
        ("Weak supervision for study selection", 2022, "10.5555/ws.009"),
        ("Weak supervision for study selection", 2022, "doi:10.5555/ws.009"),
    ),
]

_TITLE_YEAR_PAIRS = [
    (
        ("A survey of active learning for document screening.", 2020),
        ("A Survey of Active Learning for Document Screening", 2020),
    ),
    (
        ("Crowdsourcing eligibility judgments: lessons learned", 2017),
        ("Crowdsourcing Eligibility Judgments -- Lessons Learned", 2017),
    ),
    (
        ("Über-Netze für die Literaturrecherche", 2021),
        ("Uber Netze fur die Literaturrecherche", 2021),
    ),
    (
        ("Boolean queries revisited (2nd edition)", 2015),
        ("Boolean queries revisited 2nd edition", 2015),
    ),
]

_FUZZY_PAIRS = [
    (
        ("Automated citation screening with transformer language models in biomedical systematic reviews", 2023),
        ("Automated citation screening with transformer language model in biomedical systematic reviews", 2023),
    ),
    (
        ("Federated metadata harmonization across scholarly databases improves recall of grey literature", 2021),
        ("Federated metadata harmonisation across scholarly databases improves recall of grey literature", 2021),
    ),
    (
        ("Screening fatigue and annotation quality in large scale evidence synthesis projects", 2019),
        ("Screening fatigue and annotations quality in large scale evidence synthesis projects", 2019),
    ),
    (
        ("Incremental reranking strategies for living systematic review maintenance workflows", 2022),
        ("Incremental re-ranking strategies for living systematic review maintenance workflows", 2022),
    ),
]

_SINGLES = [
    ("Graph embeddings of citation networks", 2014),
    ("Dense retrieval beats sparse baselines on biomedical corpora", 2021),
    ("Reproducibility of search strategies in umbrella reviews", 2018),
    ("Calibrating stopping rules for technology assisted review", 2020),
    ("Annotator disagreement as a signal in relevance labeling", 2016),
    ("Cheap talk: crowd workers and gold questions", 2015),
    ("Prompt sensitivity of instruction tuned answering systems", 2023),
    ("Entity linking errors propagate into evidence maps", 2019),
    ("Snowballing versus database search: an empirical comparison", 2013),
    ("Multilingual abstracts and the anglophone bias of screening tools", 2022),
    ("On the shelf life of search snapshots", 2021),
    ("Deduplication of preprint and journal versions", 2020),
    ("Identical titles, different papers: a cautionary tale", 2019),
    ("Identical titles, different papers: a cautionary tale", 2021),  # same title, other year: NOT a dup
    ("Benchmark leakage in screening datasets", 2023),
    ("Gold standards are made of brass", 2017),
    ("Sampling strategies for validation of automated exclusion", 2018),
    ("An ontology of reasons for exclusion", 2012),
    ("Human-in-the-loop thresholds for recall targets", 2022),
    ("Protocol drift in long running reviews", 2016),
    ("The half-life of empirical findings in software engineering", 2015),
    ("Title-only screening: how much abstract do we need", 2020),
    ("Stratified estimation of missed studies", 2014),
    ("Yearless working paper on triage economics", None),
    ("!!!", None),  # unkeyable: never auto-merged
    ("Keyword drift across database thesauri", 2011),
]


def dedup_fixture() -> tuple[list[PaperRecord], list[tuple[str, str]]]:
    """(50 records, expected duplicate id pairs)."""
    records: list[PaperRecord] = []
    pairs: list[tuple[str, str]] = []
    idx = 0

    def add(title, year, doi=None):
        nonlocal idx
        record = make_record(
            f"r{idx:02d}",
            title,
            year=year,
            doi=doi,
            sources=frozenset({f"src{idx % 3}"}),
            offset_seconds=idx,
        )
        records.append(record)
        idx += 1
        return record.id

    for (t1, y1, d1), (t2, y2, d2) in _DOI_PAIRS:
        pairs.append((add(t1, y1, d1), add(t2, y2, d2)))
    for (t1, y1), (t2, y2) in _TITLE_YEAR_PAIRS:
        pairs.append((add(t1, y1), add(t2, y2)))
    for (t1, y1), (t2, y2) in _FUZZY_PAIRS:
        pairs.append((add(t1, y1), add(t2, y2)))
    for title, year in _SINGLES:
        add(title, year)
    assert len(records) == 50
    return records, pairs
