"""Batch and cross-corpus deduplication of paper records.

Duplicate criterion: equal DOIs, equal normalized title + year, or
trigram-Jaccard similarity of normalized titles above a configurable
threshold when the years agree (or are both absent). Batches are clustered
by single linkage; clusters whose members disagree on DOI are split at the
DOI boundary rather than merged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from litscreen.catalog import CanonicalKey, PaperRecord, canonical_key, normalize_title

DEFAULT_TRIGRAM_THRESHOLD = 0.90


@dataclass
class MergeReport:
    input_count: int = 0
    unique_count: int = 0
    merged_groups: list[tuple[str, list[str]]] = field(default_factory=list)
    fuzzy_matches: int = 0
    doi_splits: int = 0
    corpus_suppressed: int = 0


def title_trigrams(normalized: str) -> frozenset[str]:
    if not normalized:
        return frozenset()
    if len(normalized) < 3:
        return frozenset({normalized})
    return frozenset(normalized[i : i + 3] for i in range(len(normalized) - 2))


def trigram_jaccard(a: str, b: str) -> float:
    ga, gb = title_trigrams(a), title_trigrams(b)
    if not ga or not gb:
        return 0.0
    union = len(ga | gb)
    return len(ga & gb) / union if union else 0.0


def is_duplicate(
    a: PaperRecord, b: PaperRecord, *, threshold: float = DEFAULT_TRIGRAM_THRESHOLD
) -> bool:
    """Symmetric duplicate test; total over valid records.

    Records with no DOI and an empty normalized title are unkeyable and
    match nothing.
    """
    if a.doi and b.doi and a.doi == b.doi:
        return True
    ta, tb = normalize_title(a.title), normalize_title(b.title)
    if not ta or not tb:
        return False
    if a.year is not None and b.year is not None and a.year == b.year and ta == tb:
        return True
    # a.year == b.year also covers "both absent"
    if a.year == b.year and trigram_jaccard(ta, tb) >= threshold:
        return True
    return False


def _first_nonempty(values) -> str | None:
    for v in values:
        if v is not None and str(v).strip():
            return v
    return None


def merge_records(group: list[PaperRecord]) -> PaperRecord:
    """Collapse a duplicate cluster into one record.

    Survivor keeps the id of the earliest-retrieved member; longest title
    and longest non-empty abstract win; external ids and source tags are
    unioned; the earliest year is kept on conflict. Deterministic for any
    input ordering (ties broken by id).
    """
    if not group:
        raise ValueError("merge_records requires a non-empty group")
    ordered = sorted(group, key=lambda r: (r.retrieved_at, r.id))
    survivor = ordered[0]
    if len(ordered) == 1:
        return survivor

    title = max(ordered, key=lambda r: len(r.title)).title
    abstracts = [r.abstract for r in ordered if r.abstract and r.abstract.strip()]
    abstract = max(abstracts, key=len) if abstracts else None
    external_ids: dict[str, str] = {}
    for r in ordered:
        for k, v in r.external_ids.items():
            external_ids.setdefault(k, v)
    sources = frozenset().union(*(r.sources for r in ordered))
    years = [r.year for r in ordered if r.year is not None]
    year = min(years) if years else None
    return PaperRecord(
        id=survivor.id,
        title=title,
        abstract=abstract,
        authors=_first_nonempty([r.authors for r in ordered if r.authors]) or (),
        venue=_first_nonempty([r.venue for r in ordered]),
        year=year,
        url=_first_nonempty([r.url for r in ordered]),
        external_ids=external_ids,
        sources=sources,
        is_seed=any(r.is_seed for r in ordered),
        retrieved_at=survivor.retrieved_at,
    )


def split_on_doi_conflict(cluster: list[PaperRecord]) -> list[list[PaperRecord]]:
    """Split a cluster whose members carry conflicting DOIs.

    One subgroup per distinct DOI; members without a DOI form their own
    subgroup (attaching them to either DOI risks wrong attribution).
    """
    dois = {r.doi for r in cluster if r.doi}
    if len(dois) <= 1:
        return [cluster]
    by_doi: dict[str | None, list[PaperRecord]] = {}
    for r in cluster:
        by_doi.setdefault(r.doi, []).append(r)
    ordered_keys = sorted(by_doi, key=lambda d: (d is None, d or ""))
    return [by_doi[k] for k in ordered_keys]


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int) -> bool:
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return False
        if rj < ri:
            ri, rj = rj, ri
        self.parent[rj] = ri
        return True


def _record_keys(record: PaperRecord) -> list[CanonicalKey]:
    key = canonical_key(record)
    return [] if key.kind == "unkeyable" else [key]


def dedup_batch(
    batch: list[PaperRecord],
    corpus_keys: set[CanonicalKey],
    *,
    threshold: float = DEFAULT_TRIGRAM_THRESHOLD,
    blocking: bool = True,
) -> tuple[list[PaperRecord], MergeReport]:
    """Deduplicate a batch internally, then against the persisted corpus.

    Single-linkage clustering over `is_duplicate`; exact DOI / title-year /
    title matches are unioned via hash lookups, the trigram stage compares
    only pairs sharing a year bucket and first title token when `blocking`
    is on. Merged clusters whose canonical keys collide with `corpus_keys`
    are dropped and counted as suppressed.
    """
    report = MergeReport(input_count=len(batch))
    if not batch:
        return [], report

    uf = _UnionFind(len(batch))
    norm_titles = [normalize_title(r.title) for r in batch]

    by_doi: dict[str, int] = {}
    by_title_year: dict[tuple[str, int], int] = {}
    by_title_only: dict[str, int] = {}
    for i, r in enumerate(batch):
        if r.doi:
            if r.doi in by_doi:
                uf.union(by_doi[r.doi], i)
            else:
                by_doi[r.doi] = i
        if not norm_titles[i]:
            continue
        if r.year is not None:
            tk = (norm_titles[i], r.year)
            if tk in by_title_year:
                uf.union(by_title_year[tk], i)
            else:
                by_title_year[tk] = i
        else:
            if norm_titles[i] in by_title_only:
                uf.union(by_title_only[norm_titles[i]], i)
            else:
                by_title_only[norm_titles[i]] = i

    # Fuzzy stage: trigram similarity within (year, first-token) blocks.
    blocks: dict[tuple[int | None, str], list[int]] = {}
    for i, r in enumerate(batch):
        if not norm_titles[i]:
            continue
        token = norm_titles[i].split(" ", 1)[0] if blocking else ""
        blocks.setdefault((r.year, token), []).append(i)
    for members in blocks.values():
        if len(members) < 2:
            continue
        for x in range(len(members)):
            i = members[x]
            for y in range(x + 1, len(members)):
                j = members[y]
                if uf.find(i) == uf.find(j):
                    continue
                if trigram_jaccard(norm_titles[i], norm_titles[j]) >= threshold:
                    uf.union(i, j)
                    report.fuzzy_matches += 1

    clusters: dict[int, list[int]] = {}
    for i in range(len(batch)):
        clusters.setdefault(uf.find(i), []).append(i)

    merged: list[tuple[int, PaperRecord, list[PaperRecord]]] = []
    for root in sorted(clusters, key=lambda r: min(clusters[r])):
        members = [batch[i] for i in clusters[root]]
        subgroups = split_on_doi_conflict(members)
        if len(subgroups) > 1:
            report.doi_splits += 1
        for sub in subgroups:
            first_idx = min(clusters[root])
            record = merge_records(sub)
            merged.append((first_idx, record, sub))
            if len(sub) > 1:
                absorbed = sorted(r.id for r in sub if r.id != record.id)
                report.merged_groups.append((record.id, absorbed))

    merged.sort(key=lambda item: (item[0], item[1].id))
    report.unique_count = len(merged)

    fresh: list[PaperRecord] = []
    for _, record, sub in merged:
        keys = _record_keys(record)
        for member in sub:
            keys.extend(_record_keys(member))
        if any(k in corpus_keys for k in keys):
            report.corpus_suppressed += 1
        else:
            fresh.append(record)
    return fresh, report
