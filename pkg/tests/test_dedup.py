"""Dedup engine against the exhaustive pairwise oracle."""

from __future__ import annotations

import random

import pytest

from litscreen.dedup import dedup_batch, is_duplicate, merge_records, trigram_jaccard
from litscreen.catalog import canonical_key

from helpers import dedup_fixture, make_record


def oracle_partition(records):
    """O(n^2) single-linkage clustering over is_duplicate."""
    parent = list(range(len(records)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(records)):
        for j in range(i + 1, len(records)):
            if is_duplicate(records[i], records[j]):
                parent[find(i)] = find(j)
    clusters: dict[int, set[str]] = {}
    for i, record in enumerate(records):
        clusters.setdefault(find(i), set()).add(record.id)
    return {frozenset(members) for members in clusters.values()}


def result_partition(batch, report):
    grouped: set[str] = set()
    clusters = set()
    for survivor, absorbed in report.merged_groups:
        members = frozenset([survivor, *absorbed])
        grouped |= members
        clusters.add(members)
    for record in batch:
        if record.id not in grouped:
            clusters.add(frozenset([record.id]))
    return clusters


class TestIsDuplicate:
    def test_same_doi_different_titles(self):
        a = make_record("a", "Completely different title", year=2001, doi="10.1/x")
        b = make_record("b", "Another thing entirely", year=2009, doi="10.1/X")
        assert is_duplicate(a, b)

    def test_title_year_normalization_equality(self):
        a = make_record("a", "A survey of X.", year=2020)
        b = make_record("b", "A Survey of X", year=2020)
        assert is_duplicate(a, b)

    def test_identical_titles_different_years(self):
        a = make_record("a", "Same title here", year=2019)
        b = make_record("b", "Same title here", year=2021)
        assert not is_duplicate(a, b)

    def test_year_present_vs_absent_never_matches(self):
        a = make_record("a", "Same title here", year=2019)
        b = make_record("b", "Same title here")
        assert not is_duplicate(a, b)

    def test_symmetric(self):
        records, _ = dedup_fixture()
        sample = records[:20]
        for a in sample:
            for b in sample:
                assert is_duplicate(a, b) == is_duplicate(b, a)

    def test_unkeyable_matches_nothing(self):
        junk = make_record("a", "!!!")
        other = make_record("b", "???")
        assert not is_duplicate(junk, other)
        assert not is_duplicate(junk, junk)


class TestTrigramJaccard:
    def test_identical(self):
        assert trigram_jaccard("abc def", "abc def") == 1.0

    def test_disjoint(self):
        assert trigram_jaccard("aaaa", "bbbb") == 0.0

    def test_short_strings_compared_whole(self):
        assert trigram_jaccard("ab", "ab") == 1.0
        assert trigram_jaccard("ab", "ba") == 0.0


class TestMergeRecords:
    def test_group_of_one_is_identity(self):
        record = make_record("a", "Solo", year=2020)
        assert merge_records([record]) == record

    def test_union_policy(self):
        a = make_record("a", "Short title", year=2021, doi="10.1/m", offset_seconds=0)
        b = make_record(
            "b",
            "Short title but longer",
            year=2020,
            abstract="An abstract.",
            sources=frozenset({"other"}),
            offset_seconds=5,
        )
        merged = merge_records([a, b])
        assert merged.id == "a"  # earliest retrieved survives
        assert merged.title == "Short title but longer"  # longest title wins
        assert merged.abstract == "An abstract."
        assert merged.year == 2020  # earliest year on conflict
        assert merged.sources == frozenset({"test", "other"})
        assert merged.doi == "10.1/m"

    def test_seed_flag_is_or(self):
        a = make_record("a", "Seeded", year=2020, is_seed=True, offset_seconds=0)
        b = make_record("b", "Seeded", year=2020, offset_seconds=1)
        assert merge_records([a, b]).is_seed

    def test_permutation_invariance(self):
        base = [
            make_record("a", "Title one", year=2020, abstract="x" * 10, offset_seconds=3),
            make_record("b", "Title one extended", year=2020, offset_seconds=1),
            make_record("c", "Title one", year=2019, abstract="y" * 20, offset_seconds=2),
        ]
        reference = merge_records(list(base))
        rng = random.Random(7)
        for _ in range(10):
            shuffled = list(base)
            rng.shuffle(shuffled)
            assert merge_records(shuffled) == reference


class TestDedupBatch:
    def test_empty_batch(self):
        fresh, report = dedup_batch([], set())
        assert fresh == [] and report.input_count == 0 and report.unique_count == 0

    def test_three_copies_one_record(self):
        copies = [
            make_record(f"c{i}", "Thrice seen paper", year=2020,
                        sources=frozenset({f"s{i}"}), offset_seconds=i)
            for i in range(3)
        ]
        fresh, report = dedup_batch(copies, set())
        assert len(fresh) == 1
        assert fresh[0].sources == frozenset({"s0", "s1", "s2"})
        assert report.unique_count == 1

    def test_fixture_matches_oracle_exactly(self):
        records, pairs = dedup_fixture()
        fresh, report = dedup_batch(records, set())
        assert len(fresh) == 38
        expected = oracle_partition(records)
        assert result_partition(records, report) == expected
        # the planted pairs are exactly the multi-member clusters
        assert {frozenset(p) for p in pairs} == {c for c in expected if len(c) > 1}

    def test_merge_report_conservation(self):
        records, _ = dedup_fixture()
        _, report = dedup_batch(records, set())
        absorbed = sum(len(ids) for _, ids in report.merged_groups)
        assert report.unique_count + absorbed == report.input_count == 50

    def test_order_invariance(self):
        records, _ = dedup_fixture()
        fresh_ref, _ = dedup_batch(records, set())
        reference = {r.id: r for r in fresh_ref}
        rng = random.Random(13)
        for _ in range(5):
            shuffled = list(records)
            rng.shuffle(shuffled)
            fresh, _ = dedup_batch(shuffled, set())
            assert {r.id: r for r in fresh} == reference

    def test_idempotence(self):
        records, _ = dedup_fixture()
        once, _ = dedup_batch(records, set())
        twice, report = dedup_batch(once, set())
        assert sorted(r.id for r in twice) == sorted(r.id for r in once)
        assert not report.merged_groups

    def test_source_conservation(self):
        records, _ = dedup_fixture()
        fresh, _ = dedup_batch(records, set())
        inputs = sorted(tag for r in records for tag in r.sources)
        # sources are sets per record; every input tag must survive somewhere
        survived = set().union(*(r.sources for r in fresh))
        assert survived == set(inputs)

    def test_corpus_suppression(self):
        records, _ = dedup_fixture()
        fresh, _ = dedup_batch(records, set())
        corpus_keys = {canonical_key(r) for r in fresh if canonical_key(r).kind != "unkeyable"}
        fresh2, report2 = dedup_batch(records, corpus_keys)
        # the only survivor is the unkeyable record, which can never collide
        assert [r.title for r in fresh2] == ["!!!"]
        assert report2.corpus_suppressed == 37

    def test_doi_conflict_split(self):
        a = make_record("a", "One shared long title for conflict", year=2020,
                        doi="10.1/a", offset_seconds=0)
        b = make_record("b", "One shared long title for conflict", year=2020,
                        doi="10.1/b", offset_seconds=1)
        c = make_record("c", "One shared long title for conflict", year=2020,
                        offset_seconds=2)
        fresh, report = dedup_batch([a, b, c], set())
        assert len(fresh) == 3  # split at the DOI boundary, DOI-less alone
        assert report.doi_splits == 1
        assert {r.doi for r in fresh} == {"10.1/a", "10.1/b", None}
