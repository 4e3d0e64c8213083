"""Domain model: normalization, canonical keys, record invariants."""

from __future__ import annotations

import re
import unicodedata

import pytest
from hypothesis import given, strategies as st

from litscreen.catalog import (
    CanonicalKey,
    PaperRecord,
    ScreeningDecision,
    UNKEYABLE,
    Verdict,
    DecisionOrigin,
    canonical_key,
    normalize_doi,
    normalize_title,
)
from litscreen.errors import ValidationError

from helpers import make_record


class TestNormalizeTitle:
    def test_case_space_punct_folding(self):
        assert normalize_title("Deep   Learning!") == "deep learning"

    def test_dash_and_colon_removed(self):
        assert normalize_title("CRUISE–Screening: A Tool") == "cruise screening a tool"

    def test_unicode_compatibility_fold(self):
        # independent oracle: NFKD + ascii-ignore + regex cleanup
        raw = "Über-Netze (2020)"
        folded = unicodedata.normalize("NFKD", raw).encode("ascii", "ignore").decode()
        expected = re.sub(r"\s+", " ", re.sub(r"[^0-9a-z]+", " ", folded.lower())).strip()
        assert normalize_title(raw) == expected == "uber netze 2020"

    def test_empty_input_rejected(self):
        with pytest.raises(ValidationError):
            normalize_title("")

    def test_all_punctuation_normalizes_to_empty(self):
        assert normalize_title("!!!") == ""

    @given(st.text(min_size=1, max_size=80))
    def test_idempotent(self, raw):
        once = normalize_title(raw)
        if once:
            assert normalize_title(once) == once


class TestNormalizeDoi:
    @pytest.mark.parametrize(
        "raw,expected",
        [
            ("HTTPS://DOI.ORG/10.1/A", "10.1/a"),
            ("doi:10.1145/X", "10.1145/x"),
            ("http://dx.doi.org/10.99/zz", "10.99/zz"),
            ("10.5555/plain", "10.5555/plain"),
        ],
    )
    def test_prefix_strip_and_lowercase(self, raw, expected):
        assert normalize_doi(raw) == expected


class TestCanonicalKey:
    def test_doi_dominates(self):
        record = make_record("a", "Any Title At All", year=2021, doi="10.1145/X")
        assert canonical_key(record) == CanonicalKey(kind="doi", text="10.1145/x")

    def test_title_year_key(self):
        record = make_record("a", "A Study", year=2021)
        assert canonical_key(record) == CanonicalKey(kind="title_year", text="a study", year=2021)

    def test_title_only_key(self):
        record = make_record("a", "A Study")
        assert canonical_key(record) == CanonicalKey(kind="title", text="a study")

    def test_degenerate_title_unkeyable(self):
        record = make_record("a", "!!!")
        assert canonical_key(record) is UNKEYABLE

    def test_pure_function(self):
        r1 = make_record("a", "Same Thing", year=2020)
        r2 = make_record("a", "Same Thing", year=2020)
        assert canonical_key(r1) == canonical_key(r2)


class TestPaperRecord:
    def test_doi_normalized_at_construction(self):
        record = make_record("a", "T", doi="HTTPS://DOI.ORG/10.1/A")
        assert record.doi == "10.1/a"

    def test_empty_title_rejected(self):
        with pytest.raises(ValidationError):
            make_record("a", "   ")

    @pytest.mark.parametrize("year", [1499, 3000])
    def test_year_bounds(self, year):
        with pytest.raises(ValidationError):
            make_record("a", "T", year=year)

    def test_in_press_year_allowed(self):
        from litscreen.catalog import utcnow

        record = make_record("a", "T", year=utcnow().year + 1)
        assert record.year == utcnow().year + 1

    def test_empty_sources_rejected(self):
        with pytest.raises(ValidationError):
            PaperRecord(id="a", title="T", sources=frozenset())

    def test_seed_requires_seed_tag(self):
        with pytest.raises(ValidationError):
            PaperRecord(id="a", title="T", sources=frozenset({"pdf"}), is_seed=True)


class TestScreeningDecision:
    def test_manual_forbids_model_tag(self):
        with pytest.raises(ValidationError):
            ScreeningDecision(
                paper_id="p", reviewer_id="r", main=Verdict.INCLUDE, model_tag="x"
            )

    def test_machine_requires_model_tag(self):
        with pytest.raises(ValidationError):
            ScreeningDecision(
                paper_id="p",
                reviewer_id="r",
                main=Verdict.INCLUDE,
                origin=DecisionOrigin.CLASSIFIER,
            )
