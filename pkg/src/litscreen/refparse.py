"""RIS and BibTeX reference-file parsers.

Both parsers are pure and total over byte streams: syntactically broken
entries become rejection reasons, not exceptions. The only hard failure is
an unbalanced BibTeX brace, which raises ParseError with the offset.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime

from litscreen.catalog import PaperRecord, YEAR_MIN, utcnow
from litscreen.errors import ParseError, ValidationError

_RIS_TAG = re.compile(r"^([A-Z][A-Z0-9])\s+-\s?(.*)$")
_YEAR_PREFIX = re.compile(r"^\s*(\d{4})")

# entry types that produce records; @comment/@string/@preamble are skipped
_BIB_ENTRY_TYPES = {"article", "inproceedings", "book", "misc"}
_BIB_NON_ENTRIES = {"comment", "string", "preamble"}


@dataclass
class ParsedRefs:
    records: list[PaperRecord] = field(default_factory=list)
    rejected: list[tuple[int, str]] = field(default_factory=list)  # (entry index, reason)

    @property
    def total(self) -> int:
        return len(self.records) + len(self.rejected)


def _year_from(value: str | None) -> int | None:
    if not value:
        return None
    m = _YEAR_PREFIX.match(value)
    if not m:
        return None
    year = int(m.group(1))
    if not (YEAR_MIN <= year <= utcnow().year + 1):
        return None
    return year


def _decode(payload: bytes) -> str:
    try:
        return payload.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise ValidationError(f"payload is not valid UTF-8: {exc}") from exc


def parse_ris(payload: bytes, *, retrieved_at: datetime | None = None) -> ParsedRefs:
    """Parse RIS entries into paper records.

    Tag mapping: TI/T1 title, AB/N2 abstract, AU authors (repeated),
    PY/Y1 year (first 4-digit prefix), JO/JF/T2 venue, DO doi, UR url.
    Entries end at "ER  -"; malformed tag lines are skipped.
    """
    text = _decode(payload)
    when = retrieved_at or utcnow()
    out = ParsedRefs()
    tags: dict[str, list[str]] = {}
    entry_index = 0

    def first(*names: str) -> str | None:
        for name in names:
            values = tags.get(name)
            if values and values[0].strip():
                return values[0].strip()
        return None

    def finalize():
        nonlocal tags, entry_index
        if not tags:
            return
        title = first("TI", "T1")
        if not title:
            out.rejected.append((entry_index, "missing title tag"))
        else:
            external_ids = {}
            doi = first("DO")
            if doi:
                external_ids["doi"] = doi
            out.records.append(
                PaperRecord(
                    id=PaperRecord.new_id(),
                    title=title,
                    abstract=first("AB", "N2"),
                    authors=tuple(a.strip() for a in tags.get("AU", []) if a.strip()),
                    venue=first("JO", "JF", "T2"),
                    year=_year_from(first("PY", "Y1")),
                    url=first("UR"),
                    external_ids=external_ids,
                    sources=frozenset({"ris"}),
                    retrieved_at=when,
                )
            )
        entry_index += 1
        tags = {}

    for line in text.splitlines():
        m = _RIS_TAG.match(line.rstrip())
        if not m:
            continue  # malformed tag line inside or between entries
        tag, value = m.group(1), m.group(2)
        if tag == "ER":
            finalize()
        else:
            tags.setdefault(tag, []).append(value)
    finalize()  # tolerate a trailing entry without ER
    return out


class _BibScanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def eof(self) -> bool:
        return self.pos >= len(self.text)

    def skip_ws(self):
        while not self.eof() and self.text[self.pos].isspace():
            self.pos += 1

    def take_word(self) -> str:
        start = self.pos
        while not self.eof() and (self.text[self.pos].isalnum() or self.text[self.pos] in "_-"):
            self.pos += 1
        return self.text[start : self.pos]

    def expect(self, ch: str):
        if self.eof() or self.text[self.pos] != ch:
            raise ParseError(
                f"expected {ch!r} at offset {self.pos}", {"offset": self.pos}
            )
        self.pos += 1

    def braced_value(self) -> str:
        """Read a {...} value; outer braces stripped, nested ones preserved."""
        opening = self.pos
        self.expect("{")
        depth = 1
        start = self.pos
        while not self.eof():
            ch = self.text[self.pos]
            if ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    value = self.text[start : self.pos]
                    self.pos += 1
                    return value
            self.pos += 1
        raise ParseError(
            f"unbalanced brace opened at offset {opening}", {"offset": opening}
        )

    def quoted_value(self) -> str:
        opening = self.pos
        self.expect('"')
        depth = 0
        start = self.pos
        while not self.eof():
            ch = self.text[self.pos]
            if ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
            elif ch == '"' and depth == 0:
                value = self.text[start : self.pos]
                self.pos += 1
                return value
            self.pos += 1
        raise ParseError(
            f"unterminated quoted value opened at offset {opening}", {"offset": opening}
        )

    def bare_value(self) -> str:
        start = self.pos
        while not self.eof() and self.text[self.pos] not in ",}":
            self.pos += 1
        return self.text[start : self.pos].strip()


def _collapse_ws(value: str) -> str:
    return " ".join(value.split())


def parse_bibtex(payload: bytes, *, retrieved_at: datetime | None = None) -> ParsedRefs:
    """Parse @article/@inproceedings/@book/@misc entries into paper records.

    Brace and quote delimiters are both accepted; " and " splits authors;
    journal or booktitle maps to venue. Unsupported entry types are
    rejected with a reason.
    """
    text = _decode(payload)
    when = retrieved_at or utcnow()
    out = ParsedRefs()
    sc = _BibScanner(text)
    entry_index = 0

    while True:
        at = text.find("@", sc.pos)
        if at == -1:
            break
        sc.pos = at + 1
        entry_type = sc.take_word().lower()
        sc.skip_ws()
        if sc.eof() or text[sc.pos] != "{":
            continue  # stray @ in prose
        if entry_type in _BIB_NON_ENTRIES:
            sc.braced_value()
            continue

        sc.expect("{")
        fields: dict[str, str] = {}
        # citation key (may be empty)
        start = sc.pos
        while not sc.eof() and text[sc.pos] not in ",}":
            sc.pos += 1
        cite_key = text[start : sc.pos].strip()
        while True:
            sc.skip_ws()
            if sc.eof():
                raise ParseError(
                    f"unbalanced entry opened at offset {at}", {"offset": at}
                )
            ch = text[sc.pos]
            if ch == "}":
                sc.pos += 1
                break
            if ch == ",":
                sc.pos += 1
                continue
            name = sc.take_word().lower()
            sc.skip_ws()
            sc.expect("=")
            sc.skip_ws()
            nxt = text[sc.pos] if not sc.eof() else ""
            if nxt == "{":
                value = sc.braced_value()
            elif nxt == '"':
                value = sc.quoted_value()
            else:
                value = sc.bare_value()
            if name:
                fields[name] = _collapse_ws(value)

        if entry_type not in _BIB_ENTRY_TYPES:
            out.rejected.append((entry_index, f"unsupported entry type @{entry_type}"))
            entry_index += 1
            continue
        title = fields.get("title", "").strip()
        if not title:
            out.rejected.append((entry_index, f"entry {cite_key or '?'} has no title"))
            entry_index += 1
            continue
        authors = tuple(
            a.strip() for a in fields.get("author", "").split(" and ") if a.strip()
        )
        external_ids = {}
        if fields.get("doi", "").strip():
            external_ids["doi"] = fields["doi"].strip()
        out.records.append(
            PaperRecord(
                id=PaperRecord.new_id(),
                title=title,
                abstract=fields.get("abstract") or None,
                authors=authors,
                venue=fields.get("journal") or fields.get("booktitle") or None,
                year=_year_from(fields.get("year")),
                url=fields.get("url") or None,
                external_ids=external_ids,
                sources=frozenset({"bib"}),
                retrieved_at=when,
            )
        )
        entry_index += 1
    return out
