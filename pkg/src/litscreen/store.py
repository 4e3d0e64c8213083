"""Durable storage for reviews, corpora, decisions, models and run reports.

SQLAlchemy Core over an embedded SQLite file by default; any relational
server reachable via a connection URL works the same way (PostgreSQL driver
ships as an optional extra). All multi-record mutations run in a single
transaction. Writers take a per-review advisory lock for the duration of a
search run, import or retrain.
"""

from __future__ import annotations

import base64
import json
import threading
import uuid
from contextlib import contextmanager
from datetime import datetime, timezone
from importlib import resources

import numpy as np
import sqlalchemy as sa

from litscreen.catalog import (
    CanonicalKey,
    CriterionAnswer,
    CriterionKind,
    DecisionOrigin,
    EligibilityCriterion,
    PaperRecord,
    ReviewProtocol,
    ScreeningDecision,
    ScreeningMode,
    Verdict,
    canonical_key,
    utcnow,
)
from litscreen.classifiers import TrainedClassifier, TrainingProvenance
from litscreen.errors import ConflictError, NotFoundError

SCHEMA_DIR = "migrations"


def _ts(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).isoformat()


def _parse_ts(text: str) -> datetime:
    return datetime.fromisoformat(text)


def _key_str(key: CanonicalKey) -> str:
    return json.dumps([key.kind, key.text, key.year])


def _key_from_str(text: str) -> CanonicalKey:
    kind, value, year = json.loads(text)
    return CanonicalKey(kind=kind, text=value, year=year)


class Store:
    def __init__(self, url: str, *, echo: bool = False):
        kwargs = {}
        if url.startswith("sqlite"):
            kwargs["connect_args"] = {"check_same_thread": False}
            if ":memory:" in url or url == "sqlite://":
                kwargs["poolclass"] = sa.pool.StaticPool
        self.engine = sa.create_engine(url, echo=echo, **kwargs)
        if url.startswith("sqlite"):
            sa.event.listen(self.engine, "connect", _sqlite_fk_pragma)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    # -- migrations ---------------------------------------------------

    def migrate(self) -> list[int]:
        """Apply pending migration files; returns the versions applied."""
        applied = []
        with self.engine.begin() as conn:
            conn.exec_driver_sql(
                "CREATE TABLE IF NOT EXISTS schema_migrations "
                "(version INTEGER PRIMARY KEY, applied_at TEXT NOT NULL)"
            )
            current = conn.exec_driver_sql(
                "SELECT COALESCE(MAX(version), 0) FROM schema_migrations"
            ).scalar_one()
            for version, sql in _migration_files():
                if version <= current:
                    continue
                for statement in sql.split(";"):
                    if statement.strip():
                        conn.exec_driver_sql(statement)
                conn.exec_driver_sql(
                    "INSERT INTO schema_migrations (version, applied_at) VALUES (?, ?)"
                    if self.engine.dialect.paramstyle == "qmark"
                    else "INSERT INTO schema_migrations (version, applied_at) VALUES (%s, %s)",
                    (version, _ts(utcnow())),
                )
                applied.append(version)
        return applied

    def schema_version(self) -> int:
        with self.engine.begin() as conn:
            try:
                return conn.exec_driver_sql(
                    "SELECT COALESCE(MAX(version), 0) FROM schema_migrations"
                ).scalar_one()
            except sa.exc.DBAPIError:
                return 0

    # -- locking ------------------------------------------------------

    @contextmanager
    def review_writer(self, review_id: str):
        """Advisory single-writer lock; hold for search runs, imports, retrains."""
        with self._locks_guard:
            lock = self._locks.setdefault(review_id, threading.Lock())
        with lock:
            yield

    # -- reviews ------------------------------------------------------

    def create_review(self, protocol: ReviewProtocol, *, created_at: datetime | None = None) -> None:
        with self.engine.begin() as conn:
            exists = conn.execute(
                sa.text("SELECT 1 FROM reviews WHERE review_id = :r"),
                {"r": protocol.review_id},
            ).first()
            if exists:
                raise ConflictError(f"review {protocol.review_id} already exists")
            conn.execute(sa.text(
                "INSERT INTO reviews (review_id, title, description, queries, criteria,"
                " connectors, top_n, mode, prior_knowledge_enabled, last_search_year, created_at)"
                " VALUES (:review_id, :title, :description, :queries, :criteria, :connectors,"
                " :top_n, :mode, :pke, :lsy, :created_at)"
            ), {
                "review_id": protocol.review_id,
                "title": protocol.title,
                "description": protocol.description,
                "queries": json.dumps(list(protocol.queries)),
                "criteria": json.dumps([
                    {"criterion_id": c.criterion_id, "kind": c.kind.value, "text": c.text}
                    for c in protocol.criteria
                ]),
                "connectors": json.dumps(list(protocol.connectors)),
                "top_n": protocol.top_n,
                "mode": protocol.mode.value,
                "pke": int(protocol.prior_knowledge_enabled),
                "lsy": protocol.last_search_year,
                "created_at": _ts(created_at or utcnow()),
            })

    def get_protocol(self, review_id: str) -> ReviewProtocol:
        with self.engine.begin() as conn:
            row = conn.execute(
                sa.text("SELECT * FROM reviews WHERE review_id = :r"), {"r": review_id}
            ).mappings().first()
        if row is None:
            raise NotFoundError(f"review {review_id} not found")
        return ReviewProtocol(
            review_id=row["review_id"],
            title=row["title"],
            description=row["description"],
            queries=tuple(json.loads(row["queries"])),
            criteria=tuple(
                EligibilityCriterion(
                    criterion_id=c["criterion_id"],
                    kind=CriterionKind(c["kind"]),
                    text=c["text"],
                )
                for c in json.loads(row["criteria"])
            ),
            connectors=tuple(json.loads(row["connectors"])),
            top_n=row["top_n"],
            mode=ScreeningMode(row["mode"]),
            prior_knowledge_enabled=bool(row["prior_knowledge_enabled"]),
            last_search_year=row["last_search_year"],
        )

    def review_exists(self, review_id: str) -> bool:
        with self.engine.begin() as conn:
            return conn.execute(
                sa.text("SELECT 1 FROM reviews WHERE review_id = :r"), {"r": review_id}
            ).first() is not None

    def update_protocol(self, protocol: ReviewProtocol) -> None:
        """Replace editable protocol fields; last_search_year stays monotone."""
        with self.engine.begin() as conn:
            row = conn.execute(
                sa.text("SELECT last_search_year FROM reviews WHERE review_id = :r"),
                {"r": protocol.review_id},
            ).first()
            if row is None:
                raise NotFoundError(f"review {protocol.review_id} not found")
            keep = row[0]
            if protocol.last_search_year is not None and (
                keep is None or protocol.last_search_year > keep
            ):
                keep = protocol.last_search_year
            conn.execute(sa.text(
                "UPDATE reviews SET title = :title, description = :description,"
                " queries = :queries, criteria = :criteria, connectors = :connectors,"
                " top_n = :top_n, mode = :mode, prior_knowledge_enabled = :pke,"
                " last_search_year = :lsy WHERE review_id = :review_id"
            ), {
                "review_id": protocol.review_id,
                "title": protocol.title,
                "description": protocol.description,
                "queries": json.dumps(list(protocol.queries)),
                "criteria": json.dumps([
                    {"criterion_id": c.criterion_id, "kind": c.kind.value, "text": c.text}
                    for c in protocol.criteria
                ]),
                "connectors": json.dumps(list(protocol.connectors)),
                "top_n": protocol.top_n,
                "mode": protocol.mode.value,
                "pke": int(protocol.prior_knowledge_enabled),
                "lsy": keep,
            })

    def set_last_search_year(self, review_id: str, year: int) -> None:
        with self.engine.begin() as conn:
            row = conn.execute(
                sa.text("SELECT last_search_year FROM reviews WHERE review_id = :r"),
                {"r": review_id},
            ).first()
            if row is None:
                raise NotFoundError(f"review {review_id} not found")
            if row[0] is None or year > row[0]:
                conn.execute(
                    sa.text("UPDATE reviews SET last_search_year = :y WHERE review_id = :r"),
                    {"y": year, "r": review_id},
                )

    def delete_review(self, review_id: str) -> None:
        with self.engine.begin() as conn:
            for table in ("qa_predictions", "classifiers", "search_runs", "decisions", "papers"):
                conn.execute(
                    sa.text(f"DELETE FROM {table} WHERE review_id = :r"), {"r": review_id}
                )
            conn.execute(sa.text("DELETE FROM reviews WHERE review_id = :r"), {"r": review_id})

    # -- papers -------------------------------------------------------

    def _record_params(self, review_id: str, position: int, record: PaperRecord) -> dict:
        return {
            "review_id": review_id,
            "paper_id": record.id,
            "position": position,
            "title": record.title,
            "abstract": record.abstract,
            "authors": json.dumps(list(record.authors)),
            "venue": record.venue,
            "year": record.year,
            "url": record.url,
            "external_ids": json.dumps(record.external_ids, sort_keys=True),
            "sources": json.dumps(sorted(record.sources)),
            "is_seed": int(record.is_seed),
            "retrieved_at": _ts(record.retrieved_at),
            "canonical_key": _key_str(canonical_key(record)),
        }

    @staticmethod
    def _row_record(row) -> PaperRecord:
        return PaperRecord(
            id=row["paper_id"],
            title=row["title"],
            abstract=row["abstract"],
            authors=tuple(json.loads(row["authors"])),
            venue=row["venue"],
            year=row["year"],
            url=row["url"],
            external_ids=json.loads(row["external_ids"]),
            sources=frozenset(json.loads(row["sources"])),
            is_seed=bool(row["is_seed"]),
            retrieved_at=_parse_ts(row["retrieved_at"]),
        )

    def upsert_papers(self, review_id: str, records: list[PaperRecord]) -> list[str]:
        """Atomically insert pre-deduplicated records; returns persisted ids."""
        if not records:
            return []
        with self.engine.begin() as conn:
            if not conn.execute(
                sa.text("SELECT 1 FROM reviews WHERE review_id = :r"), {"r": review_id}
            ).first():
                raise NotFoundError(f"review {review_id} not found")
            existing = {
                row[0]
                for row in conn.execute(
                    sa.text("SELECT canonical_key FROM papers WHERE review_id = :r"),
                    {"r": review_id},
                )
            }
            position = conn.execute(
                sa.text("SELECT COALESCE(MAX(position), 0) FROM papers WHERE review_id = :r"),
                {"r": review_id},
            ).scalar_one()
            ids = []
            for record in records:
                key = _key_str(canonical_key(record))
                if canonical_key(record).kind != "unkeyable" and key in existing:
                    raise ConflictError(
                        "canonical key already persisted (concurrent write?)",
                        {"paper_id": record.id},
                    )
                position += 1
                conn.execute(sa.text(
                    "INSERT INTO papers (review_id, paper_id, position, title, abstract,"
                    " authors, venue, year, url, external_ids, sources, is_seed,"
                    " retrieved_at, canonical_key) VALUES (:review_id, :paper_id, :position,"
                    " :title, :abstract, :authors, :venue, :year, :url, :external_ids,"
                    " :sources, :is_seed, :retrieved_at, :canonical_key)"
                ), self._record_params(review_id, position, record))
                existing.add(key)
                ids.append(record.id)
            return ids

    def corpus_key_index(self, review_id: str) -> set[CanonicalKey]:
        with self.engine.begin() as conn:
            if not conn.execute(
                sa.text("SELECT 1 FROM reviews WHERE review_id = :r"), {"r": review_id}
            ).first():
                raise NotFoundError(f"review {review_id} not found")
            rows = conn.execute(
                sa.text("SELECT canonical_key FROM papers WHERE review_id = :r"),
                {"r": review_id},
            )
            keys = {_key_from_str(row[0]) for row in rows}
        return {k for k in keys if k.kind != "unkeyable"}

    def list_papers(self, review_id: str) -> list[PaperRecord]:
        with self.engine.begin() as conn:
            rows = conn.execute(
                sa.text("SELECT * FROM papers WHERE review_id = :r ORDER BY position"),
                {"r": review_id},
            ).mappings().all()
        return [self._row_record(row) for row in rows]

    def get_paper(self, review_id: str, paper_id: str) -> PaperRecord:
        with self.engine.begin() as conn:
            row = conn.execute(
                sa.text("SELECT * FROM papers WHERE review_id = :r AND paper_id = :p"),
                {"r": review_id, "p": paper_id},
            ).mappings().first()
        if row is None:
            raise NotFoundError(f"paper {paper_id} not found in review {review_id}")
        return self._row_record(row)

    def count_papers(self, review_id: str) -> int:
        with self.engine.begin() as conn:
            return conn.execute(
                sa.text("SELECT COUNT(*) FROM papers WHERE review_id = :r"),
                {"r": review_id},
            ).scalar_one()

    # -- decisions ----------------------------------------------------

    def add_decision(
        self,
        review_id: str,
        decision: ScreeningDecision,
        *,
        probability: float | None = None,
    ) -> ScreeningDecision:
        """Append a decision; assigns the next revision for its identity triple."""
        with self.engine.begin() as conn:
            if not conn.execute(
                sa.text("SELECT 1 FROM papers WHERE review_id = :r AND paper_id = :p"),
                {"r": review_id, "p": decision.paper_id},
            ).first():
                raise NotFoundError(f"paper {decision.paper_id} not found in review {review_id}")
            revision = conn.execute(sa.text(
                "SELECT COALESCE(MAX(revision), 0) FROM decisions WHERE review_id = :r"
                " AND paper_id = :p AND reviewer_id = :w AND origin = :o"
            ), {
                "r": review_id,
                "p": decision.paper_id,
                "w": decision.reviewer_id,
                "o": decision.origin.value,
            }).scalar_one() + 1
            seq = conn.execute(
                sa.text("SELECT COALESCE(MAX(seq), 0) FROM decisions WHERE review_id = :r"),
                {"r": review_id},
            ).scalar_one() + 1
            stored = ScreeningDecision(
                paper_id=decision.paper_id,
                reviewer_id=decision.reviewer_id,
                main=decision.main,
                criterion_answers=dict(decision.criterion_answers),
                knew_paper=decision.knew_paper,
                knew_authors=decision.knew_authors,
                origin=decision.origin,
                model_tag=decision.model_tag,
                decided_at=decision.decided_at,
                revision=revision,
            )
            conn.execute(sa.text(
                "INSERT INTO decisions (decision_id, review_id, paper_id, reviewer_id,"
                " origin, revision, main, criterion_answers, knew_paper, knew_authors,"
                " model_tag, probability, decided_at, seq) VALUES (:id, :r, :p, :w, :o,"
                " :rev, :main, :ca, :kp, :ka, :mt, :prob, :at, :seq)"
            ), {
                "id": uuid.uuid4().hex,
                "r": review_id,
                "p": stored.paper_id,
                "w": stored.reviewer_id,
                "o": stored.origin.value,
                "rev": revision,
                "main": stored.main.value,
                "ca": json.dumps(
                    {k: v.value for k, v in sorted(stored.criterion_answers.items())}
                ),
                "kp": None if stored.knew_paper is None else int(stored.knew_paper),
                "ka": None if stored.knew_authors is None else int(stored.knew_authors),
                "mt": stored.model_tag,
                "prob": probability,
                "at": _ts(stored.decided_at),
                "seq": seq,
            })
        return stored

    @staticmethod
    def _row_decision(row) -> tuple[ScreeningDecision, float | None]:
        decision = ScreeningDecision(
            paper_id=row["paper_id"],
            reviewer_id=row["reviewer_id"],
            main=Verdict(row["main"]),
            criterion_answers={
                k: CriterionAnswer(v) for k, v in json.loads(row["criterion_answers"]).items()
            },
            knew_paper=None if row["knew_paper"] is None else bool(row["knew_paper"]),
            knew_authors=None if row["knew_authors"] is None else bool(row["knew_authors"]),
            origin=DecisionOrigin(row["origin"]),
            model_tag=row["model_tag"],
            decided_at=_parse_ts(row["decided_at"]),
            revision=row["revision"],
        )
        return decision, row["probability"]

    def decisions(
        self, review_id: str, *, paper_id: str | None = None
    ) -> list[tuple[ScreeningDecision, float | None]]:
        """All decisions in append order, optionally for one paper."""
        query = "SELECT * FROM decisions WHERE review_id = :r"
        params: dict = {"r": review_id}
        if paper_id is not None:
            query += " AND paper_id = :p"
            params["p"] = paper_id
        query += " ORDER BY seq"
        with self.engine.begin() as conn:
            rows = conn.execute(sa.text(query), params).mappings().all()
        return [self._row_decision(row) for row in rows]

    def latest_manual_by_paper(self, review_id: str) -> dict[str, ScreeningDecision]:
        """Latest manual decision per paper, across reviewers (append order)."""
        latest: dict[str, ScreeningDecision] = {}
        for decision, _ in self.decisions(review_id):
            if decision.origin is DecisionOrigin.MANUAL:
                latest[decision.paper_id] = decision
        return latest

    def papers_decided_by(self, review_id: str, reviewer_id: str) -> set[str]:
        with self.engine.begin() as conn:
            rows = conn.execute(sa.text(
                "SELECT DISTINCT paper_id FROM decisions WHERE review_id = :r"
                " AND reviewer_id = :w AND origin = 'manual'"
            ), {"r": review_id, "w": reviewer_id})
            return {row[0] for row in rows}

    # -- search runs ----------------------------------------------------

    def add_search_run(
        self,
        review_id: str,
        *,
        executed_at: datetime,
        min_year: int | None,
        cells: list[dict],
        new_papers: int,
        duplicates_suppressed: int,
    ) -> str:
        run_id = uuid.uuid4().hex
        with self.engine.begin() as conn:
            seq = conn.execute(
                sa.text("SELECT COALESCE(MAX(seq), 0) FROM search_runs WHERE review_id = :r"),
                {"r": review_id},
            ).scalar_one() + 1
            conn.execute(sa.text(
                "INSERT INTO search_runs (run_id, review_id, executed_at, min_year, cells,"
                " new_papers, duplicates_suppressed, seq) VALUES (:id, :r, :at, :my, :cells,"
                " :new, :dup, :seq)"
            ), {
                "id": run_id,
                "r": review_id,
                "at": _ts(executed_at),
                "my": min_year,
                "cells": json.dumps(cells),
                "new": new_papers,
                "dup": duplicates_suppressed,
                "seq": seq,
            })
        return run_id

    def list_search_runs(self, review_id: str) -> list[dict]:
        with self.engine.begin() as conn:
            rows = conn.execute(
                sa.text("SELECT * FROM search_runs WHERE review_id = :r ORDER BY seq"),
                {"r": review_id},
            ).mappings().all()
        return [
            {
                "run_id": row["run_id"],
                "executed_at": row["executed_at"],
                "min_year": row["min_year"],
                "cells": json.loads(row["cells"]),
                "new_papers": row["new_papers"],
                "duplicates_suppressed": row["duplicates_suppressed"],
            }
            for row in rows
        ]

    # -- classifiers ----------------------------------------------------

    def save_classifier(self, review_id: str, model: TrainedClassifier) -> TrainedClassifier:
        """Persist a freshly trained model under the next version number."""
        with self.engine.begin() as conn:
            if not conn.execute(
                sa.text("SELECT 1 FROM reviews WHERE review_id = :r"), {"r": review_id}
            ).first():
                raise NotFoundError(f"review {review_id} not found")
            version = conn.execute(sa.text(
                "SELECT COALESCE(MAX(version), 0) FROM classifiers"
                " WHERE review_id = :r AND kind = :k"
            ), {"r": review_id, "k": model.kind}).scalar_one() + 1
            conn.execute(sa.text(
                "INSERT INTO classifiers (review_id, kind, version, config, weights, bias,"
                " included_count, excluded_count, trained_at) VALUES (:r, :k, :v, :cfg, :w,"
                " :b, :inc, :exc, :at)"
            ), {
                "r": review_id,
                "k": model.kind,
                "v": version,
                "cfg": json.dumps(model.config, sort_keys=True),
                "w": base64.b64encode(
                    np.ascontiguousarray(model.weights, dtype=np.float64).tobytes()
                ).decode("ascii"),
                "b": model.bias,
                "inc": model.trained_on.included_count,
                "exc": model.trained_on.excluded_count,
                "at": _ts(model.trained_on.trained_at),
            })
        return TrainedClassifier(
            kind=model.kind,
            config=model.config,
            weights=model.weights,
            bias=model.bias,
            trained_on=model.trained_on,
            version=version,
        )

    def get_classifier(
        self, review_id: str, kind: str, version: int | None = None
    ) -> TrainedClassifier | None:
        query = "SELECT * FROM classifiers WHERE review_id = :r AND kind = :k"
        params: dict = {"r": review_id, "k": kind}
        if version is None:
            query += " ORDER BY version DESC LIMIT 1"
        else:
            query += " AND version = :v"
            params["v"] = version
        with self.engine.begin() as conn:
            row = conn.execute(sa.text(query), params).mappings().first()
        if row is None:
            return None
        weights = np.frombuffer(base64.b64decode(row["weights"]), dtype=np.float64).copy()
        return TrainedClassifier(
            kind=row["kind"],
            config=json.loads(row["config"]),
            weights=weights,
            bias=row["bias"],
            trained_on=TrainingProvenance(
                included_count=row["included_count"],
                excluded_count=row["excluded_count"],
                trained_at=_parse_ts(row["trained_at"]),
            ),
            version=row["version"],
        )

    def current_classifier_versions(self, review_id: str) -> dict[str, int]:
        with self.engine.begin() as conn:
            rows = conn.execute(sa.text(
                "SELECT kind, MAX(version) FROM classifiers WHERE review_id = :r GROUP BY kind"
            ), {"r": review_id})
            return {row[0]: row[1] for row in rows}

    # -- QA predictions ---------------------------------------------------

    def add_qa_predictions(self, review_id: str, predictions: list[dict]) -> None:
        if not predictions:
            return
        with self.engine.begin() as conn:
            seq = conn.execute(
                sa.text("SELECT COALESCE(MAX(seq), 0) FROM qa_predictions WHERE review_id = :r"),
                {"r": review_id},
            ).scalar_one()
            for pred in predictions:
                seq += 1
                conn.execute(sa.text(
                    "INSERT INTO qa_predictions (qa_id, review_id, paper_id, criterion_id,"
                    " prompt, raw_answer, parsed, model_id, hallucination_warning, created_at,"
                    " seq) VALUES (:id, :r, :p, :c, :prompt, :raw, :parsed, :m, :warn, :at, :seq)"
                ), {
                    "id": uuid.uuid4().hex,
                    "r": review_id,
                    "p": pred["paper_id"],
                    "c": pred["criterion_id"],
                    "prompt": pred["prompt"],
                    "raw": pred["raw_answer"],
                    "parsed": pred["parsed"],
                    "m": pred["model_id"],
                    "warn": int(pred["hallucination_warning"]),
                    "at": pred["created_at"],
                    "seq": seq,
                })

    def qa_predictions(self, review_id: str, *, paper_id: str | None = None) -> list[dict]:
        query = "SELECT * FROM qa_predictions WHERE review_id = :r"
        params: dict = {"r": review_id}
        if paper_id is not None:
            query += " AND paper_id = :p"
            params["p"] = paper_id
        query += " ORDER BY seq"
        with self.engine.begin() as conn:
            rows = conn.execute(sa.text(query), params).mappings().all()
        return [
            {
                "paper_id": row["paper_id"],
                "criterion_id": row["criterion_id"],
                "prompt": row["prompt"],
                "raw_answer": row["raw_answer"],
                "parsed": row["parsed"],
                "model_id": row["model_id"],
                "hallucination_warning": bool(row["hallucination_warning"]),
                "created_at": row["created_at"],
            }
            for row in rows
        ]

    # -- idempotency ------------------------------------------------------

    def idempotency_get(self, key: str, endpoint: str) -> tuple[int, str] | None:
        with self.engine.begin() as conn:
            row = conn.execute(sa.text(
                "SELECT status, body FROM idempotency WHERE idem_key = :k AND endpoint = :e"
            ), {"k": key, "e": endpoint}).first()
        return None if row is None else (row[0], row[1])

    def idempotency_put(self, key: str, endpoint: str, status: int, body: str) -> None:
        with self.engine.begin() as conn:
            try:
                conn.execute(sa.text(
                    "INSERT INTO idempotency (idem_key, endpoint, status, body, created_at)"
                    " VALUES (:k, :e, :s, :b, :at)"
                ), {"k": key, "e": endpoint, "s": status, "b": body, "at": _ts(utcnow())})
            except sa.exc.IntegrityError:
                pass  # concurrent replay stored the same response first


def _sqlite_fk_pragma(dbapi_connection, _record):
    cursor = dbapi_connection.cursor()
    cursor.execute("PRAGMA foreign_keys=ON")
    cursor.close()


def _migration_files() -> list[tuple[int, str]]:
    out = []
    root = resources.files("litscreen").joinpath(SCHEMA_DIR)
    for entry in sorted(root.iterdir(), key=lambda p: p.name):
        if entry.name.endswith(".sql"):
            version = int(entry.name.split("_", 1)[0])
            out.append((version, entry.read_text(encoding="utf-8")))
    return out
