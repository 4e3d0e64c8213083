"""HTTP facade over the core operations, plus static UI serving.

Every endpoint is a thin mapping onto exactly one core operation; no
business logic lives here. Mutating endpoints are idempotent under a
client-supplied Idempotency-Key header, and require a bearer token when
auth is enabled.
"""

from __future__ import annotations

import uuid
from pathlib import Path
from typing import Literal, Optional

from fastapi import Depends, FastAPI, Request, Response, UploadFile
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field
from starlette.middleware.base import BaseHTTPMiddleware

from litscreen import autoscreen, federation, ingest, screening
from litscreen.catalog import (
    CriterionAnswer,
    CriterionKind,
    DecisionOrigin,
    EligibilityCriterion,
    ReviewProtocol,
    ScreeningDecision,
    ScreeningMode,
    Verdict,
)
from litscreen.config import Settings
from litscreen.errors import LitscreenError, UnauthorizedError, ValidationError
from litscreen.export import export_json, export_review
from litscreen.store import Store

API_PREFIX = "/api/v1"

MUTATING_METHODS = {"POST", "PUT", "DELETE", "PATCH"}


class CriterionIn(BaseModel):
    criterion_id: Optional[str] = None
    kind: Literal["inclusion", "exclusion"]
    text: str


class ReviewIn(BaseModel):
    title: str
    description: str = ""
    queries: list[str]
    criteria: list[CriterionIn] = Field(default_factory=list)
    connectors: Optional[list[str]] = None  # default: every registered connector
    top_n: Optional[int] = None
    mode: Literal["strict", "relaxed"] = "relaxed"
    prior_knowledge_enabled: bool = False


class DecisionIn(BaseModel):
    paper_id: str
    reviewer_id: Optional[str] = None  # resolved from the token when auth is on
    main: Literal["include", "maybe", "exclude"]
    criterion_answers: dict[str, Literal["yes", "no", "unanswered"]] = Field(
        default_factory=dict
    )
    knew_paper: Optional[bool] = None
    knew_authors: Optional[bool] = None


class PredictIn(BaseModel):
    paper_ids: Optional[list[str]] = None


class QaIn(BaseModel):
    criterion_ids: list[str]
    paper_ids: list[str]


def _protocol_from_body(body: ReviewIn, review_id: str, settings: Settings) -> ReviewProtocol:
    connectors = body.connectors
    if connectors is None:
        connectors = [c.name for c in settings.connectors]
    criteria = tuple(
        EligibilityCriterion(
            criterion_id=c.criterion_id or f"c{i + 1}",
            kind=CriterionKind(c.kind),
            text=c.text,
        )
        for i, c in enumerate(body.criteria)
    )
    return ReviewProtocol(
        review_id=review_id,
        title=body.title,
        description=body.description,
        queries=tuple(body.queries),
        criteria=criteria,
        connectors=tuple(connectors),
        top_n=body.top_n if body.top_n is not None else settings.default_top_n,
        mode=ScreeningMode(body.mode),
        prior_knowledge_enabled=body.prior_knowledge_enabled,
    )


def _protocol_dict(protocol: ReviewProtocol) -> dict:
    return {
        "review_id": protocol.review_id,
        "title": protocol.title,
        "description": protocol.description,
        "queries": list(protocol.queries),
        "criteria": [
            {"criterion_id": c.criterion_id, "kind": c.kind.value, "text": c.text}
            for c in protocol.criteria
        ],
        "connectors": list(protocol.connectors),
        "top_n": protocol.top_n,
        "mode": protocol.mode.value,
        "prior_knowledge_enabled": protocol.prior_knowledge_enabled,
        "last_search_year": protocol.last_search_year,
    }


class IdempotencyMiddleware(BaseHTTPMiddleware):
    """Replay stored responses for repeated Idempotency-Key submissions."""

    def __init__(self, app, store: Store):
        super().__init__(app)
        self.store = store

    async def dispatch(self, request: Request, call_next):
        key = request.headers.get("Idempotency-Key")
        if not key or request.method not in MUTATING_METHODS:
            return await call_next(request)
        endpoint = f"{request.method} {request.url.path}"
        cached = self.store.idempotency_get(key, endpoint)
        if cached is not None:
            status, body = cached
            return Response(content=body, status_code=status, media_type="application/json")
        response = await call_next(request)
        chunks = [chunk async for chunk in response.body_iterator]
        body_bytes = b"".join(chunks)
        if 200 <= response.status_code < 300:
            self.store.idempotency_put(key, endpoint, response.status_code, body_bytes.decode())
        return Response(
            content=body_bytes,
            status_code=response.status_code,
            headers=dict(response.headers),
            media_type=response.media_type,
        )


def create_app(settings: Settings, store: Store) -> FastAPI:
    app = FastAPI(title="litscreen", version="0.1.0")
    app.add_middleware(IdempotencyMiddleware, store=store)

    token_to_reviewer = {token: reviewer for reviewer, token in settings.reviewer_tokens.items()}

    def authenticate(request: Request) -> Optional[str]:
        """Reviewer identity from the bearer token; None when auth is off."""
        if not settings.auth_enabled:
            return None
        if request.method not in MUTATING_METHODS:
            return None
        header = request.headers.get("Authorization", "")
        if not header.startswith("Bearer "):
            raise UnauthorizedError("missing bearer token")
        reviewer = token_to_reviewer.get(header.removeprefix("Bearer ").strip())
        if reviewer is None:
            raise UnauthorizedError("unknown token")
        return reviewer

    @app.exception_handler(LitscreenError)
    async def handle_domain_error(_request: Request, exc: LitscreenError):
        return JSONResponse(
            status_code=exc.http_status,
            content={"error": {"code": exc.code, "message": exc.message, "details": exc.details}},
        )

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post(f"{API_PREFIX}/reviews", status_code=201)
    def create_review(body: ReviewIn, _reviewer: Optional[str] = Depends(authenticate)):
        protocol = _protocol_from_body(body, uuid.uuid4().hex, settings)
        store.create_review(protocol)
        return _protocol_dict(protocol)

    @app.get(API_PREFIX + "/reviews/{review_id}")
    def get_review(review_id: str):
        return _protocol_dict(store.get_protocol(review_id))

    @app.put(API_PREFIX + "/reviews/{review_id}/protocol")
    def put_protocol(
        review_id: str, body: ReviewIn, _reviewer: Optional[str] = Depends(authenticate)
    ):
        protocol = _protocol_from_body(body, review_id, settings)
        store.update_protocol(protocol)
        return _protocol_dict(store.get_protocol(review_id))

    @app.post(API_PREFIX + "/reviews/{review_id}/search")
    def post_search(review_id: str, _reviewer: Optional[str] = Depends(authenticate)):
        protocol = store.get_protocol(review_id)
        run = federation.run_search(protocol, store, settings)
        return {
            "review_id": run.review_id,
            "executed_at": run.executed_at.isoformat(),
            "min_year": run.min_year,
            "cells": [c.as_dict() for c in run.cells],
            "new_papers": run.new_papers,
            "duplicates_suppressed": run.duplicates_suppressed,
        }

    @app.get(API_PREFIX + "/reviews/{review_id}/search-runs")
    def get_search_runs(review_id: str):
        store.get_protocol(review_id)  # not-found check
        return {"runs": store.list_search_runs(review_id)}

    @app.post(API_PREFIX + "/reviews/{review_id}/import")
    async def post_import(
        review_id: str,
        file: UploadFile,
        kind: str,
        seed: bool = False,
        _reviewer: Optional[str] = Depends(authenticate),
    ):
        store.get_protocol(review_id)
        payload = await file.read()
        if kind in ("ris", "bib"):
            report = ingest.import_references(
                review_id, payload, kind, mark_as_seed=seed, store=store, settings=settings
            )
        elif kind == "pdf":
            _record, report = ingest.import_pdf(
                review_id, payload, mark_as_seed=seed, store=store, settings=settings
            )
        else:
            raise ValidationError(f"unsupported import kind {kind!r}")
        return {
            "source_kind": report.source_kind,
            "parsed": report.parsed,
            "rejected": [{"entry": i, "reason": r} for i, r in report.rejected],
            "new_after_dedup": report.new_after_dedup,
            "seeds_marked": report.seeds_marked,
        }

    @app.get(API_PREFIX + "/reviews/{review_id}/next-item")
    def get_next_item(review_id: str, reviewer: str):
        item = screening.next_item(
            review_id, reviewer, store, ranked=settings.ranked_screening
        )
        if item is None:
            return {"exhausted": True}
        return {
            "exhausted": False,
            "paper": {
                "id": item.paper.id,
                "title": item.paper.title,
                "abstract": item.paper.abstract,
                "authors": list(item.paper.authors),
                "venue": item.paper.venue,
                "year": item.paper.year,
                "url": item.paper.url,
                "is_seed": item.paper.is_seed,
            },
            "criteria": [
                {"criterion_id": c.criterion_id, "kind": c.kind.value, "text": c.text}
                for c in item.criteria
            ],
            "auto_predictions": [
                {
                    "model_tag": p.model_tag,
                    "prediction": p.prediction,
                    "warning": p.warning_text,
                    "criterion_id": p.criterion_id,
                    "probability": p.probability,
                }
                for p in item.auto_predictions
            ],
        }

    @app.post(API_PREFIX + "/reviews/{review_id}/decisions")
    def post_decision(
        review_id: str, body: DecisionIn, reviewer: Optional[str] = Depends(authenticate)
    ):
        reviewer_id = reviewer or body.reviewer_id
        if not reviewer_id:
            raise ValidationError("reviewer_id is required")
        decision = ScreeningDecision(
            paper_id=body.paper_id,
            reviewer_id=reviewer_id,
            main=Verdict(body.main),
            criterion_answers={
                cid: CriterionAnswer(ans) for cid, ans in body.criterion_answers.items()
            },
            knew_paper=body.knew_paper,
            knew_authors=body.knew_authors,
            origin=DecisionOrigin.MANUAL,
        )
        stored = screening.submit_decision(review_id, decision, store)
        return {"paper_id": stored.paper_id, "reviewer_id": stored.reviewer_id, "revision": stored.revision}

    @app.get(API_PREFIX + "/reviews/{review_id}/progress")
    def get_progress(review_id: str):
        counts = screening.progress(review_id, store)
        return {
            "total": counts.total,
            "decided": counts.decided,
            "included": counts.included,
            "maybe": counts.maybe,
            "excluded": counts.excluded,
            "auto_predicted": counts.auto_predicted,
        }

    @app.post(API_PREFIX + "/reviews/{review_id}/classifiers/{kind}/retrain")
    def post_retrain(
        review_id: str, kind: str, _reviewer: Optional[str] = Depends(authenticate)
    ):
        store.get_protocol(review_id)
        model = autoscreen.retrain(review_id, kind, store, config=settings.classifier)
        return {
            "kind": model.kind,
            "version": model.version,
            "included_count": model.trained_on.included_count,
            "excluded_count": model.trained_on.excluded_count,
            "trained_at": model.trained_on.trained_at.isoformat(),
        }

    @app.post(API_PREFIX + "/reviews/{review_id}/classifiers/{kind}/predict")
    def post_predict(
        review_id: str,
        kind: str,
        body: PredictIn | None = None,
        _reviewer: Optional[str] = Depends(authenticate),
    ):
        store.get_protocol(review_id)
        results = autoscreen.predict_and_store(
            review_id, kind, store, paper_ids=body.paper_ids if body else None
        )
        return {
            "predictions": [
                {"paper_id": r.paper_id, "probability": r.probability, "decision": r.decision}
                for r in results
            ]
        }

    @app.post(API_PREFIX + "/reviews/{review_id}/qa")
    def post_qa(
        review_id: str, body: QaIn, _reviewer: Optional[str] = Depends(authenticate)
    ):
        client = autoscreen.ModelClient(
            settings.model_base_url,
            settings.model_id,
            max_new_tokens=settings.max_new_tokens,
        )
        try:
            report = autoscreen.qa_screen(
                review_id,
                body.criterion_ids,
                body.paper_ids,
                store,
                client,
                concurrency=settings.qa_concurrency,
            )
        finally:
            client.close()
        return {
            "predictions": [
                {
                    "paper_id": p.paper_id,
                    "criterion_id": p.criterion_id,
                    "prompt": p.prompt,
                    "raw_answer": p.raw_answer,
                    "parsed": p.parsed,
                    "model_id": p.model_id,
                    "hallucination_warning": p.hallucination_warning,
                }
                for p in report.predictions
            ],
            "failures": report.failures,
        }

    @app.get(API_PREFIX + "/reviews/{review_id}/export")
    def get_export(review_id: str):
        document = export_review(review_id, store)
        return Response(
            content=export_json(document),
            media_type="application/json",
            headers={
                "Content-Disposition": f'attachment; filename="review-{review_id}.json"'
            },
        )

    ui_dir = settings.ui_dir
    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
