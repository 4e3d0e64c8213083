"""Review export: one deterministic JSON document per review.

Contains the protocol, all search runs, and every paper with its complete
decision history (manual decisions across all reviewers and revisions,
classifier predictions with superseded flags, QA predictions). Object keys
follow the order documented in docs/export-format.md; timestamps are
RFC 3339 UTC. Exporting an unchanged review twice is byte-identical.
"""

from __future__ import annotations

import json

from litscreen.catalog import DecisionOrigin
from litscreen.store import Store

SCHEMA_VERSION = 1


def _rfc3339(stored: str) -> str:
    return stored.replace("+00:00", "Z")


def export_review(review_id: str, store: Store) -> dict:
    protocol = store.get_protocol(review_id)
    current_versions = store.current_classifier_versions(review_id)

    papers_out = []
    qa_by_paper: dict[str, list[dict]] = {}
    for pred in store.qa_predictions(review_id):
        qa_by_paper.setdefault(pred["paper_id"], []).append(pred)

    decisions_by_paper: dict[str, list] = {}
    for decision, probability in store.decisions(review_id):
        decisions_by_paper.setdefault(decision.paper_id, []).append((decision, probability))

    for paper in store.list_papers(review_id):
        manual = []
        classifier = []
        for decision, probability in decisions_by_paper.get(paper.id, []):
            if decision.origin is DecisionOrigin.MANUAL:
                manual.append({
                    "reviewer_id": decision.reviewer_id,
                    "revision": decision.revision,
                    "main": decision.main.value,
                    "criterion_answers": {
                        k: v.value for k, v in sorted(decision.criterion_answers.items())
                    },
                    "knew_paper": decision.knew_paper,
                    "knew_authors": decision.knew_authors,
                    "decided_at": _rfc3339(decision.decided_at.isoformat()),
                })
            elif decision.origin is DecisionOrigin.CLASSIFIER:
                kind, _, version_text = (decision.model_tag or "").rpartition(":v")
                version = int(version_text) if version_text.isdigit() else None
                superseded = bool(
                    kind and version is not None and current_versions.get(kind, version) > version
                )
                classifier.append({
                    "model_tag": decision.model_tag,
                    "revision": decision.revision,
                    "main": decision.main.value,
                    "probability": probability,
                    "superseded": superseded,
                    "decided_at": _rfc3339(decision.decided_at.isoformat()),
                })
        qa = [
            {
                "criterion_id": pred["criterion_id"],
                "model_id": pred["model_id"],
                "prompt": pred["prompt"],
                "raw_answer": pred["raw_answer"],
                "parsed": pred["parsed"],
                "hallucination_warning": pred["hallucination_warning"],
                "created_at": _rfc3339(pred["created_at"]),
            }
            for pred in qa_by_paper.get(paper.id, [])
        ]
        current_label = None
        if manual:
            current_label = manual[-1]["main"]
        else:
            live = [c for c in classifier if not c["superseded"]]
            if live:
                current_label = live[-1]["main"]
        papers_out.append({
            "id": paper.id,
            "title": paper.title,
            "abstract": paper.abstract,
            "authors": list(paper.authors),
            "venue": paper.venue,
            "year": paper.year,
            "url": paper.url,
            "external_ids": dict(sorted(paper.external_ids.items())),
            "sources": sorted(paper.sources),
            "is_seed": paper.is_seed,
            "retrieved_at": _rfc3339(paper.retrieved_at.isoformat()),
            "current_label": current_label,
            "manual_decisions": manual,
            "classifier_predictions": classifier,
            "qa_predictions": qa,
        })

    return {
        "schema_version": SCHEMA_VERSION,
        "protocol": {
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
        },
        "search_runs": [
            {
                "run_id": run["run_id"],
                "executed_at": _rfc3339(run["executed_at"]),
                "min_year": run["min_year"],
                "cells": run["cells"],
                "new_papers": run["new_papers"],
                "duplicates_suppressed": run["duplicates_suppressed"],
            }
            for run in store.list_search_runs(review_id)
        ],
        "papers": papers_out,
    }


def export_json(document: dict) -> str:
    return json.dumps(document, indent=2, ensure_ascii=False) + "\n"
