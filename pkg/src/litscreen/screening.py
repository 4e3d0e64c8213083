"""Human screening workflow: next item, decision recording, progress.

Strict mode demands a yes/no answer for every eligibility question before a
manual decision is accepted; relaxed mode requires only the main verdict.
Decision history is append-only with per-(paper, reviewer, origin) revision
counters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from litscreen.catalog import (
    CriterionAnswer,
    DecisionOrigin,
    EligibilityCriterion,
    PaperRecord,
    ReviewProtocol,
    ScreeningDecision,
)
from litscreen.autoscreen import HALLUCINATION_WARNING
from litscreen.errors import StrictCriteriaUnanswered, ValidationError
from litscreen.store import Store


@dataclass(frozen=True)
class AutoPrediction:
    model_tag: str
    prediction: str  # include/exclude for classifiers, yes/no/unparseable for QA
    warning_text: str
    criterion_id: str | None = None
    probability: float | None = None


@dataclass
class ScreeningItem:
    paper: PaperRecord
    criteria: tuple[EligibilityCriterion, ...]
    existing_decision: ScreeningDecision | None = None
    auto_predictions: list[AutoPrediction] = field(default_factory=list)


def _current_tags(store: Store, review_id: str) -> set[str]:
    return {
        f"{kind}:v{version}"
        for kind, version in store.current_classifier_versions(review_id).items()
    }


def _auto_predictions_for(store: Store, review_id: str, paper_id: str) -> list[AutoPrediction]:
    current = _current_tags(store, review_id)
    out: list[AutoPrediction] = []
    for decision, probability in store.decisions(review_id, paper_id=paper_id):
        if decision.origin is DecisionOrigin.CLASSIFIER and decision.model_tag in current:
            out.append(
                AutoPrediction(
                    model_tag=decision.model_tag,
                    prediction=decision.main.value,
                    warning_text="automated prediction",
                    probability=probability,
                )
            )
    for pred in store.qa_predictions(review_id, paper_id=paper_id):
        out.append(
            AutoPrediction(
                model_tag=pred["model_id"],
                prediction=pred["parsed"],
                warning_text=HALLUCINATION_WARNING,
                criterion_id=pred["criterion_id"],
            )
        )
    return out


def next_item(
    review_id: str,
    reviewer_id: str,
    store: Store,
    *,
    ranked: bool = False,
) -> ScreeningItem | None:
    """Next paper this reviewer has not decided; None when exhausted.

    Default order is corpus insertion order; the ranked flag sorts the
    queue by the current classifier's inclusion probability instead.
    """
    protocol = store.get_protocol(review_id)
    decided = store.papers_decided_by(review_id, reviewer_id)
    undecided = [p for p in store.list_papers(review_id) if p.id not in decided]
    if not undecided:
        return None
    if ranked:
        current = _current_tags(store, review_id)
        scores: dict[str, float] = {}
        for decision, probability in store.decisions(review_id):
            if (
                decision.origin is DecisionOrigin.CLASSIFIER
                and decision.model_tag in current
                and probability is not None
            ):
                scores[decision.paper_id] = probability
        undecided.sort(key=lambda p: -scores.get(p.id, 0.0))
    paper = undecided[0]
    return ScreeningItem(
        paper=paper,
        criteria=protocol.criteria,
        existing_decision=None,
        auto_predictions=_auto_predictions_for(store, review_id, paper.id),
    )


def validate_strict(
    decision: ScreeningDecision, protocol: ReviewProtocol
) -> list[str]:
    """Ids of protocol criteria lacking a yes/no answer; empty means ok."""
    answered = {
        cid
        for cid, answer in decision.criterion_answers.items()
        if answer in (CriterionAnswer.YES, CriterionAnswer.NO)
    }
    return [c.criterion_id for c in protocol.criteria if c.criterion_id not in answered]


def submit_decision(
    review_id: str, decision: ScreeningDecision, store: Store
) -> ScreeningDecision:
    """Validate against the protocol and append with the next revision."""
    protocol = store.get_protocol(review_id)
    known = protocol.criterion_ids()
    stray = [cid for cid in decision.criterion_answers if cid not in known]
    if stray:
        raise ValidationError(
            "criterion answers reference unknown criteria", {"unknown": sorted(stray)}
        )
    if not protocol.prior_knowledge_enabled and (
        decision.knew_paper is not None or decision.knew_authors is not None
    ):
        raise ValidationError(
            "prior-knowledge fields require prior_knowledge_enabled on the protocol"
        )
    if protocol.mode.value == "strict" and decision.origin is DecisionOrigin.MANUAL:
        violations = validate_strict(decision, protocol)
        if violations:
            raise StrictCriteriaUnanswered(
                "strict mode requires an answer for every eligibility question",
                {"unanswered": violations},
            )
    return store.add_decision(review_id, decision)


@dataclass(frozen=True)
class ProgressCounts:
    total: int
    decided: int
    included: int
    maybe: int
    excluded: int
    auto_predicted: int


def progress(review_id: str, store: Store) -> ProgressCounts:
    """Counts over latest-revision manual decisions plus machine coverage."""
    protocol = store.get_protocol(review_id)
    del protocol  # existence check only
    papers = store.list_papers(review_id)
    latest = store.latest_manual_by_paper(review_id)
    included = sum(1 for d in latest.values() if d.main.value == "include")
    maybe = sum(1 for d in latest.values() if d.main.value == "maybe")
    excluded = sum(1 for d in latest.values() if d.main.value == "exclude")
    machine_papers = {
        d.paper_id
        for d, _ in store.decisions(review_id)
        if d.origin is not DecisionOrigin.MANUAL
    }
    machine_papers.update(p["paper_id"] for p in store.qa_predictions(review_id))
    auto_predicted = sum(
        1 for p in papers if p.id in machine_papers and p.id not in latest
    )
    return ProgressCounts(
        total=len(papers),
        decided=len(latest),
        included=included,
        maybe=maybe,
        excluded=excluded,
        auto_predicted=auto_predicted,
    )
