"""Automated screening: classifier training/prediction and prompt-based QA.

Classifier labels come from the latest manual decision per paper (include=1,
exclude=0; "maybe" and undecided papers are omitted; seed studies carry
include labels through their auto-recorded decisions). QA screening asks an
external text-generation service one question per (paper, criterion) and
stores the parsed answer with a hallucination warning that is always on.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime

import httpx

from litscreen.catalog import (
    CLASSIFIER_REVIEWER,
    DecisionOrigin,
    EligibilityCriterion,
    PaperRecord,
    ScreeningDecision,
    Verdict,
    utcnow,
)
from litscreen.classifiers import (
    MIN_EXAMPLES_PER_CLASS,
    TrainedClassifier,
    predict_proba,
    train_hash_linear,
    train_tfidf_logreg,
)
from litscreen.config import ClassifierConfig
from litscreen.errors import (
    InsufficientTrainingData,
    NotFoundError,
    ServiceUnavailableError,
    ValidationError,
)
from litscreen.store import Store

logger = logging.getLogger(__name__)

CLASSIFIER_KINDS = ("tfidf_logreg", "hash_linear")

HALLUCINATION_WARNING = "predictions can contain hallucinations"

PROMPT_TEMPLATE = (
    "Title: {title}\n"
    "Abstract: {abstract}\n"
    "Authors: {authors}\n"
    "Journal: {journal}\n"
    "Year: {year}\n"
    "Question: {question}\n"
    "Answer yes or no."
)


def paper_text(paper: PaperRecord) -> str:
    if paper.abstract and paper.abstract.strip():
        return f"{paper.title} {paper.abstract}"
    return paper.title


def build_training_set(review_id: str, store: Store) -> list[tuple[str, int]]:
    """(text, label) pairs from latest manual decisions; gated at 3 per class."""
    if not store.review_exists(review_id):
        raise NotFoundError(f"review {review_id} not found")
    latest = store.latest_manual_by_paper(review_id)
    examples: list[tuple[str, int]] = []
    for paper in store.list_papers(review_id):
        decision = latest.get(paper.id)
        if decision is None or decision.main is Verdict.MAYBE:
            continue
        label = 1 if decision.main is Verdict.INCLUDE else 0
        examples.append((paper_text(paper), label))
    included = sum(1 for _, label in examples if label == 1)
    excluded = len(examples) - included
    if included < MIN_EXAMPLES_PER_CLASS or excluded < MIN_EXAMPLES_PER_CLASS:
        raise InsufficientTrainingData(
            f"need at least {MIN_EXAMPLES_PER_CLASS} included and "
            f"{MIN_EXAMPLES_PER_CLASS} excluded papers",
            {"included": included, "excluded": excluded},
        )
    return examples


def retrain(
    review_id: str,
    kind: str,
    store: Store,
    *,
    config: ClassifierConfig | None = None,
    trained_at: datetime | None = None,
) -> TrainedClassifier:
    """Full retrain from scratch on the current decision set; bumps version."""
    if kind not in CLASSIFIER_KINDS:
        raise ValidationError(f"unknown classifier kind {kind!r}")
    cfg = config or ClassifierConfig()
    with store.review_writer(review_id):
        examples = build_training_set(review_id, store)
        texts = [text for text, _ in examples]
        labels = [label for _, label in examples]
        if kind == "tfidf_logreg":
            model = train_tfidf_logreg(
                texts,
                labels,
                l2=cfg.l2,
                lr=cfg.logreg_lr,
                max_epochs=cfg.logreg_max_epochs,
                tol=cfg.logreg_tol,
                trained_at=trained_at,
            )
        else:
            model = train_hash_linear(
                texts,
                labels,
                buckets=cfg.hash_buckets,
                dim=cfg.hash_dim,
                lr=cfg.hash_lr,
                epochs=cfg.hash_epochs,
                seed=cfg.hash_seed,
                trained_at=trained_at,
            )
        return store.save_classifier(review_id, model)


@dataclass(frozen=True)
class PredictionResult:
    paper_id: str
    probability: float
    decision: bool  # probability >= 0.5


def predict_and_store(
    review_id: str,
    kind: str,
    store: Store,
    *,
    paper_ids: list[str] | None = None,
    decided_at: datetime | None = None,
) -> list[PredictionResult]:
    """Predict with the current model and append classifier decisions.

    Manual decisions are never touched; machine decisions live alongside
    them under the reserved "classifier" reviewer identity.
    """
    model = store.get_classifier(review_id, kind)
    if model is None:
        raise NotFoundError(f"no trained {kind} model for review {review_id}")
    papers = store.list_papers(review_id)
    if paper_ids is not None:
        wanted = set(paper_ids)
        papers = [p for p in papers if p.id in wanted]
        missing = wanted - {p.id for p in papers}
        if missing:
            raise NotFoundError(f"unknown paper ids: {sorted(missing)}")
    if not papers:
        return []
    probabilities = predict_proba(model, [paper_text(p) for p in papers])
    when = decided_at or utcnow()
    tag = f"{kind}:v{model.version}"
    results = []
    for paper, probability in zip(papers, probabilities):
        decision = bool(probability >= 0.5)
        store.add_decision(
            review_id,
            ScreeningDecision(
                paper_id=paper.id,
                reviewer_id=CLASSIFIER_REVIEWER,
                main=Verdict.INCLUDE if decision else Verdict.EXCLUDE,
                origin=DecisionOrigin.CLASSIFIER,
                model_tag=tag,
                decided_at=when,
            ),
            probability=float(probability),
        )
        results.append(PredictionResult(paper.id, float(probability), decision))
    return results


# -- QA screening -----------------------------------------------------------


def build_prompt(paper: PaperRecord, criterion: EligibilityCriterion) -> str:
    """Bit-exact prompt; absent fields become "N/A", newlines are LF."""
    return PROMPT_TEMPLATE.format(
        title=paper.title,
        abstract=paper.abstract if paper.abstract else "N/A",
        authors=", ".join(paper.authors) if paper.authors else "N/A",
        journal=paper.venue if paper.venue else "N/A",
        year=paper.year if paper.year is not None else "N/A",
        question=criterion.text,
    )


def parse_answer(raw: str) -> str:
    """Leading alphabetic token, case-insensitive: yes / no / unparseable."""
    stripped = raw.strip()
    token = ""
    for ch in stripped:
        if ch.isalpha():
            token += ch
        else:
            break
    token = token.lower()
    if token == "yes":
        return "yes"
    if token == "no":
        return "no"
    return "unparseable"


@dataclass(frozen=True)
class QAPrediction:
    paper_id: str
    criterion_id: str
    prompt: str
    raw_answer: str
    parsed: str  # "yes" | "no" | "unparseable"
    model_id: str
    hallucination_warning: bool = True

    def __post_init__(self):
        if self.hallucination_warning is not True:
            raise ValidationError("QA predictions must carry the hallucination warning")


@dataclass
class QABatchReport:
    predictions: list[QAPrediction] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)  # {paper_id, criterion_id, error}


class ModelClient:
    """Client for the text-generation wire contract: POST /generate."""

    def __init__(
        self,
        base_url: str,
        model_id: str,
        *,
        max_new_tokens: int = 16,
        timeout: float = 30.0,
        client: httpx.Client | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.model_id = model_id
        self.max_new_tokens = max_new_tokens
        self._client = client or httpx.Client(timeout=timeout)

    def generate(self, prompt: str) -> str:
        response = self._client.post(
            f"{self.base_url}/generate",
            json={
                "model": self.model_id,
                "prompt": prompt,
                "max_new_tokens": self.max_new_tokens,
            },
        )
        response.raise_for_status()
        return response.json()["text"]

    def close(self):
        self._client.close()


def qa_screen(
    review_id: str,
    criterion_ids: list[str],
    paper_ids: list[str],
    store: Store,
    client: ModelClient,
    *,
    concurrency: int = 2,
    created_at: datetime | None = None,
) -> QABatchReport:
    """One request per (paper, criterion); failures are recorded, not fatal.

    An unreachable service on the very first request aborts the batch with a
    typed unavailable error; later failures are per-pair.
    """
    protocol = store.get_protocol(review_id)
    criteria = {c.criterion_id: c for c in protocol.criteria}
    unknown = [c for c in criterion_ids if c not in criteria]
    if unknown:
        raise NotFoundError(f"unknown criterion ids: {unknown}")
    papers = {p.id: p for p in store.list_papers(review_id)}
    missing = [p for p in paper_ids if p not in papers]
    if missing:
        raise NotFoundError(f"unknown paper ids: {missing}")

    pairs = [(pid, cid) for pid in paper_ids for cid in criterion_ids]
    report = QABatchReport()
    when = (created_at or utcnow()).isoformat()

    def ask(pair: tuple[str, str]) -> tuple[tuple[str, str], str | None, Exception | None]:
        pid, cid = pair
        prompt = build_prompt(papers[pid], criteria[cid])
        try:
            return pair, client.generate(prompt), None
        except httpx.HTTPError as exc:
            return pair, None, exc

    with ThreadPoolExecutor(max_workers=max(1, concurrency)) as pool:
        outcomes = list(pool.map(ask, pairs))

    if outcomes and all(
        isinstance(err, (httpx.ConnectError, httpx.ConnectTimeout))
        for _, _, err in outcomes
        if err is not None
    ) and all(answer is None for _, answer, _ in outcomes):
        raise ServiceUnavailableError(
            f"model service at {client.base_url} is unreachable"
        )

    for (pid, cid), answer, error in outcomes:
        if error is not None:
            logger.warning("QA pair (%s, %s) failed: %s", pid, cid, error)
            report.failures.append({"paper_id": pid, "criterion_id": cid, "error": str(error)})
            continue
        report.predictions.append(
            QAPrediction(
                paper_id=pid,
                criterion_id=cid,
                prompt=build_prompt(papers[pid], criteria[cid]),
                raw_answer=answer,
                parsed=parse_answer(answer),
                model_id=client.model_id,
            )
        )

    store.add_qa_predictions(
        review_id,
        [
            {
                "paper_id": p.paper_id,
                "criterion_id": p.criterion_id,
                "prompt": p.prompt,
                "raw_answer": p.raw_answer,
                "parsed": p.parsed,
                "model_id": p.model_id,
                "hallucination_warning": p.hallucination_warning,
                "created_at": when,
            }
            for p in report.predictions
        ],
    )
    return report
