"""Typed domain errors.

Every error carries a stable machine code and a default HTTP status so the
service layer can map exceptions to API responses without touching business
logic. `details` holds structured context (e.g. unanswered criterion ids).
"""

from __future__ import annotations

from typing import Any


class LitscreenError(Exception):
    code = "internal_error"
    http_status = 500

    def __init__(self, message: str, details: dict[str, Any] | None = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}


class ValidationError(LitscreenError):
    code = "validation_error"
    http_status = 400


class NotFoundError(LitscreenError):
    code = "not_found"
    http_status = 404


class ConflictError(LitscreenError):
    code = "conflict"
    http_status = 409


class UnauthorizedError(LitscreenError):
    code = "unauthorized"
    http_status = 401


class StrictCriteriaUnanswered(ValidationError):
    """Strict-mode submission with at least one unanswered eligibility question."""

    code = "strict_criteria_unanswered"
    http_status = 422


class InsufficientTrainingData(LitscreenError):
    """Fewer than the required included/excluded examples for training."""

    code = "insufficient_training_data"
    http_status = 409


class UntitledRecordError(ValidationError):
    """Source record without a usable title; never becomes a PaperRecord."""

    code = "untitled_record"
    http_status = 422


class ParseError(ValidationError):
    """Reference-file syntax error; `details` locates the byte offset."""

    code = "parse_error"
    http_status = 422


class NumericError(LitscreenError):
    """Non-finite values reached a training routine."""

    code = "non_finite_values"
    http_status = 400


class ServiceUnavailableError(LitscreenError):
    """A required external service (model API, GROBID) is unreachable."""

    code = "service_unavailable"
    http_status = 503


class ConnectorFetchError(LitscreenError):
    """A connector request failed; search runs record this per cell."""

    code = "connector_fetch_failed"
    http_status = 502


class SearchRunFailed(LitscreenError):
    """Every (query, connector) cell of a run failed."""

    code = "search_run_failed"
    http_status = 502
