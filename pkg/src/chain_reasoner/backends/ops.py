"""Backend-facing operations with shared precondition checks.

These are the functions the engine and evaluation layers call; they work
identically for in-process mocks and transport clients.
"""

from __future__ import annotations

from typing import Sequence

from ..errors import BackendError
from .protocol import EntailmentScores, OtdScores, ScoreRequest, ScoreResponse


def score_entailment(backend, premise: str, hypothesis: str) -> EntailmentScores:
    if not premise or not premise.strip():
        raise ValueError("premise must be non-empty")
    if not hypothesis or not hypothesis.strip():
        raise ValueError("hypothesis must be non-empty")
    return backend.score_entailment(premise, hypothesis)


def score_otd(backend, text: str) -> OtdScores:
    if not text or not text.strip():
        raise ValueError("text must be non-empty")
    return backend.score_otd(text)


def complete(backend, prompt: str) -> str:
    if not prompt or not prompt.strip():
        raise ValueError("prompt must be non-empty")
    return backend.complete(prompt)


def batch_score(backend, requests: Sequence[ScoreRequest]) -> list[ScoreResponse]:
    """Dispatch a batch; one response per request, returned in request order.

    Invalid requests and per-request backend errors become error responses
    carrying the request id; they never fail the batch. Duplicate ids are
    rejected before anything is dispatched.
    """
    ids = [r.id for r in requests]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate request ids in batch")
    if hasattr(backend, "batch"):
        return backend.batch(requests)
    responses: list[ScoreResponse] = []
    for req in requests:
        responses.append(dispatch_one(backend, req))
    return responses


def dispatch_one(backend, req: ScoreRequest) -> ScoreResponse:
    """Answer a single request, folding failures into an error response."""
    try:
        req.validate()
        if req.kind == "entailment":
            return ScoreResponse(id=req.id, scores=backend.score_entailment(req.premise, req.hypothesis))
        if req.kind == "otd":
            return ScoreResponse(id=req.id, scores=backend.score_otd(req.text))
        return ScoreResponse(id=req.id, completion=backend.complete(req.prompt))
    except (ValueError, BackendError) as exc:
        return ScoreResponse(id=req.id, error=str(exc))
