"""Wire protocol: message types and their newline-delimited JSON encoding.

One message per line, UTF-8. A backend process emits the handshake line
``{"protocol": "chain-score/1"}`` on startup, then answers each request line
with exactly one response line. Responses may arrive out of request order;
correlation ids pair them up.

    request   {"id": str, "kind": "entailment"|"otd"|"completion",
               "premise": str?, "hypothesis": str?, "text": str?, "prompt": str?}
    response  {"id": str, "scores": {"entailment": f, "neutral": f, "contradiction": f}}
            | {"id": str, "scores": {"offensive": f, "non_offensive": f}}
            | {"id": str, "completion": str}
            | {"id": str, "error": str}

"completion" is the probe extension; the framing is identical.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from ..errors import ProtocolError

PROTOCOL_NAME = "chain-score/1"
HANDSHAKE_LINE = json.dumps({"protocol": PROTOCOL_NAME})

DISTRIBUTION_TOL = 1e-6

KINDS = ("entailment", "otd", "completion")


def _check_distribution(name: str, values: dict[str, float]) -> None:
    for label, p in values.items():
        if not isinstance(p, (int, float)) or math.isnan(p) or p < 0.0 or p > 1.0:
            raise ValueError(f"{name}.{label} = {p!r} outside [0, 1]")
    total = sum(values.values())
    if abs(total - 1.0) > DISTRIBUTION_TOL:
        raise ValueError(f"{name} labels sum to {total!r}, expected 1 within {DISTRIBUTION_TOL}")


@dataclass(frozen=True)
class EntailmentScores:
    """Normalized label distribution of an entailment model."""

    entailment: float
    neutral: float
    contradiction: float

    def __post_init__(self):
        _check_distribution(
            "EntailmentScores",
            {
                "entailment": self.entailment,
                "neutral": self.neutral,
                "contradiction": self.contradiction,
            },
        )

    def to_dict(self) -> dict:
        return {
            "entailment": self.entailment,
            "neutral": self.neutral,
            "contradiction": self.contradiction,
        }


@dataclass(frozen=True)
class OtdScores:
    """Normalized binary offensive / non-offensive distribution."""

    offensive: float
    non_offensive: float

    def __post_init__(self):
        _check_distribution(
            "OtdScores", {"offensive": self.offensive, "non_offensive": self.non_offensive}
        )

    def to_dict(self) -> dict:
        return {"offensive": self.offensive, "non_offensive": self.non_offensive}


@dataclass(frozen=True)
class ScoreRequest:
    id: str
    kind: str
    premise: str | None = None
    hypothesis: str | None = None
    text: str | None = None
    prompt: str | None = None

    def validate(self) -> None:
        """Raise ValueError when kind-specific fields are missing or empty."""
        if self.kind not in KINDS:
            raise ValueError(f"unknown request kind: {self.kind!r}")
        if self.kind == "entailment":
            if not (self.premise or "").strip():
                raise ValueError("entailment request needs a non-empty premise")
            if not (self.hypothesis or "").strip():
                raise ValueError("entailment request needs a non-empty hypothesis")
        elif self.kind == "otd":
            if not (self.text or "").strip():
                raise ValueError("otd request needs non-empty text")
        else:
            if not (self.prompt or "").strip():
                raise ValueError("completion request needs a non-empty prompt")


@dataclass(frozen=True)
class ScoreResponse:
    id: str
    scores: EntailmentScores | OtdScores | None = None
    completion: str | None = None
    error: str | None = None

    def __post_init__(self):
        present = sum(x is not None for x in (self.scores, self.completion, self.error))
        if present != 1:
            raise ValueError("response must carry exactly one of scores/completion/error")


def request_to_dict(req: ScoreRequest) -> dict:
    out: dict = {"id": req.id, "kind": req.kind}
    for key in ("premise", "hypothesis", "text", "prompt"):
        value = getattr(req, key)
        if value is not None:
            out[key] = value
    return out


def request_from_dict(obj: dict) -> ScoreRequest:
    if not isinstance(obj, dict):
        raise ProtocolError("request must be a JSON object")
    req_id = obj.get("id")
    kind = obj.get("kind")
    if not isinstance(req_id, str):
        raise ProtocolError("request id must be a string")
    if not isinstance(kind, str):
        raise ProtocolError("request kind must be a string")
    fields = {}
    for key in ("premise", "hypothesis", "text", "prompt"):
        value = obj.get(key)
        if value is not None and not isinstance(value, str):
            raise ProtocolError(f"request field {key!r} must be a string")
        fields[key] = value
    return ScoreRequest(id=req_id, kind=kind, **fields)


def response_to_dict(resp: ScoreResponse) -> dict:
    out: dict = {"id": resp.id}
    if resp.scores is not None:
        out["scores"] = resp.scores.to_dict()
    elif resp.completion is not None:
        out["completion"] = resp.completion
    else:
        out["error"] = resp.error
    return out


def response_from_dict(obj: dict) -> ScoreResponse:
    if not isinstance(obj, dict):
        raise ProtocolError("response must be a JSON object")
    resp_id = obj.get("id")
    if not isinstance(resp_id, str):
        raise ProtocolError("response id must be a string")
    present = [k for k in ("scores", "completion", "error") if k in obj]
    if len(present) != 1:
        raise ProtocolError(f"response must carry exactly one of scores/completion/error, got {present}")
    if "error" in obj:
        error = obj["error"]
        if not isinstance(error, str):
            raise ProtocolError("response error must be a string")
        return ScoreResponse(id=resp_id, error=error)
    if "completion" in obj:
        completion = obj["completion"]
        if not isinstance(completion, str):
            raise ProtocolError("response completion must be a string")
        return ScoreResponse(id=resp_id, completion=completion)
    scores_obj = obj["scores"]
    if not isinstance(scores_obj, dict):
        raise ProtocolError("response scores must be an object")
    try:
        if "entailment" in scores_obj:
            scores: EntailmentScores | OtdScores = EntailmentScores(
                entailment=scores_obj.get("entailment"),
                neutral=scores_obj.get("neutral"),
                contradiction=scores_obj.get("contradiction"),
            )
        elif "offensive" in scores_obj:
            scores = OtdScores(
                offensive=scores_obj.get("offensive"),
                non_offensive=scores_obj.get("non_offensive"),
            )
        else:
            raise ProtocolError(f"unrecognized scores object: {sorted(scores_obj)}")
    except (TypeError, ValueError) as exc:
        raise ProtocolError(f"invalid score distribution: {exc}") from None
    return ScoreResponse(id=resp_id, scores=scores)


def encode_line(obj: dict) -> str:
    return json.dumps(obj, ensure_ascii=False)


def decode_line(line: str) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"bad JSON line: {exc}") from None
    if not isinstance(obj, dict):
        raise ProtocolError("protocol messages must be JSON objects")
    return obj


def parse_handshake(line: str) -> str:
    obj = decode_line(line)
    protocol = obj.get("protocol")
    if protocol != PROTOCOL_NAME:
        raise ProtocolError(f"unexpected handshake: {line.strip()!r}")
    return protocol
