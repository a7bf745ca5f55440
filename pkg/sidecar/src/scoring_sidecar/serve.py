"""Serve loop: newline-delimited JSON requests on stdin, responses on stdout.

Wire format (chain-score/1):

    request   {"id": str, "kind": "entailment"|"otd"|"completion", ...}
    response  {"id": str, "scores": {...}} | {"id": str, "completion": str}
            | {"id": str, "error": str}

The handshake line {"protocol": "chain-score/1"} is emitted first. A
malformed line yields an error response echoing the id when parseable (else
id ""); per-request model errors yield error responses and the process keeps
serving. Model load failures exit nonzero before the handshake.
"""

from __future__ import annotations

import json
import sys

from .config import SidecarConfig, load_config
from .providers import ProviderError, build_provider, normalize

PROTOCOL_NAME = "chain-score/1"

_REQUIRED_FIELDS = {
    "entailment": ("premise", "hypothesis"),
    "otd": ("text",),
    "completion": ("prompt",),
}


def _answer(handlers: dict, req: dict) -> dict:
    req_id = req["id"]
    kind = req.get("kind")
    if kind not in _REQUIRED_FIELDS:
        return {"id": req_id, "error": f"unknown request kind: {kind!r}"}
    fields = []
    for name in _REQUIRED_FIELDS[kind]:
        value = req.get(name)
        if not isinstance(value, str) or not value.strip():
            return {"id": req_id, "error": f"{kind} request needs non-empty {name!r}"}
        fields.append(value)
    handler = handlers.get(kind)
    if handler is None:
        return {"id": req_id, "error": f"no model configured for task {kind!r}"}
    try:
        if kind == "completion":
            return {"id": req_id, "completion": handler.generate(fields[0])}
        if kind == "entailment":
            raw = handler.classify(fields[0], fields[1])
        else:
            raw = handler.classify(fields[0])
        probs = normalize(raw)
        if len(probs) != len(handler.labels):
            return {
                "id": req_id,
                "error": f"model emitted {len(probs)} scores for {len(handler.labels)} labels",
            }
        scores = {handler.labels[i]: probs[i] for i in range(len(probs))}
        return {"id": req_id, "scores": scores}
    except ProviderError as exc:
        return {"id": req_id, "error": str(exc)}


def serve(config: SidecarConfig, lines=None, write_line=None) -> None:
    """Load every configured model, then answer requests until EOF."""
    handlers = {m.task: build_provider(m) for m in config.models}

    if lines is None:
        lines = sys.stdin
    if write_line is None:
        out = sys.stdout

        def write_line(line: str) -> None:
            out.write(line + "\n")
            out.flush()

    write_line(json.dumps({"protocol": PROTOCOL_NAME}))
    for line in lines:
        if not line.strip():
            continue
        req_id = ""
        try:
            req = json.loads(line)
            if not isinstance(req, dict) or not isinstance(req.get("id"), str):
                raise ValueError("request must be an object with a string id")
            req_id = req["id"]
            payload = _answer(handlers, req)
        except Exception as exc:
            payload = {"id": req_id, "error": f"bad request line: {exc}"}
        write_line(json.dumps(payload, ensure_ascii=False))


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if len(argv) != 1 or argv[0] in ("-h", "--help"):
        print("usage: python -m scoring_sidecar CONFIG.json", file=sys.stderr)
        return 0 if argv and argv[0] in ("-h", "--help") else 64
    try:
        config = load_config(argv[0])
        serve(config)
    except Exception as exc:
        print(f"scoring-sidecar: fatal: {exc}", file=sys.stderr)
        return 1
    return 0
