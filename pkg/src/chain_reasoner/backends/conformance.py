"""Protocol conformance runner for backend processes.

Drives a live backend through the golden request corpus and checks the
structural contract: handshake line, score normalization (sum 1 within
1e-6, every label in [0, 1]), id echoing, per-request error isolation, and
recovery from malformed input lines. Response *values* are backend-specific
and deliberately unchecked.

Usage: ``python -m chain_reasoner.backends.conformance "cmd:python -m ..."``
"""

from __future__ import annotations

import sys
from dataclasses import dataclass

from ..errors import BackendError, ProtocolError
from .client import parse_backend_spec
from .ops import batch_score
from .protocol import EntailmentScores, OtdScores, ScoreRequest, decode_line, response_from_dict

PREMISE = "The committee reviewed the annual report in the morning."
HYPOTHESIS = "A report was reviewed."
OTD_TEXT = "The weather is mild today."
COMPLETION_PROMPT = "Q: Do you know that water is wet?\nA: Yes.\nQ: Why?\nA:"


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def _check(name: str, fn) -> CheckResult:
    try:
        fn()
        return CheckResult(name, True)
    except AssertionError as exc:
        return CheckResult(name, False, str(exc))
    except (BackendError, ValueError) as exc:
        return CheckResult(name, False, f"{type(exc).__name__}: {exc}")


def run_conformance(backend_spec: str, timeout: float = 30.0) -> list[CheckResult]:
    results: list[CheckResult] = []
    client = parse_backend_spec(backend_spec, timeout=timeout)
    with client:
        def handshake():
            with client._lock:
                client._ensure_connected()
            assert client.protocol == "chain-score/1"

        results.append(_check("handshake", handshake))
        if not results[-1].passed:
            return results  # nothing else is reachable without a handshake

        def entailment_normalization():
            scores = client.score_entailment(PREMISE, HYPOTHESIS)
            # EntailmentScores construction already enforced the distribution contract.
            assert isinstance(scores, EntailmentScores)

        results.append(_check("entailment-normalization", entailment_normalization))

        def otd_normalization():
            scores = client.score_otd(OTD_TEXT)
            assert isinstance(scores, OtdScores)

        results.append(_check("otd-normalization", otd_normalization))

        def id_echo():
            marker = "conformance-id-Ω-42"
            [resp] = batch_score(
                client, [ScoreRequest(id=marker, kind="otd", text=OTD_TEXT)]
            )
            assert resp.id == marker, f"expected id {marker!r}, got {resp.id!r}"
            assert resp.error is None, f"unexpected error: {resp.error}"

        results.append(_check("id-echo", id_echo))

        def error_isolation():
            requests = [
                ScoreRequest(id="good-1", kind="otd", text=OTD_TEXT),
                ScoreRequest(id="bad-2", kind="entailment", premise=PREMISE, hypothesis=None),
                ScoreRequest(id="good-3", kind="entailment", premise=PREMISE, hypothesis=HYPOTHESIS),
            ]
            responses = {r.id: r for r in batch_score(client, requests)}
            assert set(responses) == {"good-1", "bad-2", "good-3"}, "response ids mismatch"
            assert responses["bad-2"].error is not None, "invalid request must yield an error"
            assert responses["good-1"].scores is not None, "valid request failed alongside invalid one"
            assert responses["good-3"].scores is not None, "valid request failed alongside invalid one"

        results.append(_check("error-isolation", error_isolation))

        def malformed_line_recovery():
            with client._lock:
                client._send_line("this is not json {")
                resp = response_from_dict(decode_line(client._recv_line()))
            assert resp.error is not None, "malformed line must yield an error response"
            assert resp.id == "", f"unparseable line should echo id '', got {resp.id!r}"
            follow_up = client.score_otd(OTD_TEXT)  # the process must keep serving
            assert isinstance(follow_up, OtdScores)

        results.append(_check("malformed-line-recovery", malformed_line_recovery))

        def completion_or_error():
            [resp] = batch_score(
                client,
                [ScoreRequest(id="completion-1", kind="completion", prompt=COMPLETION_PROMPT)],
            )
            assert resp.id == "completion-1"
            assert (resp.completion is not None) != (resp.error is not None)

        results.append(_check("completion-or-error", completion_or_error))

    return results


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if len(argv) != 1:
        print("usage: python -m chain_reasoner.backends.conformance BACKEND_SPEC", file=sys.stderr)
        return 64
    try:
        results = run_conformance(argv[0])
    except (BackendError, ProtocolError, ValueError) as exc:
        print(f"FAIL startup: {exc}", file=sys.stderr)
        return 1
    failed = False
    for result in results:
        if result.passed:
            print(f"PASS {result.name}")
        else:
            failed = True
            print(f"FAIL {result.name}: {result.detail}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
