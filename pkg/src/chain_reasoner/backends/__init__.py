"""Scoring-backend abstraction: wire protocol, transports, and mocks.

A backend is anything that answers entailment / offensive-text / completion
requests. In-process mocks implement the Python interface directly; external
processes speak newline-delimited JSON over stdio or TCP (see protocol.py)
and are driven through the clients in client.py.
"""

from .protocol import (
    PROTOCOL_NAME,
    EntailmentScores,
    OtdScores,
    ScoreRequest,
    ScoreResponse,
)
from .mock import HashBackend, LexiconBackend
from .client import ProcessBackend, TcpBackend, parse_backend_spec
from .ops import batch_score, complete, score_entailment, score_otd

__all__ = [
    "PROTOCOL_NAME",
    "EntailmentScores",
    "OtdScores",
    "ScoreRequest",
    "ScoreResponse",
    "HashBackend",
    "LexiconBackend",
    "ProcessBackend",
    "TcpBackend",
    "parse_backend_spec",
    "batch_score",
    "complete",
    "score_entailment",
    "score_otd",
]
