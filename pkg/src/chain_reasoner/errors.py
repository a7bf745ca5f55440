"""Exception types shared across the package."""


class ChainReasonerError(Exception):
    """Base class for all package-specific errors."""


class CorpusError(ChainReasonerError):
    """Raised for unusable corpus-level input (empty corpus, missing file)."""


class RecordParseError(ChainReasonerError):
    """A JSONL record does not match the chain schema."""


class BackendError(ChainReasonerError):
    """Base class for scoring-backend failures."""


class TransportError(BackendError):
    """The backend process/connection failed (spawn, EOF, timeout). Retried once."""


class ScoringError(BackendError):
    """The backend answered with an error message. Never retried."""


class ProtocolError(BackendError):
    """The backend violated the wire contract (bad JSON, bad distribution, bad id)."""


class EvaluationError(ChainReasonerError):
    """An evaluation pass aborted; carries partial progress for diagnostics."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial
