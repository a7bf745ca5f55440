"""Deterministic mock backends, usable in-process or as a spawned sidecar.

Two modes:

* hash: scores are a pure function of the input strings via SHA-256, giving
  stable pseudo-random distributions for property tests. The entailment key
  is ``premise + "§" + hypothesis``; the first three 8-byte words of the
  digest (plus one, to avoid zeros) are normalized into the label triple.
  OTD hashes ``"otd§" + text`` into two words; completions echo a digest
  prefix.

* lexicon: human-legible rules where entailment is a linear function of how much
  of the hypothesis' vocabulary the premise covers (identical sentences hit
  ``SELF_ENTAILMENT``, the mode's maximum), and a text is offensive when it
  contains a blocklisted term.

Run as a process: ``python -m chain_reasoner.backends.serve_mock --mode hash``.
"""

from __future__ import annotations

import hashlib

from ..text import word_tokens
from .protocol import EntailmentScores, OtdScores

_KEY_SEP = "§"


def _digest_words(key: str, n: int) -> list[int]:
    digest = hashlib.sha256(key.encode("utf-8")).digest()
    return [int.from_bytes(digest[8 * i : 8 * (i + 1)], "big") + 1 for i in range(n)]


class HashBackend:
    """Stable pseudo-random scores from a documented SHA-256 construction."""

    identity = "mock:hash"

    def score_entailment(self, premise: str, hypothesis: str) -> EntailmentScores:
        w = _digest_words(premise + _KEY_SEP + hypothesis, 3)
        total = sum(w)
        return EntailmentScores(
            entailment=w[0] / total, neutral=w[1] / total, contradiction=w[2] / total
        )

    def score_otd(self, text: str) -> OtdScores:
        w = _digest_words("otd" + _KEY_SEP + text, 2)
        total = sum(w)
        return OtdScores(offensive=w[0] / total, non_offensive=w[1] / total)

    def complete(self, prompt: str) -> str:
        digest = hashlib.sha256(("completion" + _KEY_SEP + prompt).encode("utf-8")).hexdigest()
        return f"Because {digest[:12]}."


class LexiconBackend:
    """Rule mock: token overlap drives entailment, blocklist hits drive OTD.

    entailment = SELF_ENTAILMENT * overlap + FLOOR_ENTAILMENT * (1 - overlap),
    where overlap is the fraction of distinct hypothesis tokens present in
    the premise; the remainder splits 60/40 into neutral/contradiction.
    A text with n distinct blocklist hits scores offensive
    min(0.9, 0.6 + 0.1 * (n - 1)); with none, 0.1.
    """

    SELF_ENTAILMENT = 0.95  # maximum, reached when premise covers the hypothesis
    FLOOR_ENTAILMENT = 0.05

    def __init__(self, blocklist: frozenset[str] | set[str] = frozenset()):
        self.blocklist = frozenset(t.lower() for t in blocklist)
        self.identity = "mock:lexicon"

    def score_entailment(self, premise: str, hypothesis: str) -> EntailmentScores:
        hyp = set(word_tokens(hypothesis))
        prem = set(word_tokens(premise))
        overlap = len(hyp & prem) / len(hyp) if hyp else 0.0
        entailment = self.SELF_ENTAILMENT * overlap + self.FLOOR_ENTAILMENT * (1.0 - overlap)
        neutral = (1.0 - entailment) * 0.6
        return EntailmentScores(
            entailment=entailment, neutral=neutral, contradiction=1.0 - entailment - neutral
        )

    def score_otd(self, text: str) -> OtdScores:
        hits = len(set(word_tokens(text)) & self.blocklist)
        offensive = min(0.9, 0.6 + 0.1 * (hits - 1)) if hits else 0.1
        return OtdScores(offensive=offensive, non_offensive=1.0 - offensive)

    def complete(self, prompt: str) -> str:
        return "Because that is common knowledge."


def build_mock(mode: str, blocklist: frozenset[str] | set[str] = frozenset()):
    if mode == "hash":
        return HashBackend()
    if mode == "lexicon":
        return LexiconBackend(blocklist)
    raise ValueError(f"unknown mock mode: {mode!r}")
