"""Knowledge-coverage probing: 2-step prompts, vote aggregation, agreement.

A probe asks a text-completion backend whether it knows a piece of
commonsense and why; human votes on whether the returned explanation
actually explains the knowledge are aggregated by strict majority, and
inter-annotator agreement is reported as nominal Krippendorff's alpha.
"""

from __future__ import annotations

import csv
import math
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .backends.ops import complete
from .errors import CorpusError
from .text import decapitalize_first, strip_terminal_punct

# Few-shot examples shown before every probe question.
FEW_SHOT_BLOCK = (
    "Q: Do you know that junk food are unhealthy?\n"
    "A: Yes.\n"
    "Q: Why?\n"
    "A: Because junk food is high in calories and can cause obesity.\n"
    "\n"
    "Q: Do you know that people hate disasters?\n"
    "A: Yes.\n"
    "Q: Why?\n"
    "A: Because they think that they are going to die.\n"
    "\n"
)


def build_prompt(knowledge: str) -> str:
    """Render the exact 2-step probe prompt for one knowledge sentence.

    The knowledge is decapitalized, its terminal period becomes the question
    mark, and the prompt ends right after the final "A:" so the completion
    is the model's explanation. Byte-stable for a given input.
    """
    if not knowledge or not knowledge.strip():
        raise ValueError("knowledge must be non-empty")
    question = strip_terminal_punct(decapitalize_first(knowledge.strip()))
    return FEW_SHOT_BLOCK + f"Q: Do you know that {question}?\nA: Yes.\nQ: Why?\nA:"


Vote = int  # 1 = explains, 0 = does not explain; None = missing


@dataclass(frozen=True)
class ProbeRecord:
    knowledge: str
    prompt: str
    explanation: str
    votes: tuple[Vote | None, ...] = ()
    model: str = ""

    def to_dict(self) -> dict:
        return {
            "knowledge": self.knowledge,
            "prompt": self.prompt,
            "explanation": self.explanation,
            "votes": list(self.votes),
            "model": self.model,
        }


@dataclass(frozen=True)
class AlphaResult:
    """Nominal Krippendorff's alpha. ``degenerate`` marks the defined
    alpha=1 result for vote matrices where only one label ever occurs."""

    alpha: float
    degenerate: bool
    n_items: int


def krippendorff_alpha(items: Sequence[Sequence[Vote | None]]) -> AlphaResult:
    """alpha = 1 - D_o / D_e with nominal distance over the coincidence matrix.

    ``items`` holds one vote list per item; None entries are missing votes.
    Items with fewer than two present votes cannot be paired and drop out.
    Requires at least two items overall and at least one pairable item.
    """
    if len(items) < 2:
        raise ValueError("need at least 2 items")
    units = [[v for v in item if v is not None] for item in items]
    pairable = [u for u in units if len(u) >= 2]
    if not pairable:
        raise ValueError("need at least one item with 2 or more votes")

    labels = sorted({v for u in pairable for v in u}, key=repr)
    index = {label: i for i, label in enumerate(labels)}
    k = len(labels)
    # Coincidence matrix: each ordered pair of votes within an item
    # contributes 1/(m_u - 1). Cells are fsum-accumulated so the result is
    # bit-identical under item and vote permutations.
    contributions: list[list[list[float]]] = [[[] for _ in range(k)] for _ in range(k)]
    for unit in pairable:
        m = len(unit)
        counts = [0] * k
        for v in unit:
            counts[index[v]] += 1
        for c in range(k):
            for d in range(k):
                pairs = counts[c] * (counts[d] - (1 if c == d else 0))
                if pairs:
                    contributions[c][d].append(pairs / (m - 1))
    o = [[math.fsum(contributions[c][d]) for d in range(k)] for c in range(k)]
    n_c = [math.fsum(o[c]) for c in range(k)]
    n = math.fsum(n_c)
    observed_disagreement = math.fsum(o[c][d] for c in range(k) for d in range(k) if c != d)
    expected_pairs = math.fsum(
        n_c[c] * n_c[d] for c in range(k) for d in range(k) if c != d
    )
    if expected_pairs == 0.0:
        return AlphaResult(alpha=1.0, degenerate=True, n_items=len(pairable))
    alpha = 1.0 - (n - 1.0) * observed_disagreement / expected_pairs
    return AlphaResult(alpha=alpha, degenerate=False, n_items=len(pairable))


@dataclass(frozen=True)
class CoverageReport:
    covered_fraction: dict[str, float]  # per model
    agreement: AlphaResult | None
    n_items: int

    def to_dict(self) -> dict:
        return {
            "covered_fraction": dict(self.covered_fraction),
            "agreement": None
            if self.agreement is None
            else {
                "alpha": self.agreement.alpha,
                "degenerate": self.agreement.degenerate,
                "n_items": self.agreement.n_items,
            },
            "n_items": self.n_items,
        }


def coverage(records: Sequence[ProbeRecord], rule: str = "majority") -> CoverageReport:
    """Fraction of knowledge items whose explanation a strict majority of
    present votes accepts; ties count as not covered."""
    if rule != "majority":
        raise ValueError(f"unknown coverage rule: {rule!r}")
    if not records:
        raise CorpusError("no probe records")
    for record in records:
        if not any(v is not None for v in record.votes):
            raise ValueError(f"record {record.knowledge!r} has no votes")
    by_model: dict[str, list[bool]] = {}
    for record in records:
        present = [v for v in record.votes if v is not None]
        covered = present.count(1) > present.count(0)
        by_model.setdefault(record.model, []).append(covered)
    fractions = {
        model: sum(flags) / len(flags) for model, flags in sorted(by_model.items())
    }
    vote_matrix = [record.votes for record in records]
    try:
        agreement = krippendorff_alpha(vote_matrix)
    except ValueError:
        agreement = None
    return CoverageReport(
        covered_fraction=fractions, agreement=agreement, n_items=len(records)
    )


def run_probe(
    knowledge_sentences: Sequence[str],
    backend,
    votes: Mapping[str, Sequence[Vote | None]] | None = None,
    model: str | None = None,
) -> list[ProbeRecord]:
    """Prompt the backend for every knowledge sentence; items are keyed by
    their 1-based position when attaching votes."""
    votes = votes or {}
    model_id = model if model is not None else getattr(backend, "identity", "")
    records = []
    for i, knowledge in enumerate(knowledge_sentences, start=1):
        prompt = build_prompt(knowledge)
        records.append(
            ProbeRecord(
                knowledge=knowledge,
                prompt=prompt,
                explanation=complete(backend, prompt),
                votes=tuple(votes.get(str(i), ())),
                model=model_id,
            )
        )
    return records


def load_votes(path: str | Path) -> dict[str, list[Vote | None]]:
    """Votes CSV: item_id, annotator_id, label with label in {1, 0, NA}.

    Vote lists are ordered by annotator id so ingestion order cannot change
    downstream aggregates.
    """
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"votes file not found: {path}")
    rows: dict[str, dict[str, Vote | None]] = {}
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"item_id", "annotator_id", "label"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise CorpusError(f"votes CSV must have columns {sorted(required)}")
        for row in reader:
            label = row["label"].strip().upper()
            if label == "NA":
                vote: Vote | None = None
            elif label in ("0", "1"):
                vote = int(label)
            else:
                raise CorpusError(f"bad vote label {row['label']!r} for item {row['item_id']!r}")
            rows.setdefault(row["item_id"], {})[row["annotator_id"]] = vote
    return {
        item: [annotators[a] for a in sorted(annotators)] for item, annotators in rows.items()
    }


def save_records(records: Iterable[ProbeRecord], path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.to_dict(), ensure_ascii=False) + "\n")
