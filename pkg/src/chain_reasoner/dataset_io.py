"""Corpus file formats: JSONL chains, attribute lists, blocklists, stats.

Canonical chain format is JSON Lines, UTF-8, one chain per line:

    {"id": str,
     "attribute": {"text": str, "category": "AM|HAVE|MY|OTHER", "subcategory": str|null},
     "implicit": str, "explicit": str, "non_offensive": str,
     "chain": [{"text": str, "tag": "AIR|KIR|RR", "knowledge": str|null}]}

Unknown fields at any level are preserved on round-trip but otherwise ignored.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .chain_model import (
    Attribute,
    Category,
    ReasoningChain,
    ReasoningStep,
    StepTag,
    Subcategory,
    Violation,
    ValidationResult,
    kir_sites,
    tag_frequencies,
    validate_chain,
)
from .errors import CorpusError, RecordParseError

_CHAIN_KEYS = ("id", "attribute", "implicit", "explicit", "non_offensive", "chain")
_ATTR_KEYS = ("text", "category", "subcategory")
_STEP_KEYS = ("text", "tag", "knowledge")


def _require_str(obj: dict, key: str, where: str) -> str:
    value = obj.get(key)
    if not isinstance(value, str):
        raise RecordParseError(f"{where}: field {key!r} must be a string")
    return value


def attribute_from_dict(obj: dict) -> Attribute:
    if not isinstance(obj, dict):
        raise RecordParseError("attribute must be an object")
    text = _require_str(obj, "text", "attribute")
    category = obj.get("category")
    subcategory = obj.get("subcategory")
    try:
        cat = Category(category) if category is not None else None
        sub = Subcategory(subcategory) if subcategory is not None else None
    except ValueError as exc:
        raise RecordParseError(f"attribute: {exc}") from None
    extra = {k: v for k, v in obj.items() if k not in _ATTR_KEYS}
    return Attribute(text=text, category=cat, subcategory=sub, extra=extra)


def step_from_dict(obj: dict, index: int) -> ReasoningStep:
    if not isinstance(obj, dict):
        raise RecordParseError(f"chain[{index}] must be an object")
    text = _require_str(obj, "text", f"chain[{index}]")
    try:
        tag = StepTag(obj.get("tag"))
    except ValueError:
        raise RecordParseError(f"chain[{index}]: unknown tag {obj.get('tag')!r}") from None
    knowledge = obj.get("knowledge")
    if knowledge is not None and not isinstance(knowledge, str):
        raise RecordParseError(f"chain[{index}]: knowledge must be a string or null")
    extra = {k: v for k, v in obj.items() if k not in _STEP_KEYS}
    return ReasoningStep(text=text, tag=tag, knowledge=knowledge, extra=extra)


def chain_from_dict(obj: dict) -> ReasoningChain:
    if not isinstance(obj, dict):
        raise RecordParseError("record must be a JSON object")
    steps_raw = obj.get("chain")
    if not isinstance(steps_raw, list):
        raise RecordParseError("field 'chain' must be a list of steps")
    extra = {k: v for k, v in obj.items() if k not in _CHAIN_KEYS}
    return ReasoningChain(
        id=_require_str(obj, "id", "record"),
        attribute=attribute_from_dict(obj.get("attribute")),
        implicit=_require_str(obj, "implicit", "record"),
        explicit=_require_str(obj, "explicit", "record"),
        non_offensive=_require_str(obj, "non_offensive", "record"),
        steps=tuple(step_from_dict(s, i) for i, s in enumerate(steps_raw)),
        extra=extra,
    )


def attribute_to_dict(attr: Attribute) -> dict:
    out: dict = {
        "text": attr.text,
        "category": attr.category.value if attr.category else None,
        "subcategory": attr.subcategory.value if attr.subcategory else None,
    }
    out.update(attr.extra)
    return out


def chain_to_dict(chain: ReasoningChain) -> dict:
    steps = []
    for step in chain.steps:
        step_obj: dict = {"text": step.text, "tag": step.tag.value, "knowledge": step.knowledge}
        step_obj.update(step.extra)
        steps.append(step_obj)
    out: dict = {
        "id": chain.id,
        "attribute": attribute_to_dict(chain.attribute),
        "implicit": chain.implicit,
        "explicit": chain.explicit,
        "non_offensive": chain.non_offensive,
        "chain": steps,
    }
    out.update(chain.extra)
    return out


@dataclass(frozen=True)
class RecordReport:
    """Validation outcome for one input line."""

    line_no: int
    chain_id: str | None
    violations: tuple[Violation, ...]
    loaded: bool

    @property
    def errors(self) -> tuple[Violation, ...]:
        return tuple(v for v in self.violations if v.severity == "error")

    @property
    def warnings(self) -> tuple[Violation, ...]:
        return tuple(v for v in self.violations if v.severity == "warning")


def load_corpus(
    path: str | Path,
    mode: str = "strict",
    blocklist: frozenset[str] | set[str] | None = None,
) -> tuple[list[ReasoningChain], list[RecordReport]]:
    """Load a JSONL corpus, one report per input line.

    Malformed JSON and schema violations are reported with their line number
    and loading continues. Records whose validation carries error-severity
    violations (including duplicate ids) are dropped; warning-bearing records
    load in both modes.
    """
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"corpus file not found: {path}")
    chains: list[ReasoningChain] = []
    reports: list[RecordReport] = []
    seen_ids: set[str] = set()
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                reports.append(
                    RecordReport(
                        line_no,
                        None,
                        (Violation("malformed-json", str(exc), "error"),),
                        loaded=False,
                    )
                )
                continue
            try:
                chain = chain_from_dict(obj)
            except RecordParseError as exc:
                chain_id = obj.get("id") if isinstance(obj, dict) else None
                reports.append(
                    RecordReport(
                        line_no,
                        chain_id if isinstance(chain_id, str) else None,
                        (Violation("invalid-record", str(exc), "error"),),
                        loaded=False,
                    )
                )
                continue
            result: ValidationResult = validate_chain(chain, mode=mode, blocklist=blocklist)
            violations = result.violations
            if chain.id in seen_ids:
                violations = (
                    Violation("duplicate-id", f"id {chain.id!r} already seen", "error"),
                ) + violations
            ok = not any(v.severity == "error" for v in violations)
            if ok:
                seen_ids.add(chain.id)
                chains.append(chain)
            reports.append(RecordReport(line_no, chain.id, violations, loaded=ok))
    return chains, reports


def save_corpus(chains: Iterable[ReasoningChain], path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for chain in chains:
            fh.write(json.dumps(chain_to_dict(chain), ensure_ascii=False) + "\n")


@dataclass(frozen=True)
class CorpusStats:
    n_examples: int
    mean_chain_length: float
    min_length: int
    max_length: int
    per_length_counts: dict[int, int]
    tag_fractions: dict[StepTag, float]
    kir_site_count: int


def corpus_stats(chains: Sequence[ReasoningChain]) -> CorpusStats:
    if not chains:
        raise CorpusError("empty corpus")
    lengths = [c.length for c in chains]
    per_length: dict[int, int] = {}
    for length in lengths:
        per_length[length] = per_length.get(length, 0) + 1
    return CorpusStats(
        n_examples=len(chains),
        mean_chain_length=sum(lengths) / len(lengths),
        min_length=min(lengths),
        max_length=max(lengths),
        per_length_counts=dict(sorted(per_length.items())),
        tag_fractions=tag_frequencies(chains),
        kir_site_count=sum(len(kir_sites(c)) for c in chains),
    )


def filter_by_length(
    chains: Sequence[ReasoningChain], lengths: Iterable[int]
) -> list[ReasoningChain]:
    wanted = set(lengths)
    return [c for c in chains if c.length in wanted]


def sample_attributes(
    attributes: Sequence[Attribute], per_category: int, seed: int
) -> list[Attribute]:
    """Draw exactly ``per_category`` attributes from each of the four categories.

    Sampling uses the stdlib Mersenne Twister (random.Random) seeded with
    ``seed``, so a fixed (input order, seed) pair always yields the same draw.
    """
    if per_category < 0:
        raise ValueError("per_category must be >= 0")
    for attr in attributes:
        if attr.category is None:
            raise CorpusError(f"attribute is uncategorized: {attr.text!r}")
    rng = random.Random(seed)
    out: list[Attribute] = []
    for category in Category:
        members = [a for a in attributes if a.category is category]
        if len(members) < per_category:
            raise CorpusError(
                f"category {category.value} has {len(members)} attributes, "
                f"need {per_category}"
            )
        out.extend(rng.sample(members, per_category))
    return out


def load_attributes(path: str | Path) -> list[Attribute]:
    """Read attributes from JSONL ({"text": ...}) or plain text, one per line."""
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"attribute file not found: {path}")
    out: list[Attribute] = []
    with path.open(encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("{"):
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise RecordParseError(f"bad attribute record: {exc}") from None
                out.append(attribute_from_dict(obj))
            else:
                out.append(Attribute(text=line))
    return out


def save_attributes(attributes: Iterable[Attribute], path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for attr in attributes:
            fh.write(json.dumps(attribute_to_dict(attr), ensure_ascii=False) + "\n")


def load_blocklist(path: str | Path) -> frozenset[str]:
    """One lowercase term per line; blank lines ignored."""
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"blocklist file not found: {path}")
    terms = set()
    with path.open(encoding="utf-8") as fh:
        for line in fh:
            term = line.strip().lower()
            if term:
                terms.add(term)
    return frozenset(terms)
