"""Domain types and validation for attribute-conditioned reasoning chains.

A chain starts from an implicitly offensive statement (step 0), walks through
tagged rewrites (attribute insertion, knowledge insertion, rephrasing) and
ends at an explicitly offensive statement. The chain length L is the number
of rewrite steps, so a chain always has exactly L scorable transitions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

from .errors import CorpusError
from .text import has_first_person_marker, word_tokens


class Category(str, Enum):
    AM = "AM"
    HAVE = "HAVE"
    MY = "MY"
    OTHER = "OTHER"


class Subcategory(str, Enum):
    AM_NOUN = "AM-noun"
    AM_NUMBER = "AM-number"
    AM_STATUS = "AM-status"
    AM_OTHER = "AM-other"
    HAVE_PREFERENCE = "HAVE-preference"
    HAVE_STATUS = "HAVE-status"
    HAVE_OTHER = "HAVE-other"
    MY_PREFERENCE = "MY-preference"
    MY_OTHER = "MY-other"


# Which subcategories belong to which category family.
SUBCATEGORY_FAMILY: dict[Category, frozenset[Subcategory]] = {
    Category.AM: frozenset(
        {Subcategory.AM_NOUN, Subcategory.AM_NUMBER, Subcategory.AM_STATUS, Subcategory.AM_OTHER}
    ),
    Category.HAVE: frozenset(
        {Subcategory.HAVE_PREFERENCE, Subcategory.HAVE_STATUS, Subcategory.HAVE_OTHER}
    ),
    Category.MY: frozenset({Subcategory.MY_PREFERENCE, Subcategory.MY_OTHER}),
    Category.OTHER: frozenset(),
}


class StepTag(str, Enum):
    AIR = "AIR"  # attribute inserted into the first rewrite
    KIR = "KIR"  # external commonsense knowledge introduced
    RR = "RR"    # rephrasing with equivalent meaning


@dataclass(frozen=True)
class Attribute:
    """A first-person persona statement the chain is conditioned on."""

    text: str
    category: Category | None = None
    subcategory: Subcategory | None = None
    extra: Mapping[str, object] = field(default_factory=dict)


@dataclass(frozen=True)
class ReasoningStep:
    """One rewrite step; KIR steps carry the knowledge sentence they inject."""

    text: str
    tag: StepTag
    knowledge: str | None = None
    extra: Mapping[str, object] = field(default_factory=dict)


@dataclass(frozen=True)
class ReasoningChain:
    id: str
    attribute: Attribute
    implicit: str
    explicit: str
    non_offensive: str
    steps: tuple[ReasoningStep, ...]
    extra: Mapping[str, object] = field(default_factory=dict)

    @property
    def length(self) -> int:
        """Number of rewrite steps (step 0 excluded) = number of transitions."""
        return len(self.steps)

    @property
    def statements(self) -> tuple[str, ...]:
        """All statements in order: implicit (step 0) followed by each rewrite."""
        return (self.implicit, *(step.text for step in self.steps))


@dataclass(frozen=True)
class KirSite:
    """A knowledge-insertion point: 1-based step index k and its knowledge."""

    chain_id: str
    k: int
    knowledge: str


Severity = str  # "error" | "warning"

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    severity: Severity


@dataclass(frozen=True)
class ValidationResult:
    chain_id: str
    violations: tuple[Violation, ...]

    @property
    def errors(self) -> tuple[Violation, ...]:
        return tuple(v for v in self.violations if v.severity == ERROR)

    @property
    def warnings(self) -> tuple[Violation, ...]:
        return tuple(v for v in self.violations if v.severity == WARNING)

    @property
    def ok(self) -> bool:
        """True when there is no error-severity violation (warnings allowed)."""
        return not self.errors


STRICT_MIN_LENGTH = 3
STRICT_MAX_LENGTH = 6


def validate_chain(
    chain: ReasoningChain,
    mode: str = "strict",
    blocklist: frozenset[str] | set[str] | None = None,
) -> ValidationResult:
    """Check every structural invariant of a chain.

    Pure: identical input yields the identical, stably ordered violation list.
    Structural problems (empty steps, knowledge on a non-KIR step, a KIR step
    without knowledge) are always errors. Length bounds (3..6) and AIR
    placement are errors in strict mode, warnings in lenient mode. A mismatch
    between the explicit statement and the final step text is always a
    warning: the dataset contains near matches. In strict mode, blocklist
    terms found in the attribute are flagged as errors.
    """
    if mode not in ("strict", "lenient"):
        raise ValueError(f"unknown validation mode: {mode!r}")
    strict = mode == "strict"
    bound_severity = ERROR if strict else WARNING
    out: list[Violation] = []

    attr = chain.attribute
    if not attr.text.strip():
        out.append(Violation("attribute-empty", "attribute text is empty", ERROR))
    elif not has_first_person_marker(attr.text):
        out.append(
            Violation(
                "attribute-not-first-person",
                f"attribute lacks a first-person marker: {attr.text!r}",
                ERROR,
            )
        )
    if attr.category is None:
        out.append(Violation("attribute-missing-category", "attribute has no category", ERROR))
    elif attr.subcategory is not None and attr.subcategory not in SUBCATEGORY_FAMILY[attr.category]:
        out.append(
            Violation(
                "subcategory-family-mismatch",
                f"subcategory {attr.subcategory.value} does not belong to {attr.category.value}",
                ERROR,
            )
        )
    if strict and blocklist:
        hits = sorted(set(word_tokens(attr.text)) & set(blocklist))
        if hits:
            out.append(
                Violation(
                    "blocklisted-attribute-term",
                    f"attribute contains blocklisted term(s): {', '.join(hits)}",
                    ERROR,
                )
            )

    if not chain.implicit.strip():
        out.append(Violation("empty-implicit", "implicit statement (step 0) is empty", ERROR))

    if not chain.steps:
        out.append(Violation("empty-chain", "chain has no rewrite steps", ERROR))
        return ValidationResult(chain.id, tuple(out))

    for i, step in enumerate(chain.steps, start=1):
        if not step.text.strip():
            out.append(Violation("empty-step-text", f"step {i} has empty text", ERROR))
        if step.tag is not StepTag.KIR and step.knowledge is not None:
            out.append(
                Violation(
                    "knowledge-on-non-kir",
                    f"step {i} is tagged {step.tag.value} but carries knowledge",
                    ERROR,
                )
            )
        if step.tag is StepTag.KIR and not (step.knowledge or "").strip():
            out.append(
                Violation("kir-missing-knowledge", f"KIR step {i} has no knowledge sentence", ERROR)
            )

    air_positions = [i for i, step in enumerate(chain.steps, start=1) if step.tag is StepTag.AIR]
    if len(air_positions) > 1:
        out.append(
            Violation(
                "multiple-air-steps",
                f"chain has {len(air_positions)} AIR steps (at most one allowed)",
                bound_severity,
            )
        )
    elif air_positions and air_positions[0] != 1:
        out.append(
            Violation(
                "air-not-on-first-step",
                f"AIR tag is on step {air_positions[0]}, expected step 1",
                bound_severity,
            )
        )

    length = chain.length
    if length < STRICT_MIN_LENGTH or length > STRICT_MAX_LENGTH:
        out.append(
            Violation(
                "length-out-of-bounds",
                f"chain length {length} outside [{STRICT_MIN_LENGTH}, {STRICT_MAX_LENGTH}]",
                bound_severity,
            )
        )

    if chain.explicit != chain.steps[-1].text:
        out.append(
            Violation(
                "explicit-final-mismatch",
                f"explicit statement {chain.explicit!r} differs from final step "
                f"{chain.steps[-1].text!r}",
                WARNING,
            )
        )

    return ValidationResult(chain.id, tuple(out))


def kir_sites(chain: ReasoningChain) -> list[KirSite]:
    """All knowledge-insertion sites in step order; may be empty."""
    return [
        KirSite(chain.id, k, step.knowledge or "")
        for k, step in enumerate(chain.steps, start=1)
        if step.tag is StepTag.KIR
    ]


def tag_frequencies(chains: Iterable[ReasoningChain]) -> dict[StepTag, float]:
    """Fraction of each tag over all steps of all chains; fractions sum to 1."""
    counts = {tag: 0 for tag in StepTag}
    total = 0
    for chain in chains:
        for step in chain.steps:
            counts[step.tag] += 1
            total += 1
    if total == 0:
        raise CorpusError("no chains")
    return {tag: counts[tag] / total for tag in StepTag}
