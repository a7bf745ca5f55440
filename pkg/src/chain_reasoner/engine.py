"""Chain scoring: per-transition entailment, the product model, direct
scoring, and knowledge augmentation.

A chain of length L has transitions s0->s1, ..., s_{L-1}->s_L. The product
model multiplies the entailment label probability of every transition,
left to right; the direct score is the single-hop entailment of the final
statement given the implicit one. Knowledge augmentation conjoins each
knowledge sentence onto every statement strictly before its insertion step.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Sequence

from .backends.ops import score_entailment
from .chain_model import ReasoningChain, kir_sites
from .errors import BackendError
from .text import join_with_and

VARIANTS = ("plain", "k_plus")


@dataclass(frozen=True)
class ChainScoreReport:
    """All scores for one chain under one variant."""

    chain_id: str
    variant: str
    transition_scores: tuple[float, ...]
    mul: float
    direct: float

    def to_dict(self) -> dict:
        return {
            "chain_id": self.chain_id,
            "variant": self.variant,
            "transition_scores": list(self.transition_scores),
            "mul": self.mul,
            "direct": self.direct,
        }


def fold_product(scores: Sequence[float]) -> float:
    """Sequential left-to-right product; the chain probability."""
    out = 1.0
    for score in scores:
        out *= score
    return out


def transition_scores(chain: ReasoningChain, backend) -> list[float]:
    """Entailment label probability for each adjacent statement pair."""
    statements = chain.statements
    scores: list[float] = []
    for i, (premise, hypothesis) in enumerate(zip(statements, statements[1:])):
        try:
            scores.append(score_entailment(backend, premise, hypothesis).entailment)
        except BackendError as exc:
            raise type(exc)(f"transition s{i}->s{i + 1} of chain {chain.id!r}: {exc}") from exc
    return scores


def direct_score(chain: ReasoningChain, backend) -> float:
    """Single-hop score of the final statement given the implicit one."""
    return score_entailment(backend, chain.implicit, chain.steps[-1].text).entailment


def augment_knowledge(chain: ReasoningChain, include_kir_step: bool = False) -> ReasoningChain:
    """Conjoin each KIR site's knowledge onto the statements before it.

    For a site at step k with knowledge K, every statement s0..s_{k-1}
    (the implicit statement included) becomes "<statement> and <k>", with
    the statement's terminal period dropped and K's first letter lowercased
    unless it looks like a proper noun. The KIR step itself and everything
    after it are untouched by that site; ``include_kir_step=True`` selects
    the alternative reading where s_k also receives the suffix. Sites apply
    in ascending step order, so overlapping prefixes accumulate suffixes.
    Pure: the input chain is never mutated; a KIR-free chain is returned
    unchanged.
    """
    sites = kir_sites(chain)
    if not sites:
        return chain
    for site in sites:
        if not site.knowledge.strip():
            raise ValueError(f"KIR step {site.k} of chain {chain.id!r} has no knowledge")
    context = chain.statements

    def augmented(position: int, text: str) -> str:
        for site in sites:
            limit = site.k + 1 if include_kir_step else site.k
            if position < limit:
                text = join_with_and(text, site.knowledge, context)
        return text

    new_steps = tuple(
        dataclasses.replace(step, text=augmented(position, step.text))
        for position, step in enumerate(chain.steps, start=1)
    )
    return dataclasses.replace(chain, implicit=augmented(0, chain.implicit), steps=new_steps)


def score_chain(chain: ReasoningChain, backend, variant: str = "plain") -> ChainScoreReport:
    """Full report for one chain: transitions, their product, and direct."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant: {variant!r}")
    scored = augment_knowledge(chain) if variant == "k_plus" else chain
    transitions = transition_scores(scored, backend)
    return ChainScoreReport(
        chain_id=chain.id,
        variant=variant,
        transition_scores=tuple(transitions),
        mul=fold_product(transitions),
        direct=direct_score(scored, backend),
    )


def mul_chain(chain: ReasoningChain, backend) -> ChainScoreReport:
    """Product-model report on the chain as-is (plain variant)."""
    return score_chain(chain, backend, variant="plain")
