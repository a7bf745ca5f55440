from __future__ import annotations

import random
import sys
from pathlib import Path

import pytest

from chain_reasoner.chain_model import Attribute, Category, ReasoningChain, ReasoningStep, StepTag
from chain_reasoner.dataset_io import load_corpus

FIXTURES = Path(__file__).parent / "fixtures"
SAMPLE_CORPUS = FIXTURES / "sample_chains.jsonl"

# Blocklist hitting every explicit statement of the sample corpus.
SAMPLE_BLOCKLIST = frozenset({"fat", "old", "uneducated", "awful"})

MOCK_HASH_CMD = f"cmd:{sys.executable} -m chain_reasoner.backends.serve_mock --mode hash"


@pytest.fixture(scope="session")
def sample_corpus_path() -> Path:
    return SAMPLE_CORPUS


@pytest.fixture()
def sample_chains() -> list[ReasoningChain]:
    chains, _ = load_corpus(SAMPLE_CORPUS, mode="strict")
    assert len(chains) == 4
    return chains


@pytest.fixture()
def pancakes(sample_chains) -> ReasoningChain:
    return next(c for c in sample_chains if c.id == "pancakes")


def make_chain(
    chain_id: str = "synthetic",
    steps: tuple[tuple[str, StepTag, str | None], ...] = (),
    implicit: str = "You would know about that.",
    explicit: str = "You are mean.",
    non_offensive: str = "That sounds nice.",
    attribute_text: str = "I collect stamps.",
) -> ReasoningChain:
    return ReasoningChain(
        id=chain_id,
        attribute=Attribute(text=attribute_text, category=Category.HAVE),
        implicit=implicit,
        explicit=explicit,
        non_offensive=non_offensive,
        steps=tuple(ReasoningStep(text=t, tag=tag, knowledge=k) for t, tag, k in steps),
    )


def random_chain(rng: random.Random, chain_id: str, length: int) -> ReasoningChain:
    """A lenient-mode chain with arbitrary-but-valid structure."""
    words = ["plants", "water", "gardens", "need", "grow", "care", "light", "daily"]
    def sentence() -> str:
        picked = rng.sample(words, k=rng.randint(3, 6))
        return (" ".join(picked)).capitalize() + "."

    steps = []
    for i in range(length):
        if i == 0:
            steps.append((sentence(), StepTag.AIR, None))
        elif rng.random() < 0.3:
            steps.append((sentence(), StepTag.KIR, sentence()))
        else:
            steps.append((sentence(), StepTag.RR, None))
    chain = make_chain(chain_id=chain_id, steps=tuple(steps), implicit=sentence())
    return chain
