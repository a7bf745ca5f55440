import functools
import operator
import random

import pytest

from chain_reasoner.backends.mock import HashBackend, LexiconBackend
from chain_reasoner.backends.protocol import EntailmentScores
from chain_reasoner.chain_model import StepTag
from chain_reasoner.engine import (
    augment_knowledge,
    direct_score,
    fold_product,
    mul_chain,
    score_chain,
    transition_scores,
)
from chain_reasoner.errors import ScoringError

from conftest import make_chain, random_chain

# Frozen from the documented hash construction over the sample pancakes chain.
PANCAKES_PLAIN_TRANSITIONS = (
    0.35520173915436004,
    0.287635264989668,
    0.534398587245006,
    0.18173147836056458,
    0.040602182285578,
)
PANCAKES_PLAIN_DIRECT = 0.2292284318665448
PANCAKES_KPLUS_TRANSITIONS = (
    0.18625444265108668,
    0.6486326782375094,
    0.06556719755953562,
    0.3891131899733569,
    0.040602182285578,
)
PANCAKES_KPLUS_DIRECT = 0.35779660961756465


class ConstantBackend:
    """Entailment stub returning a fixed probability for every pair."""

    identity = "stub:constant"

    def __init__(self, entailment: float):
        self._value = entailment

    def score_entailment(self, premise, hypothesis):
        rest = 1.0 - self._value
        return EntailmentScores(self._value, rest, 0.0)


def test_transition_count_matches_length():
    chain = make_chain(steps=(("A.", StepTag.RR, None),) * 3)
    assert len(transition_scores(chain, HashBackend())) == 3


def test_pancakes_golden_transitions(pancakes):
    assert tuple(transition_scores(pancakes, HashBackend())) == PANCAKES_PLAIN_TRANSITIONS


def test_identity_transitions_hit_self_entailment():
    text = "You repeat yourself."
    chain = make_chain(steps=((text, StepTag.RR, None),) * 4, implicit=text)
    backend = LexiconBackend()
    scores = transition_scores(chain, backend)
    assert scores == [LexiconBackend.SELF_ENTAILMENT] * 4


def test_mul_identity_and_absorbing():
    chain = make_chain(steps=(("A.", StepTag.RR, None),) * 4)
    assert mul_chain(chain, ConstantBackend(1.0)).mul == 1.0
    assert mul_chain(chain, ConstantBackend(0.0)).mul == 0.0


def test_mul_equals_fold_oracle_bit_for_bit():
    rng = random.Random(421)
    backend = HashBackend()
    for i in range(200):
        chain = random_chain(rng, f"c{i}", rng.randint(1, 8))
        report = mul_chain(chain, backend)
        oracle = functools.reduce(operator.mul, report.transition_scores, 1.0)
        assert report.mul == oracle
        assert report.mul <= min(report.transition_scores) + 1e-12


def test_fold_product_monotone_damping():
    scores = [0.9, 0.8, 0.7]
    base = fold_product(scores)
    assert fold_product(scores + [0.5]) < base
    assert fold_product(scores + [1.0]) == base


def test_direct_score_reads_endpoints_only(pancakes):
    backend = HashBackend()
    assert direct_score(pancakes, backend) == PANCAKES_PLAIN_DIRECT
    # two chains sharing endpoints but different middles: identical direct
    a = make_chain("a", (("Mid one.", StepTag.RR, None), ("End.", StepTag.RR, None)))
    b = make_chain("b", (("Other mid.", StepTag.RR, None), ("End.", StepTag.RR, None)))
    assert direct_score(a, backend) == direct_score(b, backend)


def test_direct_score_self_pair():
    text = "You never change."
    chain = make_chain(steps=((text, StepTag.RR, None),), implicit=text)
    assert direct_score(chain, LexiconBackend()) == LexiconBackend.SELF_ENTAILMENT


def test_backend_errors_annotated_with_transition():
    class FailingBackend:
        identity = "stub:failing"

        def score_entailment(self, premise, hypothesis):
            raise ScoringError("model exploded")

    chain = make_chain(steps=(("A.", StepTag.RR, None),) * 2)
    with pytest.raises(ScoringError, match=r"transition s0->s1"):
        transition_scores(chain, FailingBackend())


# -- augment_knowledge --------------------------------------------------------


def test_augmentation_matches_rendered_form(pancakes):
    augmented = augment_knowledge(pancakes)
    suffix = " and eating too much can make people fat."
    assert augmented.statements[3] == "You eat too much and eating too much can make people fat."
    for j in range(4):
        assert augmented.statements[j] == pancakes.statements[j].rstrip(".") + suffix
    assert augmented.statements[4] == pancakes.statements[4]
    assert augmented.statements[5] == pancakes.statements[5]


def test_augmentation_is_pure(pancakes):
    before = pancakes.statements
    augment_knowledge(pancakes)
    assert pancakes.statements == before


def test_augmentation_noop_without_kir():
    chain = make_chain(steps=(("A.", StepTag.RR, None),) * 3)
    assert augment_knowledge(chain) is chain


def test_augmentation_keeps_tags_and_knowledge(pancakes):
    augmented = augment_knowledge(pancakes)
    assert [s.tag for s in augmented.steps] == [s.tag for s in pancakes.steps]
    assert augmented.steps[3].knowledge == pancakes.steps[3].knowledge


def test_augmentation_multiple_sites_accumulate():
    steps = (
        ("You started it.", StepTag.AIR, None),
        ("You caused it.", StepTag.KIR, "Starters cause things."),
        ("You broke it.", StepTag.RR, None),
        ("You pay for it.", StepTag.KIR, "Breakers pay."),
        ("You owe me.", StepTag.RR, None),
    )
    chain = make_chain(steps=steps, implicit="Something happened here.")
    augmented = augment_knowledge(chain)
    # statements before the first site carry both suffixes, ascending k
    assert augmented.statements[0] == (
        "Something happened here and starters cause things and breakers pay."
    )
    assert augmented.statements[1] == (
        "You started it and starters cause things and breakers pay."
    )
    # between the sites: only the later site's suffix
    assert augmented.statements[2] == "You caused it and breakers pay."
    assert augmented.statements[3] == "You broke it and breakers pay."
    # at and after the second site: unchanged
    assert augmented.statements[4] == "You pay for it."
    assert augmented.statements[5] == "You owe me."


def test_augmentation_include_kir_step_flag(pancakes):
    augmented = augment_knowledge(pancakes, include_kir_step=True)
    assert augmented.statements[4] == (
        "You eat too much which makes you fat and eating too much can make people fat."
    )
    assert augmented.statements[5] == pancakes.statements[5]


def test_augmentation_missing_knowledge_errors():
    chain = make_chain(steps=(("A.", StepTag.KIR, "  "),))
    with pytest.raises(ValueError):
        augment_knowledge(chain)


# -- score_chain --------------------------------------------------------------


def test_kir_free_chain_variants_agree():
    chain = make_chain(steps=(("A.", StepTag.RR, None),) * 4)
    backend = HashBackend()
    plain = score_chain(chain, backend, "plain")
    k_plus = score_chain(chain, backend, "k_plus")
    assert plain.transition_scores == k_plus.transition_scores
    assert plain.mul == k_plus.mul
    assert plain.direct == k_plus.direct


def test_score_chain_goldens(pancakes):
    backend = HashBackend()
    plain = score_chain(pancakes, backend, "plain")
    assert plain.transition_scores == PANCAKES_PLAIN_TRANSITIONS
    assert plain.direct == PANCAKES_PLAIN_DIRECT
    assert plain.mul == fold_product(PANCAKES_PLAIN_TRANSITIONS)
    k_plus = score_chain(pancakes, backend, "k_plus")
    assert k_plus.transition_scores == PANCAKES_KPLUS_TRANSITIONS
    assert k_plus.direct == PANCAKES_KPLUS_DIRECT
    # the KIR step and later transitions score identically in both variants
    assert plain.transition_scores[4] == k_plus.transition_scores[4]


def test_score_chain_rejects_unknown_variant(pancakes):
    with pytest.raises(ValueError):
        score_chain(pancakes, HashBackend(), "k_minus")


def test_report_serialization_round_trip(pancakes):
    report = score_chain(pancakes, HashBackend())
    payload = report.to_dict()
    assert payload["chain_id"] == "pancakes"
    assert payload["transition_scores"] == list(report.transition_scores)
    assert payload["mul"] == report.mul
