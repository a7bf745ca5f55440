import random

import pytest
from hypothesis import given, settings, strategies as st

from chain_reasoner.backends.mock import HashBackend, LexiconBackend
from chain_reasoner.errors import CorpusError
from chain_reasoner.probe import (
    FEW_SHOT_BLOCK,
    ProbeRecord,
    build_prompt,
    coverage,
    krippendorff_alpha,
    load_votes,
    run_probe,
)

EXPECTED_PROMPT = (
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
    "Q: Do you know that classic things are usually old?\n"
    "A: Yes.\n"
    "Q: Why?\n"
    "A:"
)


def alpha_oracle(items) -> float:
    """Direct-definition oracle: alpha = 1 - D_o / D_e by pair enumeration."""
    units = [[v for v in item if v is not None] for item in items]
    units = [u for u in units if len(u) >= 2]
    n = sum(len(u) for u in units)
    do_num = 0.0
    for unit in units:
        disagreements = sum(1 for a in unit for b in unit if a != b)
        do_num += disagreements / (len(unit) - 1)
    d_o = do_num / n
    pooled = [v for u in units for v in u]
    de_num = sum(1 for a in pooled for b in pooled if a != b)
    if de_num == 0:
        return 1.0
    d_e = de_num / (n * (n - 1))
    return 1.0 - d_o / d_e


# -- build_prompt --------------------------------------------------------------


def test_prompt_contains_few_shot_examples_verbatim():
    prompt = build_prompt("Water is wet.")
    assert "Q: Do you know that junk food are unhealthy?" in prompt
    assert "A: Because they think that they are going to die." in prompt
    assert prompt.startswith(FEW_SHOT_BLOCK)


def test_prompt_golden_bytes():
    assert build_prompt("Classic things are usually old.") == EXPECTED_PROMPT


def test_prompt_question_formatting():
    prompt = build_prompt("Grown-ups don't play with dolls.")
    assert prompt.endswith(
        "Q: Do you know that grown-ups don't play with dolls?\nA: Yes.\nQ: Why?\nA:"
    )


def test_prompt_byte_stable():
    assert build_prompt("Overworking makes people exhausted.") == build_prompt(
        "Overworking makes people exhausted."
    )


def test_prompt_rejects_empty():
    with pytest.raises(ValueError):
        build_prompt("   ")


# -- krippendorff_alpha ---------------------------------------------------------


def test_alpha_perfect_agreement():
    items = [[1, 1, 1], [0, 0, 0], [1, 1, 1], [0, 0, 0]]
    result = krippendorff_alpha(items)
    assert result.alpha == 1.0
    assert not result.degenerate


def test_alpha_degenerate_single_label():
    result = krippendorff_alpha([[1, 1], [1, 1]])
    assert result.alpha == 1.0
    assert result.degenerate


def test_alpha_four_item_fixture_matches_oracle_and_hand_value():
    items = [[1, 1], [0, 0], [1, 0], [0, 1]]
    result = krippendorff_alpha(items)
    assert abs(result.alpha - alpha_oracle(items)) < 1e-12
    assert result.alpha == pytest.approx(0.125, abs=1e-12)


def test_alpha_with_missing_votes_matches_oracle():
    items = [[1, None, 0, 1], [None, None, 1, 1], [0, 0, None, None], [1, 0, 0, None]]
    result = krippendorff_alpha(items)
    assert abs(result.alpha - alpha_oracle(items)) < 1e-12


def test_alpha_random_votes_near_zero():
    rng = random.Random(2024)
    items = [[rng.randint(0, 1) for _ in range(5)] for _ in range(2000)]
    result = krippendorff_alpha(items)
    assert abs(result.alpha) < 0.05


def test_alpha_preconditions():
    with pytest.raises(ValueError):
        krippendorff_alpha([[1, 0]])
    with pytest.raises(ValueError):
        krippendorff_alpha([[1], [0]])


@settings(deadline=None, max_examples=50)
@given(
    items=st.lists(
        st.lists(st.sampled_from([0, 1, None]), min_size=2, max_size=5),
        min_size=2,
        max_size=12,
    ),
    seed=st.integers(0, 2**16),
)
def test_alpha_permutation_invariance(items, seed):
    pairable = [u for u in items if sum(v is not None for v in u) >= 2]
    if not pairable:
        return  # precondition not satisfiable for this draw
    rng = random.Random(seed)
    shuffled = [list(item) for item in items]
    rng.shuffle(shuffled)
    for item in shuffled:
        rng.shuffle(item)
    assert krippendorff_alpha(items) == krippendorff_alpha(shuffled)


# -- coverage -------------------------------------------------------------------


def _record(votes, knowledge="K.", model="gpt-mock"):
    return ProbeRecord(
        knowledge=knowledge, prompt="P", explanation="E", votes=tuple(votes), model=model
    )


def test_strict_majority_covers():
    report = coverage([_record([1, 1, 1, 0, 0]), _record([1, 1, 0, 0, 0])])
    assert report.covered_fraction == {"gpt-mock": 0.5}


def test_tie_is_not_covered():
    report = coverage([_record([1, 1, 0, 0]), _record([1, 1, 1, 0])])
    assert report.covered_fraction == {"gpt-mock": 0.5}


def test_missing_votes_use_present_majority():
    report = coverage([_record([1, 1, None, None, None]), _record([0, None, 1, None, None])])
    # [1,1] covered; [0,1] tie -> not covered
    assert report.covered_fraction == {"gpt-mock": 0.5}


def test_ten_record_hand_count():
    votes = [
        [1, 1, 1, 1, 1],  # covered
        [1, 1, 1, 0, 0],  # covered
        [0, 0, 1, 1, 1],  # covered
        [0, 0, 0, 1, 1],  # not
        [0, 0, 0, 0, 0],  # not
        [1, 0, 1, 0, 1],  # covered
        [1, 1, 0, 0, None],  # tie -> not
        [1, None, None, None, None],  # covered
        [0, None, None, None, None],  # not
        [1, 1, 1, 1, 0],  # covered
    ]
    report = coverage([_record(v) for v in votes])
    assert report.covered_fraction == {"gpt-mock": 0.6}
    assert report.n_items == 10
    assert report.agreement is not None


def test_vote_flip_complements_on_tie_free_records():
    votes = [[1, 1, 1], [0, 0, 0], [1, 1, 0], [0, 0, 1], [1, 0, 1]]
    flipped = [[1 - v for v in row] for row in votes]
    forward = coverage([_record(v) for v in votes]).covered_fraction["gpt-mock"]
    backward = coverage([_record(v) for v in flipped]).covered_fraction["gpt-mock"]
    assert forward == pytest.approx(1.0 - backward)


def test_coverage_order_invariant():
    votes = [[1, 1, 1], [0, 0, 0], [1, 0, 1]]
    records = [_record(v) for v in votes]
    assert coverage(records) == coverage(list(reversed(records)))


def test_coverage_by_model():
    records = [_record([1, 1, 1], model="a"), _record([0, 0, 0], model="b")]
    report = coverage(records)
    assert report.covered_fraction == {"a": 1.0, "b": 0.0}


def test_coverage_preconditions():
    with pytest.raises(CorpusError):
        coverage([])
    with pytest.raises(ValueError):
        coverage([_record([None, None])])
    with pytest.raises(ValueError):
        coverage([_record([1, 1])], rule="unanimous")


# -- votes CSV and probe runner --------------------------------------------------


def test_load_votes(tmp_path):
    path = tmp_path / "votes.csv"
    path.write_text(
        "item_id,annotator_id,label\n"
        "1,a2,0\n"
        "1,a1,1\n"
        "2,a1,NA\n"
        "2,a2,1\n",
        encoding="utf-8",
    )
    votes = load_votes(path)
    assert votes == {"1": [1, 0], "2": [None, 1]}


def test_load_votes_rejects_bad_label(tmp_path):
    path = tmp_path / "votes.csv"
    path.write_text("item_id,annotator_id,label\n1,a1,maybe\n", encoding="utf-8")
    with pytest.raises(CorpusError):
        load_votes(path)


def test_run_probe_attaches_votes_by_position():
    votes = {"1": [1, 1, 0], "2": [0, 0, 1]}
    records = run_probe(
        ["Classic things are usually old.", "Overworking makes people exhausted."],
        HashBackend(),
        votes,
    )
    assert [r.votes for r in records] == [(1, 1, 0), (0, 0, 1)]
    assert records[0].prompt == EXPECTED_PROMPT
    assert records[0].explanation == HashBackend().complete(EXPECTED_PROMPT)
    assert records[0].model == "mock:hash"


def test_run_probe_lexicon_completion_is_fixed():
    [record] = run_probe(["Water is wet."], LexiconBackend(), {"1": [1]})
    assert record.explanation == "Because that is common knowledge."
