import pytest

from chain_reasoner.backends.mock import HashBackend, LexiconBackend
from chain_reasoner.backends.protocol import OtdScores
from chain_reasoner.chain_model import StepTag
from chain_reasoner.engine import score_chain
from chain_reasoner.errors import CorpusError, EvaluationError, ScoringError
from chain_reasoner.evaluation import (
    classification_accuracy,
    combine_full_accuracy,
    full_accuracy_to_csv,
    is_offensive,
    kir_analysis,
    kir_report_to_csv,
    per_step_accuracy,
    per_step_accuracy_to_csv,
    step_score_table,
    step_table_to_csv,
    trend_statistic,
)

from conftest import SAMPLE_BLOCKLIST, make_chain


@pytest.fixture()
def lexicon():
    return LexiconBackend(SAMPLE_BLOCKLIST)


def test_tie_resolves_non_offensive():
    assert not is_offensive(OtdScores(0.5, 0.5))
    assert is_offensive(OtdScores(0.6, 0.4))


def test_classification_accuracy_explicit(sample_chains, lexicon):
    assert classification_accuracy(sample_chains, lexicon, "explicit") == 1.0


def test_classification_accuracy_implicit(sample_chains, lexicon):
    # Three implicit statements carry no blocklist term; the contacts chain's
    # implicit statement contains "old", so it alone is classified offensive.
    assert classification_accuracy(sample_chains, lexicon, "implicit") == 0.25


def test_classification_accuracy_non_offensive(sample_chains, lexicon):
    assert classification_accuracy(sample_chains, lexicon, "non_offensive") == 1.0


def test_classification_accuracy_empty_errors(lexicon):
    with pytest.raises(CorpusError):
        classification_accuracy([], lexicon, "explicit")
    with pytest.raises(ValueError):
        classification_accuracy([], lexicon, "nonsense")


def test_classification_accuracy_partial_progress(sample_chains):
    class FlakyBackend:
        identity = "stub:flaky"

        def __init__(self):
            self.calls = 0

        def score_otd(self, text):
            self.calls += 1
            if self.calls > 2:
                raise ScoringError("backend fell over")
            return OtdScores(0.9, 0.1)

    with pytest.raises(EvaluationError) as err:
        classification_accuracy(sample_chains, FlakyBackend(), "explicit")
    assert err.value.partial == {"completed": 2, "total": 4}


def test_per_step_accuracy_final_geq_first(sample_chains, lexicon):
    result = per_step_accuracy(sample_chains, lexicon)
    for length, accs in result.by_length.items():
        assert accs[length] >= accs[0]
        assert all(0.0 <= a <= 1.0 for a in accs)
    assert set(result.by_length) == {5, 6}
    assert result.n_chains == {5: 3, 6: 1}


def test_per_step_accuracy_single_chain_binary(pancakes, lexicon):
    result = per_step_accuracy([pancakes], lexicon)
    assert set(result.by_length[5]) <= {0.0, 1.0}


def test_trend_statistic_strictly_increasing_is_one():
    assert trend_statistic([0.0, 0.25, 0.5, 1.0]) == pytest.approx(1.0)
    assert trend_statistic([1.0, 0.5, 0.0]) == pytest.approx(-1.0)
    assert trend_statistic([0.5, 0.5, 0.5]) is None


def test_per_step_trend_bounds(sample_chains, lexicon):
    result = per_step_accuracy(sample_chains, lexicon)
    for rho in result.trend.values():
        if rho is not None:
            assert -1.0 <= rho <= 1.0


# -- kir_analysis --------------------------------------------------------------


def test_kir_accuracy_pair_on_pancakes(pancakes, lexicon):
    report = kir_analysis([pancakes], lexicon, HashBackend())
    # s_{k-1} "You eat too much." carries no blocklist term; s_k does.
    assert report.accuracy_before_kir == 0.0
    assert report.accuracy_at_kir == 1.0
    assert report.n_sites == 1


def test_kir_accuracy_improves_on_sample(sample_chains, lexicon):
    report = kir_analysis(sample_chains, lexicon, HashBackend())
    assert report.accuracy_at_kir > report.accuracy_before_kir


def test_kir_analysis_goldens(sample_chains, lexicon):
    report = kir_analysis(sample_chains, lexicon, HashBackend())
    assert report.accuracy_before_kir == 0.25
    assert report.accuracy_at_kir == 0.5
    assert set(report.entailment_by_length) == {5, 6}
    means5 = report.entailment_by_length[5]
    assert means5.prev_to_kir == pytest.approx(0.4213162637496332)
    assert means5.kir_to_next == pytest.approx(0.10562369002904311)
    assert (means5.n_prev, means5.n_next) == (3, 3)
    means6 = report.entailment_by_length[6]
    assert means6.prev_to_kir == pytest.approx(0.5670250238308057)
    assert means6.kir_to_next == pytest.approx(0.3472293132167937)


def test_kir_at_final_step_has_no_next():
    steps = (
        ("One.", StepTag.AIR, None),
        ("Two.", StepTag.RR, None),
        ("Three.", StepTag.KIR, "Three is known."),
    )
    chain = make_chain(steps=steps)
    report = kir_analysis([chain], LexiconBackend(), HashBackend())
    means = report.entailment_by_length[3]
    assert means.kir_to_next is None
    assert means.n_next == 0
    assert means.prev_to_kir is not None


def test_kir_analysis_requires_sites(lexicon):
    chain = make_chain(steps=(("A.", StepTag.RR, None),) * 3)
    with pytest.raises(CorpusError, match="no KIR sites"):
        kir_analysis([chain], lexicon, HashBackend())


# -- step_score_table ----------------------------------------------------------


def test_duplicated_corpus_equals_single_table(pancakes):
    backend = HashBackend()
    single = step_score_table([pancakes], backend)
    double = step_score_table([pancakes, pancakes], backend)
    assert single.transition_means == double.transition_means
    assert single.mul_mean == double.mul_mean
    assert single.mul_all == double.mul_all
    assert single.direct_all == double.direct_all


def test_all_column_is_example_weighted_mean():
    backend = HashBackend()
    a = make_chain("a", (("First.", StepTag.RR, None),) * 3)
    b = make_chain("b", (("Second thing.", StepTag.RR, None),) * 3)
    table = step_score_table([a, b], backend)
    mul_a = score_chain(a, backend).mul
    mul_b = score_chain(b, backend).mul
    assert table.mul_all == pytest.approx((mul_a + mul_b) / 2)
    assert min(table.mul_mean.values()) <= table.mul_all <= max(table.mul_mean.values())


def test_step_table_golden(sample_chains):
    table = step_score_table(sample_chains, HashBackend(), "plain")
    assert table.n_chains == {5: 3, 6: 1}
    assert table.mul_all == pytest.approx(0.0008538961576498899)
    assert table.direct_all == pytest.approx(0.41552667671483645)
    assert table.mul_mean[5] == pytest.approx(0.0008757026369220585)
    assert table.direct_mean[6] == pytest.approx(0.14323566019444123)
    assert len(table.transition_means[5]) == 5
    assert len(table.transition_means[6]) == 6


def test_aggregates_permutation_invariant(sample_chains):
    backend = HashBackend()
    forward = step_score_table(sample_chains, backend)
    backward = step_score_table(list(reversed(sample_chains)), backend)
    assert forward.transition_means == backward.transition_means
    assert forward.mul_all == backward.mul_all


def test_parallel_matches_serial(sample_chains, lexicon):
    backend = HashBackend()
    assert step_score_table(sample_chains, backend, parallel=8) == step_score_table(
        sample_chains, backend
    )
    assert per_step_accuracy(sample_chains, lexicon, parallel=8) == per_step_accuracy(
        sample_chains, lexicon
    )


# -- combine_full_accuracy -----------------------------------------------------


def test_combine_reference_examples():
    table = combine_full_accuracy(
        {"MUL(RoBERTa)": 0.115, "MUL-k+(RoBERTa)": 0.235},
        {"BERT-OffensEval": 0.932, "RoBERTa-Twitter": 0.790},
        {"BERT-OffensEval": 0.159, "RoBERTa-Twitter": 0.017},
    )
    assert table.cells[("BERT-OffensEval", "MUL(RoBERTa)")] == pytest.approx(0.115 * 0.932)
    assert 100 * table.cells[("BERT-OffensEval", "MUL(RoBERTa)")] == pytest.approx(10.7, abs=0.1)
    assert 100 * table.cells[("RoBERTa-Twitter", "MUL-k+(RoBERTa)")] == pytest.approx(18.6, abs=0.1)


def test_combine_zero_absorbs():
    table = combine_full_accuracy({"MUL": 0.0}, {"m": 0.9}, {"m": 0.1})
    assert table.cells[("m", "MUL")] == 0.0


def test_combine_missing_key_named():
    with pytest.raises(ValueError, match="modelB"):
        combine_full_accuracy({"MUL": 0.1}, {"modelA": 0.9, "modelB": 0.8}, {"modelA": 0.1})


def test_combine_rejects_out_of_range():
    with pytest.raises(ValueError):
        combine_full_accuracy({"MUL": 1.5}, {"m": 0.9}, {"m": 0.1})


def test_combine_exactness_invariant():
    mul = {"col": 0.123456}
    explicit = {"m": 0.654321}
    table = combine_full_accuracy(mul, explicit, {"m": 0.5})
    assert abs(table.cells[("m", "col")] - mul["col"] * explicit["m"]) < 1e-9


# -- renderings ----------------------------------------------------------------


def test_step_table_csv_shape(sample_chains):
    table = step_score_table(sample_chains, HashBackend())
    text = step_table_to_csv(table)
    lines = text.strip().splitlines()
    assert lines[0] == "step,5,6,ALL"
    assert lines[1].startswith("s0->s1,")
    # length-5 column is empty for the s5->s6 transition row
    s5_row = [line for line in lines if line.startswith("s5->s6")][0]
    assert s5_row.split(",")[1] == ""
    assert any(line.startswith("MUL,") for line in lines)
    assert any(line.startswith("n_chains,") for line in lines)


def test_per_step_csv_and_kir_csv(sample_chains, lexicon):
    steps_csv = per_step_accuracy_to_csv(per_step_accuracy(sample_chains, lexicon))
    assert steps_csv.splitlines()[0] == "length,step,accuracy,n_chains"
    kir_csv = kir_report_to_csv(kir_analysis(sample_chains, lexicon, HashBackend()))
    assert kir_csv.splitlines()[0] == "metric,length,model,value,n"
    assert "otd_accuracy_at_kir" in kir_csv


def test_full_accuracy_csv_percent_rendering():
    table = combine_full_accuracy(
        {"MUL(RoBERTa)": 0.115}, {"BERT-OffensEval": 0.932}, {"BERT-OffensEval": 0.159}
    )
    text = full_accuracy_to_csv(table)
    lines = text.strip().splitlines()
    assert lines[0] == "otd_model,implicit,MUL(RoBERTa)"
    assert lines[1] == "BERT-OffensEval,15.9,10.7"
