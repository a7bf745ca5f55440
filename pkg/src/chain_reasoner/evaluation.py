"""Corpus-level aggregation: per-step score tables, per-step classification
accuracy, KIR before/after analysis, and the combined full-accuracy table.

Aggregates are deterministic reductions keyed by chain id and step index;
scoring fan-out may run on a thread pool without affecting results. Machine
output keeps fractions at full precision; the CSV renderings use the
one-decimal percent style used in reporting.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from scipy.stats import spearmanr

from .backends.ops import score_entailment, score_otd
from .backends.protocol import OtdScores
from .chain_model import ReasoningChain, kir_sites
from .engine import ChainScoreReport, score_chain
from .errors import BackendError, CorpusError, EvaluationError

SUBSETS = ("implicit", "explicit", "non_offensive")


def map_ordered(fn: Callable, items: Sequence, parallel: int) -> list:
    """Apply fn preserving input order; parallel > 1 fans out on threads."""
    if parallel <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=parallel) as pool:
        return list(pool.map(fn, items))


def is_offensive(scores: OtdScores) -> bool:
    """Argmax decision; an exact 0.5 tie resolves to non-offensive."""
    return scores.offensive > 0.5


def _mean(values: Sequence[float]) -> float:
    # fsum is exactly rounded, so means are bit-identical under permutation
    return math.fsum(values) / len(values)


def classification_accuracy(
    chains: Sequence[ReasoningChain], backend, subset: str, parallel: int = 1
) -> float:
    """Fraction of the subset's statements classified to their ground truth.

    Implicit and explicit statements are offensive; the non-offensive
    statement is not. Backend failures abort with the partial tally attached.
    """
    if subset not in SUBSETS:
        raise ValueError(f"unknown subset: {subset!r}")
    if not chains:
        raise CorpusError("empty subset")
    texts = [getattr(chain, subset) for chain in chains]
    truth_offensive = subset != "non_offensive"

    def classify(text: str):
        try:
            return is_offensive(score_otd(backend, text))
        except BackendError as exc:
            return exc

    outcomes = map_ordered(classify, texts, parallel)
    for i, outcome in enumerate(outcomes):
        if isinstance(outcome, BackendError):
            raise EvaluationError(
                f"backend failed after {i}/{len(texts)} {subset} statements: {outcome}",
                partial={"completed": i, "total": len(texts)},
            ) from outcome
    return _mean([1.0 if outcome == truth_offensive else 0.0 for outcome in outcomes])


@dataclass(frozen=True)
class PerStepAccuracy:
    """Offensive-classification rate at each step position, by chain length.

    Every step of a chain is ground-truth offensive (each rewrite is a more
    explicit rendering of the same offense), so the accuracy at position j
    is simply the fraction of chains whose j-th statement is classified
    offensive. ``trend`` holds the Spearman rank correlation between step
    index and accuracy per length group (None when degenerate).
    """

    by_length: dict[int, tuple[float, ...]]
    trend: dict[int, float | None]
    n_chains: dict[int, int]

    def accuracy(self, length: int, step: int) -> float:
        return self.by_length[length][step]

    def to_dict(self) -> dict:
        return {
            "by_length": {str(k): list(v) for k, v in self.by_length.items()},
            "trend": {str(k): v for k, v in self.trend.items()},
            "n_chains": {str(k): v for k, v in self.n_chains.items()},
        }


def trend_statistic(accuracies: Sequence[float]) -> float | None:
    """Spearman rank correlation of accuracy against step index."""
    if len(accuracies) < 2 or len(set(accuracies)) == 1:
        return None
    rho = spearmanr(range(len(accuracies)), accuracies).statistic
    return None if rho != rho else float(rho)  # NaN guards degenerate inputs


def per_step_accuracy(
    chains: Sequence[ReasoningChain], backend, parallel: int = 1
) -> PerStepAccuracy:
    if not chains:
        raise CorpusError("empty corpus")

    def classify_chain(chain: ReasoningChain) -> list[bool]:
        return [is_offensive(score_otd(backend, text)) for text in chain.statements]

    flags = map_ordered(classify_chain, chains, parallel)
    groups: dict[int, list[list[bool]]] = {}
    for chain, chain_flags in zip(chains, flags):
        groups.setdefault(chain.length, []).append(chain_flags)
    by_length: dict[int, tuple[float, ...]] = {}
    trend: dict[int, float | None] = {}
    n_chains: dict[int, int] = {}
    for length in sorted(groups):
        rows = groups[length]
        accs = tuple(
            _mean([1.0 if row[j] else 0.0 for row in rows]) for j in range(length + 1)
        )
        by_length[length] = accs
        trend[length] = trend_statistic(accs)
        n_chains[length] = len(rows)
    return PerStepAccuracy(by_length=by_length, trend=trend, n_chains=n_chains)


@dataclass(frozen=True)
class KirEntailmentMeans:
    prev_to_kir: float | None
    kir_to_next: float | None
    n_prev: int
    n_next: int


@dataclass(frozen=True)
class KirReport:
    """Classification and entailment behavior around knowledge insertion."""

    otd_model: str
    entailment_model: str
    n_sites: int
    accuracy_before_kir: float
    accuracy_at_kir: float
    entailment_by_length: dict[int, KirEntailmentMeans]

    def to_dict(self) -> dict:
        return {
            "otd_model": self.otd_model,
            "entailment_model": self.entailment_model,
            "n_sites": self.n_sites,
            "accuracy_before_kir": self.accuracy_before_kir,
            "accuracy_at_kir": self.accuracy_at_kir,
            "entailment_by_length": {
                str(length): {
                    "prev_to_kir": means.prev_to_kir,
                    "kir_to_next": means.kir_to_next,
                    "n_prev": means.n_prev,
                    "n_next": means.n_next,
                }
                for length, means in self.entailment_by_length.items()
            },
        }


def kir_analysis(
    chains: Sequence[ReasoningChain], otd_backend, entailment_backend, parallel: int = 1
) -> KirReport:
    """Accuracy and entailment scores at s_{k-1} / s_k / s_{k+1}, pooled
    over every KIR site; entailment means grouped by chain length. Sites at
    the final step contribute no s_k -> s_{k+1} pair, and length groups
    without sites are omitted.
    """
    triples: list[tuple[int, str, str, str | None]] = []  # (L, prev, at, next)
    for chain in chains:
        statements = chain.statements
        for site in kir_sites(chain):
            nxt = statements[site.k + 1] if site.k < chain.length else None
            triples.append((chain.length, statements[site.k - 1], statements[site.k], nxt))
    if not triples:
        raise CorpusError("no KIR sites in corpus")

    prev_flags = map_ordered(
        lambda t: is_offensive(score_otd(otd_backend, t)), [t[1] for t in triples], parallel
    )
    at_flags = map_ordered(
        lambda t: is_offensive(score_otd(otd_backend, t)), [t[2] for t in triples], parallel
    )

    def ent(pair: tuple[str, str]) -> float:
        return score_entailment(entailment_backend, pair[0], pair[1]).entailment

    prev_scores = map_ordered(ent, [(t[1], t[2]) for t in triples], parallel)
    next_items = [(i, (t[2], t[3])) for i, t in enumerate(triples) if t[3] is not None]
    next_scores = dict(
        zip([i for i, _ in next_items], map_ordered(ent, [p for _, p in next_items], parallel))
    )

    by_length: dict[int, KirEntailmentMeans] = {}
    for length in sorted({t[0] for t in triples}):
        idx = [i for i, t in enumerate(triples) if t[0] == length]
        prev_vals = [prev_scores[i] for i in idx]
        next_vals = [next_scores[i] for i in idx if i in next_scores]
        by_length[length] = KirEntailmentMeans(
            prev_to_kir=_mean(prev_vals) if prev_vals else None,
            kir_to_next=_mean(next_vals) if next_vals else None,
            n_prev=len(prev_vals),
            n_next=len(next_vals),
        )
    return KirReport(
        otd_model=getattr(otd_backend, "identity", "unknown"),
        entailment_model=getattr(entailment_backend, "identity", "unknown"),
        n_sites=len(triples),
        accuracy_before_kir=_mean([1.0 if f else 0.0 for f in prev_flags]),
        accuracy_at_kir=_mean([1.0 if f else 0.0 for f in at_flags]),
        entailment_by_length=by_length,
    )


@dataclass(frozen=True)
class StepScoreTable:
    """Mean transition scores by chain length, plus MUL / direct rows.

    The ALL column is the example-weighted mean of MUL and direct over the
    whole corpus (per-length counts weight it implicitly).
    """

    variant: str
    backend_id: str
    n_chains: dict[int, int]
    transition_means: dict[int, tuple[float, ...]]
    mul_mean: dict[int, float]
    direct_mean: dict[int, float]
    mul_all: float
    direct_all: float

    @property
    def lengths(self) -> list[int]:
        return sorted(self.n_chains)

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "backend_id": self.backend_id,
            "n_chains": {str(k): v for k, v in self.n_chains.items()},
            "transition_means": {str(k): list(v) for k, v in self.transition_means.items()},
            "mul_mean": {str(k): v for k, v in self.mul_mean.items()},
            "direct_mean": {str(k): v for k, v in self.direct_mean.items()},
            "mul_all": self.mul_all,
            "direct_all": self.direct_all,
        }


def step_score_table(
    chains: Sequence[ReasoningChain], backend, variant: str = "plain", parallel: int = 1
) -> StepScoreTable:
    if not chains:
        raise CorpusError("empty corpus")
    reports: list[ChainScoreReport] = map_ordered(
        lambda c: score_chain(c, backend, variant), chains, parallel
    )
    groups: dict[int, list[ChainScoreReport]] = {}
    for report in reports:
        groups.setdefault(len(report.transition_scores), []).append(report)
    transition_means: dict[int, tuple[float, ...]] = {}
    mul_mean: dict[int, float] = {}
    direct_mean: dict[int, float] = {}
    n_chains: dict[int, int] = {}
    for length in sorted(groups):
        rows = groups[length]
        transition_means[length] = tuple(
            _mean([r.transition_scores[i] for r in rows]) for i in range(length)
        )
        mul_mean[length] = _mean([r.mul for r in rows])
        direct_mean[length] = _mean([r.direct for r in rows])
        n_chains[length] = len(rows)
    return StepScoreTable(
        variant=variant,
        backend_id=getattr(backend, "identity", "unknown"),
        n_chains=n_chains,
        transition_means=transition_means,
        mul_mean=mul_mean,
        direct_mean=direct_mean,
        mul_all=_mean([r.mul for r in reports]),
        direct_all=_mean([r.direct for r in reports]),
    )


@dataclass(frozen=True)
class FullAccuracyTable:
    """Combined accuracy: product-model mean x explicit-subset accuracy."""

    models: tuple[str, ...]
    columns: tuple[str, ...]
    implicit: dict[str, float]
    cells: dict[tuple[str, str], float]

    def to_dict(self) -> dict:
        return {
            "models": list(self.models),
            "columns": list(self.columns),
            "implicit": dict(self.implicit),
            "cells": {f"{m}|{c}": v for (m, c), v in self.cells.items()},
        }


def combine_full_accuracy(
    mul_means: dict[str, float],
    explicit_acc: dict[str, float],
    implicit_acc: dict[str, float],
) -> FullAccuracyTable:
    """Each cell is mul_means[column] * explicit_acc[model]; the implicit
    baseline column passes through untouched. All inputs are fractions.
    """
    for name, table in (("mul", mul_means), ("explicit", explicit_acc), ("implicit", implicit_acc)):
        for key, value in table.items():
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}[{key!r}] = {value!r} outside [0, 1]")
    missing = [m for m in explicit_acc if m not in implicit_acc]
    if missing:
        raise ValueError(f"implicit accuracy missing for model(s): {', '.join(missing)}")
    cells = {
        (model, column): mul_means[column] * explicit_acc[model]
        for model in explicit_acc
        for column in mul_means
    }
    return FullAccuracyTable(
        models=tuple(explicit_acc),
        columns=tuple(mul_means),
        implicit={m: implicit_acc[m] for m in explicit_acc},
        cells=cells,
    )


# -- renderings --------------------------------------------------------------


def percent(value: float | None) -> str:
    return "" if value is None else f"{100.0 * value:.1f}"


def _csv_text(rows: Iterable[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def step_table_to_csv(table: StepScoreTable) -> str:
    lengths = table.lengths
    max_len = max(lengths) if lengths else 0
    rows: list[list[str]] = [["step"] + [str(n) for n in lengths] + ["ALL"]]
    for i in range(max_len):
        row = [f"s{i}->s{i + 1}"]
        for length in lengths:
            means = table.transition_means[length]
            row.append(percent(means[i]) if i < length else "")
        row.append("")
        rows.append(row)
    rows.append(["MUL"] + [percent(table.mul_mean[n]) for n in lengths] + [percent(table.mul_all)])
    rows.append(
        ["direct"] + [percent(table.direct_mean[n]) for n in lengths] + [percent(table.direct_all)]
    )
    rows.append(["n_chains"] + [str(table.n_chains[n]) for n in lengths] + [str(sum(table.n_chains.values()))])
    return _csv_text(rows)


def per_step_accuracy_to_csv(result: PerStepAccuracy) -> str:
    rows: list[list[str]] = [["length", "step", "accuracy", "n_chains"]]
    for length in sorted(result.by_length):
        for step, acc in enumerate(result.by_length[length]):
            rows.append([str(length), str(step), percent(acc), str(result.n_chains[length])])
    return _csv_text(rows)


def kir_report_to_csv(report: KirReport) -> str:
    rows: list[list[str]] = [["metric", "length", "model", "value", "n"]]
    rows.append(
        ["otd_accuracy_before_kir", "", report.otd_model, percent(report.accuracy_before_kir), str(report.n_sites)]
    )
    rows.append(
        ["otd_accuracy_at_kir", "", report.otd_model, percent(report.accuracy_at_kir), str(report.n_sites)]
    )
    for length in sorted(report.entailment_by_length):
        means = report.entailment_by_length[length]
        rows.append(
            ["entailment_prev_to_kir", str(length), report.entailment_model, percent(means.prev_to_kir), str(means.n_prev)]
        )
        rows.append(
            ["entailment_kir_to_next", str(length), report.entailment_model, percent(means.kir_to_next), str(means.n_next)]
        )
    return _csv_text(rows)


def full_accuracy_to_csv(table: FullAccuracyTable) -> str:
    rows: list[list[str]] = [["otd_model", "implicit"] + list(table.columns)]
    for model in table.models:
        rows.append(
            [model, percent(table.implicit[model])]
            + [percent(table.cells[(model, column)]) for column in table.columns]
        )
    return _csv_text(rows)


def to_json(obj) -> str:
    payload = obj.to_dict() if hasattr(obj, "to_dict") else obj
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"
