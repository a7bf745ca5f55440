"""Command-line surface.

Exit codes: 0 success, 1 validation/input failure, 2 backend or transport
failure, 64 usage errors (unknown flags, bad arguments). Commands that write
files emit a run manifest *before* their results; outputs are deterministic
given the manifest and a deterministic backend.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from .attributes import categorize_corpus
from .backends.client import parse_backend_spec
from .chain_model import ReasoningChain
from .dataset_io import (
    attribute_to_dict,
    load_attributes,
    load_blocklist,
    load_corpus,
)
from .engine import score_chain
from .errors import (
    BackendError,
    ChainReasonerError,
    CorpusError,
    EvaluationError,
    RecordParseError,
)
from .evaluation import (
    classification_accuracy,
    combine_full_accuracy,
    full_accuracy_to_csv,
    kir_analysis,
    kir_report_to_csv,
    map_ordered,
    per_step_accuracy,
    per_step_accuracy_to_csv,
    step_score_table,
    step_table_to_csv,
    to_json,
)
from .manifest import build_manifest, write_manifest
from .probe import coverage, load_votes, run_probe, save_records

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_BACKEND = 2
EXIT_USAGE = 64

BACKEND_ENV_VAR = "CHAIN_REASONER_BACKEND"


class _Parser(argparse.ArgumentParser):
    """argparse with the package's usage exit code (64)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fail(message: str) -> None:
    print(f"error: {message}", file=sys.stderr)


def _load_chains(args, blocklist=None) -> tuple[list[ReasoningChain], int, int]:
    chains, reports = load_corpus(args.corpus, mode=args.mode, blocklist=blocklist)
    n_errors = sum(len(r.errors) for r in reports)
    n_warnings = sum(len(r.warnings) for r in reports)
    dropped = sum(1 for r in reports if not r.loaded)
    if dropped:
        print(f"note: dropped {dropped} invalid record(s)", file=sys.stderr)
    return chains, n_errors, n_warnings


def _backend(spec: str | None, timeout: float):
    if not spec:
        raise CorpusError(
            f"no backend given; pass --backend or set {BACKEND_ENV_VAR}"
        )
    return parse_backend_spec(spec, timeout=timeout)


# -- commands -----------------------------------------------------------------


def cmd_validate(args) -> int:
    blocklist = load_blocklist(args.blocklist) if args.blocklist else None
    chains, reports = load_corpus(args.corpus, mode=args.mode, blocklist=blocklist)
    lines = []
    for report in reports:
        for violation in report.violations:
            where = report.chain_id or "?"
            lines.append(
                f"line {report.line_no} ({where}) [{violation.severity}] "
                f"{violation.code}: {violation.message}"
            )
    for line in lines:
        print(line)
    n_errors = sum(len(r.errors) for r in reports)
    n_warnings = sum(len(r.warnings) for r in reports)
    print(f"{len(chains)} chain(s) loaded; {n_errors} error(s); {n_warnings} warning(s)")
    if args.out:
        manifest = build_manifest("validate", args.argv, corpus_path=args.corpus)
        write_manifest(manifest, str(args.out) + ".manifest.json")
        payload = [
            {
                "line": r.line_no,
                "chain_id": r.chain_id,
                "loaded": r.loaded,
                "violations": [
                    {"code": v.code, "severity": v.severity, "message": v.message}
                    for v in r.violations
                ],
            }
            for r in reports
        ]
        Path(args.out).write_text(
            json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )
    return EXIT_VALIDATION if n_errors else EXIT_OK


def cmd_score(args) -> int:
    chains, _, _ = _load_chains(args)
    if not chains:
        raise CorpusError("no valid chains to score")
    variants = ("plain", "k_plus") if args.variant == "both" else (args.variant,)
    manifest = build_manifest(
        "score",
        args.argv,
        corpus_path=args.corpus,
        backends={"entailment": args.backend},
        variant=args.variant,
        parallel=args.parallel,
    )
    write_manifest(manifest, str(args.out) + ".manifest.json")
    with _backend(args.backend, args.timeout) as backend:
        with open(args.out, "w", encoding="utf-8") as fh:
            for variant in variants:
                reports = map_ordered(
                    lambda c, v=variant: score_chain(c, backend, v), chains, args.parallel
                )
                for report in reports:
                    fh.write(json.dumps(report.to_dict(), ensure_ascii=False) + "\n")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    chains, _, _ = _load_chains(args)
    if not chains:
        raise CorpusError("no valid chains to evaluate")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = build_manifest(
        "evaluate",
        args.argv,
        corpus_path=args.corpus,
        backends={"entailment": args.entailment_backend, "otd": args.otd_backend},
        variant=args.variant,
        parallel=args.parallel,
    )
    write_manifest(manifest, out_dir / "manifest.json")

    with _backend(args.entailment_backend, args.timeout) as ent_backend:
        with _backend(args.otd_backend, args.timeout) as otd_backend:
            table = step_score_table(chains, ent_backend, args.variant, parallel=args.parallel)
            (out_dir / "step_scores.csv").write_text(step_table_to_csv(table), encoding="utf-8")
            (out_dir / "step_scores.json").write_text(to_json(table), encoding="utf-8")

            steps = per_step_accuracy(chains, otd_backend, parallel=args.parallel)
            (out_dir / "per_step_accuracy.csv").write_text(
                per_step_accuracy_to_csv(steps), encoding="utf-8"
            )
            (out_dir / "per_step_accuracy.json").write_text(to_json(steps), encoding="utf-8")

            accuracies = {
                subset: classification_accuracy(chains, otd_backend, subset, parallel=args.parallel)
                for subset in ("implicit", "explicit", "non_offensive")
            }
            rows = [
                ["model", "implicit_percent", "explicit_percent", "non_offensive_percent"],
                [otd_backend.identity]
                + [f"{100.0 * accuracies[s]:.1f}" for s in ("implicit", "explicit", "non_offensive")],
            ]
            with (out_dir / "classification.csv").open("w", encoding="utf-8", newline="") as fh:
                csv.writer(fh, lineterminator="\n").writerows(rows)
            (out_dir / "classification.json").write_text(
                to_json({"model": otd_backend.identity, "accuracy": accuracies}), encoding="utf-8"
            )

            try:
                kir = kir_analysis(chains, otd_backend, ent_backend, parallel=args.parallel)
            except CorpusError as exc:
                print(f"note: KIR analysis skipped: {exc}", file=sys.stderr)
            else:
                (out_dir / "kir_report.csv").write_text(kir_report_to_csv(kir), encoding="utf-8")
                (out_dir / "kir_report.json").write_text(to_json(kir), encoding="utf-8")
    return EXIT_OK


def _read_csv_dicts(path: str) -> list[dict[str, str]]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise CorpusError(f"{path}: missing CSV header")
        return list(reader)


def cmd_combine(args) -> int:
    mul_rows = _read_csv_dicts(args.mul_table)
    if not mul_rows or "column" not in mul_rows[0] or "mul_percent" not in mul_rows[0]:
        raise CorpusError(f"{args.mul_table}: need columns 'column,mul_percent'")
    mul_means = {row["column"]: float(row["mul_percent"]) / 100.0 for row in mul_rows}

    cls_rows = _read_csv_dicts(args.classifier_table)
    needed = {"model", "implicit_percent", "explicit_percent"}
    if not cls_rows or not needed.issubset(cls_rows[0]):
        raise CorpusError(
            f"{args.classifier_table}: need columns 'model,implicit_percent,explicit_percent'"
        )
    explicit = {row["model"]: float(row["explicit_percent"]) / 100.0 for row in cls_rows}
    implicit = {row["model"]: float(row["implicit_percent"]) / 100.0 for row in cls_rows}

    table = combine_full_accuracy(mul_means, explicit, implicit)
    manifest = build_manifest("combine", args.argv)
    write_manifest(manifest, str(args.out) + ".manifest.json")
    Path(args.out).write_text(full_accuracy_to_csv(table), encoding="utf-8")
    Path(str(args.out) + ".json").write_text(to_json(table), encoding="utf-8")
    print(full_accuracy_to_csv(table), end="")
    return EXIT_OK


def cmd_probe(args) -> int:
    knowledge_path = Path(args.knowledge)
    if not knowledge_path.exists():
        raise CorpusError(f"knowledge file not found: {knowledge_path}")
    sentences = [
        line.strip() for line in knowledge_path.read_text(encoding="utf-8").splitlines() if line.strip()
    ]
    if not sentences:
        raise CorpusError("knowledge file is empty")
    votes = load_votes(args.votes)
    manifest = build_manifest(
        "probe",
        args.argv,
        corpus_path=args.knowledge,
        backends={"completion": args.backend},
        parallel=args.parallel,
    )
    write_manifest(manifest, str(args.out) + ".manifest.json")
    with _backend(args.backend, args.timeout) as backend:
        records = run_probe(sentences, backend, votes)
    save_records(records, args.out)
    report = coverage(records)
    Path(str(args.out) + ".coverage.json").write_text(to_json(report), encoding="utf-8")
    print(to_json(report), end="")
    return EXIT_OK


def cmd_categorize(args) -> int:
    attributes = load_attributes(args.attributes)
    enriched, histogram = categorize_corpus([a.text for a in attributes])
    manifest = build_manifest("categorize", args.argv, corpus_path=args.attributes)
    write_manifest(manifest, str(args.out) + ".manifest.json")
    with open(args.out, "w", encoding="utf-8") as fh:
        for attr in enriched:
            fh.write(json.dumps(attribute_to_dict(attr), ensure_ascii=False) + "\n")
    print(
        json.dumps(
            {category.value: count for category, count in histogram.items()},
            indent=2,
        )
    )
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="chain-reasoner", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    env_backend = os.environ.get(BACKEND_ENV_VAR)

    def add_common(p, backend_flags=()):
        p.add_argument("--parallel", type=int, default=1, help="scoring fan-out (default 1)")
        p.add_argument("--timeout", type=float, default=30.0, help="backend timeout seconds")
        for flag in backend_flags:
            p.add_argument(
                flag,
                default=env_backend,
                help=f"backend spec: cmd:<argv> or url:HOST:PORT (default ${BACKEND_ENV_VAR})",
            )

    p = sub.add_parser("validate", help="validate a JSONL corpus")
    p.add_argument("corpus")
    p.add_argument("--mode", choices=("strict", "lenient"), default="strict")
    p.add_argument("--blocklist", help="protected-class term file (one per line)")
    p.add_argument("--out", help="write the violation report as JSON")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("score", help="score chains; ChainScoreReport JSONL")
    p.add_argument("corpus")
    p.add_argument("--mode", choices=("strict", "lenient"), default="strict")
    p.add_argument("--variant", choices=("plain", "k_plus", "both"), default="plain")
    p.add_argument("--out", required=True)
    add_common(p, ("--backend",))
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("evaluate", help="corpus-level tables (CSV + JSON)")
    p.add_argument("corpus")
    p.add_argument("--mode", choices=("strict", "lenient"), default="strict")
    p.add_argument("--variant", choices=("plain", "k_plus"), default="plain")
    p.add_argument("--out", required=True, help="output directory")
    add_common(p, ("--entailment-backend", "--otd-backend"))
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("combine", help="full-accuracy table from two CSVs")
    p.add_argument("--mul-table", required=True, help="CSV: column,mul_percent")
    p.add_argument(
        "--classifier-table", required=True, help="CSV: model,implicit_percent,explicit_percent"
    )
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_combine)

    p = sub.add_parser("probe", help="knowledge coverage probe")
    p.add_argument("knowledge", help="plain text file, one knowledge sentence per line")
    p.add_argument("--votes", required=True, help="CSV: item_id,annotator_id,label")
    p.add_argument("--out", required=True, help="probe records JSONL")
    add_common(p, ("--backend",))
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("categorize", help="categorize persona attributes")
    p.add_argument("attributes", help="attribute JSONL or plain text")
    p.add_argument("--out", required=True, help="enriched attribute JSONL")
    p.set_defaults(func=cmd_categorize)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.argv = argv
    try:
        return args.func(args)
    except EvaluationError as exc:
        _fail(str(exc))
        return EXIT_BACKEND
    except BackendError as exc:
        _fail(str(exc))
        return EXIT_BACKEND
    except (CorpusError, RecordParseError, ChainReasonerError, OSError, ValueError) as exc:
        _fail(str(exc))
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
