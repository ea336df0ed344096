"""Command-line entry point: ingest, build-dataset, review, evaluate, arena.

Settings resolve with the precedence flags > environment > config file >
defaults; all randomness flows from one root seed; outputs are written
atomically so a failed run never leaves a truncated file.  Exit codes:
0 success, 2 usage, 3 data, 4 transport, 5 pipeline.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Sequence

from . import agents, arena, corpus, dataset, metrics, reporting
from .errors import (
    DataError,
    JudgeError,
    ParseExhaustionError,
    PipelineError,
    ProviderRejectionError,
    ReviewFormatError,
    ReviewLabError,
    TranscriptionError,
    TransportError,
)
from .gateway import AuditLog, ChatProvider, OpenAIChatProvider
from .offline import OfflineProvider
from .structured import render_structured

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_TRANSPORT = 4
EXIT_PIPELINE = 5

ENV_PREFIX = "REVIEWLAB"

_EXIT_BY_ERROR: tuple[tuple[type[Exception], int], ...] = (
    (TransportError, EXIT_TRANSPORT),
    (ProviderRejectionError, EXIT_TRANSPORT),
    (PipelineError, EXIT_PIPELINE),
    (JudgeError, EXIT_PIPELINE),
    (ParseExhaustionError, EXIT_PIPELINE),
    (TranscriptionError, EXIT_PIPELINE),
    (DataError, EXIT_DATA),
    (ReviewFormatError, EXIT_DATA),
    (ValueError, EXIT_DATA),
    (OSError, EXIT_DATA),
)


def read_config_file(path: str) -> dict[str, str]:
    """Parse a simple ``key = value`` config file (''#'' comments allowed)."""
    settings: dict[str, str] = {}
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise DataError(f"{path}:{line_no}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        settings[key.strip()] = value.strip()
    return settings


def resolve_setting(
    flag_value,
    name: str,
    config_file: dict[str, str],
    default,
    cast=str,
):
    """flags > environment > config file > default."""
    if flag_value is not None:
        return flag_value
    env_value = os.environ.get(f"{ENV_PREFIX}_{name.upper().replace('-', '_')}")
    if env_value is not None:
        return cast(env_value)
    if name in config_file:
        return cast(config_file[name])
    return default


def build_provider(profile: str) -> ChatProvider:
    """Turn a provider profile name into a provider.

    ``mock`` (optionally ``mock:<salt>``) is the deterministic offline
    provider; any other name is an OpenAI-style HTTP provider configured
    from REVIEWLAB_<PROFILE>_ENDPOINT / _API_KEY / _MODEL.
    """
    if profile == "mock" or profile.startswith("mock:"):
        _, _, salt = profile.partition(":")
        return OfflineProvider(salt=salt)
    return OpenAIChatProvider.from_env(profile)


def _write_json(path: str, payload: object) -> None:
    corpus.atomic_write_text(path, json.dumps(payload, indent=2, ensure_ascii=False) + "\n")


def _write_jsonl(path: str, rows: Sequence[object]) -> None:
    corpus.atomic_write_text(
        path, "".join(json.dumps(row, ensure_ascii=False) + "\n" for row in rows)
    )


def _load_references(path: str) -> dict[str, str]:
    """Human meta-reviews keyed by paper id, from a corpus JSONL."""
    references = {}
    for record in corpus.load_corpus(path):
        if record.meta_review and record.meta_review.strip():
            references[record.id] = record.meta_review
    return references


# -- subcommands --------------------------------------------------------------


def _cmd_ingest(args: argparse.Namespace, config_file: dict[str, str]) -> int:
    records = corpus.load_corpus(args.corpus)
    print(f"loaded {len(records)} valid records from {args.corpus}")
    if args.output:
        corpus.save_corpus(records, args.output)
        print(f"wrote normalized corpus to {args.output}")
    if args.benchmark_total is not None:
        seed = resolve_setting(args.seed, "seed", config_file, 0, int)
        split = corpus.split_benchmark(
            records, args.benchmark_total, args.benchmark_ratio, seed
        )
        payload = {
            "entries": list(split.entries),
            "accept_count": split.accept_count,
            "reject_count": split.reject_count,
            "seed": split.seed,
        }
        out = args.benchmark_output or "benchmark.json"
        _write_json(out, payload)
        print(
            f"benchmark split: {split.accept_count} accepts / "
            f"{split.reject_count} rejects -> {out}"
        )
    return EXIT_OK


def _cmd_review(args: argparse.Namespace, config_file: dict[str, str]) -> int:
    records = corpus.load_corpus(args.corpus)
    if args.paper_id:
        records = [r for r in records if r.id == args.paper_id]
        if not records:
            raise DataError(f"paper id {args.paper_id!r} not found in {args.corpus}")

    profile = resolve_setting(args.profile, "profile", config_file, "mock")
    n_reviewers = resolve_setting(args.n_reviewers, "n-reviewers", config_file, 3, int)
    jobs = resolve_setting(args.jobs, "jobs", config_file, min(os.cpu_count() or 1, 4), int)
    audit = AuditLog(args.debug_audit) if args.debug_audit else None

    provider = build_provider(profile)
    pipeline_config = agents.PipelineConfig(
        n_reviewers=n_reviewers,
        reviewer_provider=provider,
        chair_provider=provider,
        per_reviewer_retrieval=args.per_reviewer_retrieval,
        include_abstract_for_chair=args.include_abstract_for_chair,
        audit=audit,
    )
    if args.verbose:
        print(f"profile={profile} n_reviewers={n_reviewers} jobs={jobs}")

    def run_one(record: corpus.PaperRecord) -> dict:
        output = agents.run_pipeline(record, pipeline_config, retrieval=None)
        return {
            "paper_id": record.id,
            "meta_review": output.meta_review.text,
            "verdict": output.meta_review.verdict,
            "reviews": [
                render_structured(review, pipeline_config.grammar)
                for review in output.reviews
            ],
            "transcript": list(output.transcript),
        }

    if jobs > 1 and len(records) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(run_one, records))
    else:
        rows = [run_one(record) for record in records]

    _write_jsonl(args.output, rows)
    print(f"wrote {len(rows)} pipeline outputs to {args.output}")
    return EXIT_OK


def _cmd_evaluate(args: argparse.Namespace, config_file: dict[str, str]) -> int:
    references = _load_references(args.references)
    generated: dict[str, str] = {}
    for line_no, line in enumerate(
        Path(args.generated).read_text(encoding="utf-8").splitlines(), 1
    ):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"{args.generated}:{line_no}: malformed JSON: {exc.msg}") from exc
        try:
            generated[row["paper_id"]] = row["meta_review"]
        except (TypeError, KeyError) as exc:
            raise DataError(
                f"{args.generated}:{line_no}: rows need paper_id and meta_review"
            ) from exc

    generated = {pid: text for pid, text in generated.items() if pid in references}
    if not generated:
        raise DataError("no generated reviews overlap the reference corpus")

    report, per_paper = metrics.evaluate_collection(generated, references)
    label = args.label or Path(args.generated).stem
    payload = {"model": label, **report.as_dict(), "per_paper": per_paper}
    _write_json(args.output, payload)
    print(reporting.render_table([(label, report)]))
    print(f"wrote metric report to {args.output}")
    return EXIT_OK


def _cmd_arena(args: argparse.Namespace, config_file: dict[str, str]) -> int:
    references = _load_references(args.references)
    reviews_dir = Path(args.reviews_dir)
    model_files = sorted(reviews_dir.glob("*.jsonl"))
    if len(model_files) < 2:
        raise DataError(
            f"{reviews_dir} must hold at least two per-model .jsonl review files"
        )
    entries: dict[str, dict[str, str]] = {}
    for model_file in model_files:
        model_reviews: dict[str, str] = {}
        for line in model_file.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            row = json.loads(line)
            model_reviews[row["paper_id"]] = row["meta_review"]
        entries[model_file.stem] = model_reviews

    profile = resolve_setting(args.judge_profile, "judge-profile", config_file, "mock")
    judge = build_provider(profile)
    audit = AuditLog(args.debug_audit) if args.debug_audit else None

    verdict_rows: list[dict] = []

    def record_outcome(outcome: arena.ArenaOutcome) -> None:
        verdict_rows.append(
            {
                "paper_id": outcome.pair.paper_id,
                "model_a": outcome.pair.entry_a[0],
                "model_b": outcome.pair.entry_b[0],
                "result": outcome.result,
                "forward": {"preferred": outcome.forward.preferred,
                            "rationale": outcome.forward.rationale},
                "reversed": {"preferred": outcome.reversed.preferred,
                             "rationale": outcome.reversed.rationale},
            }
        )

    paper_ids = sorted(set(references) & set().union(*[set(v) for v in entries.values()]))
    common = [
        pid for pid in paper_ids
        if all(pid in reviews for reviews in entries.values())
    ]
    if not common:
        raise DataError("no paper is covered by every model and the references")

    table = arena.tournament(
        judge, entries, references, paper_ids=common, audit=audit,
        on_outcome=record_outcome,
    )
    _write_json(args.output, table.as_dict())
    if args.verdicts_output:
        _write_jsonl(args.verdicts_output, verdict_rows)
        print(f"wrote {len(verdict_rows)} judged outcomes to {args.verdicts_output}")
    print(reporting.render_win_rates(table))
    print(f"wrote win-rate table to {args.output}")
    return EXIT_OK


def _cmd_build_dataset(args: argparse.Namespace, config_file: dict[str, str]) -> int:
    records = corpus.load_corpus(args.corpus)
    if args.exclude_ids:
        blocked = {
            line.strip()
            for line in Path(args.exclude_ids).read_text(encoding="utf-8").splitlines()
            if line.strip()
        }
        before = len(records)
        records = [r for r in records if r.id not in blocked]
        print(f"blocklist removed {before - len(records)} papers")

    profile = resolve_setting(args.profile, "profile", config_file, "mock")
    provider = build_provider(profile)
    audit = AuditLog(args.debug_audit) if args.debug_audit else None

    transcribed, failures = dataset.transcribe_corpus(
        records, provider, threshold=args.threshold, audit=audit
    )
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    kinds = [dataset.KIND_REVIEWER, dataset.KIND_CHAIR] if args.kind == "both" else [args.kind]
    exclusion_report: dict[str, dict[str, int]] = {"transcription": failures}
    for kind in kinds:
        result = dataset.emit_records(transcribed, kind)
        rows = [
            {
                "kind": record.kind,
                "source_paper_id": record.source_paper_id,
                "input": record.input_text,
                "target": record.target_text,
            }
            for record in result.records
        ]
        out_path = out_dir / f"{kind}_records.jsonl"
        _write_jsonl(str(out_path), rows)
        exclusion_report[kind] = result.exclusions
        print(f"emitted {len(rows)} {kind} records to {out_path}")
    _write_json(str(out_dir / "exclusions.json"), exclusion_report)
    return EXIT_OK


# -- argument parsing ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reviewlab",
        description="Generate, train on, and benchmark automated paper reviews.",
    )
    parser.add_argument("--config", help="key = value config file")
    parser.add_argument("--verbose", action="store_true", help="print resolved settings")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="validate and normalize a corpus")
    p_ingest.add_argument("--corpus", required=True)
    p_ingest.add_argument("--output", help="write the normalized corpus here")
    p_ingest.add_argument("--benchmark-total", type=int,
                          help="also draw a benchmark split of this size")
    p_ingest.add_argument("--benchmark-ratio", type=float, default=0.3,
                          help="accept fraction of the split (default 0.3)")
    p_ingest.add_argument("--benchmark-output", help="benchmark split JSON path")
    p_ingest.add_argument("--seed", type=int, help="root random seed")

    p_review = sub.add_parser("review", help="run the multi-agent review pipeline")
    p_review.add_argument("--corpus", required=True)
    p_review.add_argument("--output", required=True, help="pipeline outputs JSONL")
    p_review.add_argument("--paper-id", help="review a single paper")
    p_review.add_argument("--n-reviewers", type=int, help="reviewer count (default 3)")
    p_review.add_argument("--profile", help="provider profile (default mock)")
    p_review.add_argument("--jobs", type=int, help="parallel papers")
    p_review.add_argument("--seed", type=int, help="root random seed")
    p_review.add_argument("--per-reviewer-retrieval", action="store_true")
    p_review.add_argument("--include-abstract-for-chair", action="store_true")
    p_review.add_argument("--debug-audit", help="append provider calls to this JSONL")

    p_eval = sub.add_parser("evaluate", help="score generated reviews against references")
    p_eval.add_argument("--generated", required=True, help="review JSONL from 'review'")
    p_eval.add_argument("--references", required=True,
                        help="corpus JSONL carrying human meta reviews")
    p_eval.add_argument("--output", required=True, help="metric report JSON")
    p_eval.add_argument("--label", help="model label for the report")

    p_arena = sub.add_parser("arena", help="pairwise tournament between models")
    p_arena.add_argument("--reviews-dir", required=True,
                         help="directory of per-model review JSONL files")
    p_arena.add_argument("--references", required=True,
                         help="corpus JSONL carrying human meta reviews")
    p_arena.add_argument("--output", required=True, help="win-rate table JSON")
    p_arena.add_argument("--judge-profile", help="judge provider profile (default mock)")
    p_arena.add_argument("--verdicts-output", help="write every judged outcome here")
    p_arena.add_argument("--debug-audit", help="append judge calls to this JSONL")

    p_build = sub.add_parser("build-dataset", help="emit supervised training records")
    p_build.add_argument("--corpus", required=True)
    p_build.add_argument("--output-dir", required=True)
    p_build.add_argument("--kind", choices=["reviewer", "chair", "both"], default="both")
    p_build.add_argument("--profile", help="transcription provider profile (default mock)")
    p_build.add_argument("--threshold", type=float, default=dataset.DEFAULT_RECALL_THRESHOLD,
                         help="content-recall threshold for transcription checks")
    p_build.add_argument("--exclude-ids", help="file of paper ids to drop (one per line)")
    p_build.add_argument("--debug-audit", help="append provider calls to this JSONL")

    return parser


_COMMANDS = {
    "ingest": _cmd_ingest,
    "review": _cmd_review,
    "evaluate": _cmd_evaluate,
    "arena": _cmd_arena,
    "build-dataset": _cmd_build_dataset,
}


def run(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, dispatch, and map errors onto exit codes."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    config_file: dict[str, str] = {}
    if args.config:
        config_file = read_config_file(args.config)

    try:
        return _COMMANDS[args.command](args, config_file)
    except ReviewLabError as exc:
        for error_type, code in _EXIT_BY_ERROR:
            if isinstance(exc, error_type):
                print(f"error: {exc}", file=sys.stderr)
                return code
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
