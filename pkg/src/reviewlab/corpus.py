"""Canonical data model for papers, reviews, and benchmark sets.

Corpora are stored as UTF-8 line-delimited JSON, one paper per line, with
snake_case field names matching the dataclasses below.  Records are
immutable values: loading never mutates the file, and every operation that
"changes" a record returns a copy.
"""

from __future__ import annotations

import json
import os
import random
import tempfile
from dataclasses import dataclass, replace
from datetime import date
from pathlib import Path
from typing import Iterable, Sequence

from .errors import CapacityError, DataError

DECISION_ACCEPT = "accept"
DECISION_REJECT = "reject"
DECISION_UNKNOWN = "unknown"
DECISIONS = (DECISION_ACCEPT, DECISION_REJECT, DECISION_UNKNOWN)

#: Default per-paper character budget for prompt assembly (section bodies
#: are truncated tail-first beyond this; see reviewlab.agents).
DEFAULT_CHAR_BUDGET = 48_000


@dataclass(frozen=True)
class RawReview:
    """A reviewer comment as collected, before or after transcription."""

    reviewer_id: str
    text: str
    is_structured: bool = False


@dataclass(frozen=True)
class RelevantPaperRef:
    """A prior paper retrieved as novelty context for a submission."""

    title: str
    abstract: str
    published_date: date
    similarity: float


@dataclass(frozen=True)
class Section:
    heading: str
    body: str


@dataclass(frozen=True)
class PaperRecord:
    """One paper plus its review metadata; the unit all pipelines consume."""

    id: str
    title: str
    abstract: str
    submission_date: date
    sections: tuple[Section, ...] = ()
    venue: str = ""
    decision: str = DECISION_UNKNOWN
    research_domain: str | None = None
    reviews: tuple[RawReview, ...] = ()
    meta_review: str | None = None
    relevant_papers: tuple[RelevantPaperRef, ...] = ()


@dataclass(frozen=True)
class BenchmarkSet:
    """A fixed-ratio accept/reject test split over a corpus."""

    entries: tuple[str, ...]
    accept_count: int
    reject_count: int
    seed: int


def validate_record(record: PaperRecord) -> list[str]:
    """Return human-readable invariant violations (empty list if valid)."""
    violations: list[str] = []
    if not record.id.strip():
        violations.append("id: must be non-empty")
    if not record.title.strip():
        violations.append("title: must be non-empty")
    if not record.abstract.strip():
        violations.append("abstract: must be non-empty")
    if record.decision not in DECISIONS:
        violations.append(
            f"decision: {record.decision!r} not one of {', '.join(DECISIONS)}"
        )
    if len(record.relevant_papers) > 2:
        violations.append(
            f"relevant_papers: length {len(record.relevant_papers)} exceeds 2"
        )
    for idx, ref in enumerate(record.relevant_papers):
        if not (0.0 <= ref.similarity <= 1.0):
            violations.append(
                f"relevant_papers[{idx}].similarity: {ref.similarity} outside [0, 1]"
            )
        if ref.published_date > record.submission_date:
            violations.append(
                f"relevant_papers[{idx}].published_date: {ref.published_date} "
                f"postdates submission_date {record.submission_date}"
            )
    for idx, review in enumerate(record.reviews):
        if not review.text.strip():
            violations.append(f"reviews[{idx}].text: must be non-empty")
    return violations


def _parse_date(value: object, context: str) -> date:
    if not isinstance(value, str):
        raise DataError(f"{context}: expected ISO date string, got {type(value).__name__}")
    try:
        return date.fromisoformat(value)
    except ValueError as exc:
        raise DataError(f"{context}: {exc}") from exc


def record_from_dict(obj: dict, context: str = "record") -> PaperRecord:
    """Build a PaperRecord from a parsed JSON object.

    Missing optional fields take their defaults; missing required fields
    raise DataError naming the field.
    """
    if not isinstance(obj, dict):
        raise DataError(f"{context}: expected a JSON object")
    for name in ("id", "title", "abstract", "submission_date"):
        if name not in obj:
            raise DataError(f"{context}: missing required field {name!r}")

    sections = tuple(
        Section(heading=str(s.get("heading", "")), body=str(s.get("body", "")))
        for s in obj.get("sections", [])
    )
    reviews = tuple(
        RawReview(
            reviewer_id=str(r.get("reviewer_id", "")),
            text=str(r.get("text", "")),
            is_structured=bool(r.get("is_structured", False)),
        )
        for r in obj.get("reviews", [])
    )
    relevant = tuple(
        RelevantPaperRef(
            title=str(p.get("title", "")),
            abstract=str(p.get("abstract", "")),
            published_date=_parse_date(
                p.get("published_date"), f"{context}: relevant_papers[{i}].published_date"
            ),
            similarity=float(p.get("similarity", 0.0)),
        )
        for i, p in enumerate(obj.get("relevant_papers", []))
    )
    return PaperRecord(
        id=str(obj["id"]),
        title=str(obj["title"]),
        abstract=str(obj["abstract"]),
        submission_date=_parse_date(obj["submission_date"], f"{context}: submission_date"),
        sections=sections,
        venue=str(obj.get("venue", "")),
        decision=str(obj.get("decision", DECISION_UNKNOWN)),
        research_domain=(
            None if obj.get("research_domain") is None else str(obj["research_domain"])
        ),
        reviews=reviews,
        meta_review=(None if obj.get("meta_review") is None else str(obj["meta_review"])),
        relevant_papers=relevant,
    )


def record_to_dict(record: PaperRecord) -> dict:
    """Serialize a record to the JSONL field layout."""
    return {
        "id": record.id,
        "title": record.title,
        "abstract": record.abstract,
        "sections": [{"heading": s.heading, "body": s.body} for s in record.sections],
        "venue": record.venue,
        "submission_date": record.submission_date.isoformat(),
        "decision": record.decision,
        "research_domain": record.research_domain,
        "reviews": [
            {
                "reviewer_id": r.reviewer_id,
                "text": r.text,
                "is_structured": r.is_structured,
            }
            for r in record.reviews
        ],
        "meta_review": record.meta_review,
        "relevant_papers": [
            {
                "title": p.title,
                "abstract": p.abstract,
                "published_date": p.published_date.isoformat(),
                "similarity": p.similarity,
            }
            for p in record.relevant_papers
        ],
    }


def load_corpus(path: str | Path) -> list[PaperRecord]:
    """Load and validate a JSONL corpus, preserving file order.

    Any malformed or invalid line aborts the load with an error naming the
    line; there is never a partial result.
    """
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read corpus {path}: {exc}") from exc

    records: list[PaperRecord] = []
    seen_ids: dict[str, int] = {}
    for line_no, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}:{line_no}: malformed JSON: {exc.msg}") from exc
        record = record_from_dict(obj, context=f"{path}:{line_no}")
        violations = validate_record(record)
        if violations:
            raise DataError(f"{path}:{line_no}: invalid record: " + "; ".join(violations))
        if record.id in seen_ids:
            raise DataError(
                f"{path}:{line_no}: duplicate id {record.id!r} "
                f"(first seen on line {seen_ids[record.id]})"
            )
        seen_ids[record.id] = line_no
        records.append(record)
    return records


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write ``text`` to ``path`` via a temp file + rename in one step."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def save_corpus(records: Iterable[PaperRecord], path: str | Path) -> None:
    """Persist records as line-delimited JSON (atomically)."""
    lines = [json.dumps(record_to_dict(r), ensure_ascii=False) for r in records]
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def split_benchmark(
    corpus: Sequence[PaperRecord],
    total: int,
    accept_ratio: float,
    seed: int,
) -> BenchmarkSet:
    """Draw a deterministic accept/reject benchmark split.

    Exactly ``round(total * accept_ratio)`` accepted papers and the
    remainder rejected papers are sampled; papers with decision=unknown
    never enter the split.  The same (corpus, total, accept_ratio, seed)
    always yields the same entry list.
    """
    if total < 0:
        raise ValueError("total must be non-negative")
    if not (0.0 <= accept_ratio <= 1.0):
        raise ValueError("accept_ratio must lie in [0, 1]")
    accept_count = round(total * accept_ratio)
    reject_count = total - accept_count

    accepted = [r.id for r in corpus if r.decision == DECISION_ACCEPT]
    rejected = [r.id for r in corpus if r.decision == DECISION_REJECT]
    if len(accepted) < accept_count:
        raise CapacityError(
            f"need {accept_count} accepted papers, corpus has {len(accepted)}",
            available=len(accepted), required=accept_count,
        )
    if len(rejected) < reject_count:
        raise CapacityError(
            f"need {reject_count} rejected papers, corpus has {len(rejected)}",
            available=len(rejected), required=reject_count,
        )

    rng = random.Random(seed)
    entries = rng.sample(accepted, accept_count) + rng.sample(rejected, reject_count)
    rng.shuffle(entries)
    return BenchmarkSet(
        entries=tuple(entries),
        accept_count=accept_count,
        reject_count=reject_count,
        seed=seed,
    )


def with_relevant_papers(
    record: PaperRecord, refs: Sequence[RelevantPaperRef]
) -> PaperRecord:
    """Return a copy of ``record`` carrying ``refs`` (input unchanged)."""
    return replace(record, relevant_papers=tuple(refs))
