"""Training-data construction: transcription, verification, record emission.

Free-form review comments are rewritten into the structured tag format by
an LLM (reviews already in that format bypass the model), checked for
content preservation, and emitted as supervised training records: one
reviewer-style record per (paper, review) and one chair-style record per
paper with a meta-review.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace
from typing import Collection, Sequence

from .agents import (
    PipelineConfig,
    _grammar_placeholders,
    _numbered_reviews_block,
    assemble_reviewer_prompt,
    render_template,
)
from .corpus import PaperRecord, RawReview, RelevantPaperRef, with_relevant_papers
from .errors import ParseExhaustionError, ReviewFormatError, TranscriptionError
from .gateway import AuditLog, ChatProvider, ChatRequest, RetryPolicy, complete_parsed
from .metrics import DEFAULT_STOP_WORDS, tokenize
from .retrieval import RetrievalConfig
from .structured import (
    DEFAULT_GRAMMAR,
    StructuredReview,
    TagGrammar,
    parse_structured,
    render_structured,
)

KIND_REVIEWER = "reviewer"
KIND_CHAIR = "chair"

DEFAULT_RECALL_THRESHOLD = 0.85

TRANSCRIBE_TEMPERATURE = 0.3


@dataclass(frozen=True)
class TrainRecord:
    kind: str
    input_text: str
    target_text: str
    source_paper_id: str


@dataclass(frozen=True)
class TranscriptionCheck:
    content_recall: float
    passed: bool
    threshold: float


@dataclass(frozen=True)
class EmissionResult:
    records: tuple[TrainRecord, ...]
    exclusions: dict[str, int]

    @property
    def excluded_total(self) -> int:
        return sum(self.exclusions.values())


def transcribe_review(
    raw: RawReview,
    provider: ChatProvider | None,
    grammar: TagGrammar = DEFAULT_GRAMMAR,
    max_parse_retries: int = 2,
    policy: RetryPolicy = RetryPolicy(),
    audit: AuditLog | None = None,
) -> StructuredReview:
    """Convert a raw review into the structured format.

    Reviews flagged is_structured parse directly with zero provider
    calls; everything else goes through the transcription prompt.
    """
    if not raw.text.strip():
        raise ValueError("raw review text must be non-empty")
    if raw.is_structured:
        try:
            return parse_structured(raw.text, grammar)
        except ReviewFormatError as exc:
            raise TranscriptionError(
                f"review {raw.reviewer_id!r} claims to be structured but does not parse: {exc}",
                raw_text=raw.text,
            ) from exc
    if provider is None:
        raise ValueError("unstructured reviews require a transcription provider")

    request = ChatRequest(
        system_prompt=render_template("transcribe_system"),
        user_prompt=render_template(
            "transcribe_user", review=raw.text, **_grammar_placeholders(grammar)
        ),
        temperature=TRANSCRIBE_TEMPERATURE,
        model_name=provider.model_name,
    )
    try:
        return complete_parsed(
            provider,
            request,
            parser=lambda text: parse_structured(text, grammar),
            max_parse_retries=max_parse_retries,
            policy=policy,
            audit=audit,
        )
    except ParseExhaustionError as exc:
        raise TranscriptionError(
            f"transcription of review {raw.reviewer_id!r} never parsed: {exc}",
            raw_text=raw.text,
        ) from exc


def verify_transcription(
    raw: RawReview,
    structured: StructuredReview,
    threshold: float = DEFAULT_RECALL_THRESHOLD,
    grammar: TagGrammar = DEFAULT_GRAMMAR,
    stop_words: Collection[str] = DEFAULT_STOP_WORDS,
) -> TranscriptionCheck:
    """Check content preservation by content-word type recall.

    The fraction of the raw review's content-word types (stop words
    removed) that survive into the rendered structured text must reach
    the threshold.
    """
    if not (0.0 <= threshold <= 1.0):
        raise ValueError("threshold must lie in [0, 1]")
    raw_types = {t for t in tokenize(raw.text).tokens if t not in stop_words}
    if not raw_types:
        return TranscriptionCheck(content_recall=1.0, passed=True, threshold=threshold)
    rendered_types = set(tokenize(render_structured(structured, grammar)).tokens)
    recall = len(raw_types & rendered_types) / len(raw_types)
    return TranscriptionCheck(
        content_recall=recall, passed=recall >= threshold, threshold=threshold
    )


def annotate_relevant(
    paper: PaperRecord,
    finder,
    config: RetrievalConfig,
) -> PaperRecord:
    """Attach retrieved relevant papers to a copy of the record.

    ``finder`` is anything with ``find(paper, config) -> refs`` (see
    reviewlab.retrieval.RelevantPaperFinder).  The input record is never
    modified; re-annotation replaces previous refs rather than appending.
    """
    refs: Sequence[RelevantPaperRef] = finder.find(paper, config)
    return with_relevant_papers(paper, refs[:config.k])


def transcribe_corpus(
    corpus: Sequence[PaperRecord],
    provider: ChatProvider | None,
    grammar: TagGrammar = DEFAULT_GRAMMAR,
    threshold: float = DEFAULT_RECALL_THRESHOLD,
    max_parse_retries: int = 2,
    policy: RetryPolicy = RetryPolicy(),
    audit: AuditLog | None = None,
) -> tuple[list[PaperRecord], dict[str, int]]:
    """Transcribe and verify every review, returning a rewritten corpus.

    Reviews that transcribe and pass the preservation check are replaced
    by their canonical structured text (is_structured=True); the rest are
    dropped from the record and tallied by failure reason.
    """
    failures: Counter = Counter()
    out: list[PaperRecord] = []
    for paper in corpus:
        kept: list[RawReview] = []
        for raw in paper.reviews:
            try:
                structured = transcribe_review(
                    raw, provider, grammar, max_parse_retries, policy, audit
                )
            except TranscriptionError:
                failures["transcription_failed"] += 1
                continue
            check = verify_transcription(raw, structured, threshold, grammar)
            if not check.passed:
                failures["content_check_failed"] += 1
                continue
            kept.append(
                RawReview(
                    reviewer_id=raw.reviewer_id,
                    text=render_structured(structured, grammar),
                    is_structured=True,
                )
            )
        out.append(replace(paper, reviews=tuple(kept)))
    return out, dict(failures)


def emit_records(
    corpus: Sequence[PaperRecord],
    kind: str,
    grammar: TagGrammar = DEFAULT_GRAMMAR,
    char_budget: int | None = None,
) -> EmissionResult:
    """Emit supervised training records of one kind from a prepared corpus.

    Reviewer kind: one record per (paper, structured review); the input is
    the assembled reviewer prompt (paper block plus up to two relevant
    papers) and the target is the canonical serialized review.  Chair
    kind: one record per paper with at least one structured review and a
    meta-review; the input is the numbered rendered reviews and the target
    is the meta-review text.  Reviews that are unstructured or fail to
    parse are excluded and counted, never raised.
    """
    if kind not in (KIND_REVIEWER, KIND_CHAIR):
        raise ValueError(f"unknown record kind {kind!r}")
    config = PipelineConfig()
    if char_budget is not None:
        config.char_budget = char_budget

    records: list[TrainRecord] = []
    exclusions: Counter = Counter()
    for paper in corpus:
        parsed_reviews: list[StructuredReview] = []
        for raw in paper.reviews:
            if not raw.is_structured:
                exclusions["unstructured_review"] += 1
                continue
            try:
                parsed_reviews.append(parse_structured(raw.text, grammar))
            except ReviewFormatError:
                exclusions["unparseable_review"] += 1

        if kind == KIND_REVIEWER:
            for review in parsed_reviews:
                bundle = assemble_reviewer_prompt(
                    paper, paper.relevant_papers[:2], config
                )
                records.append(
                    TrainRecord(
                        kind=KIND_REVIEWER,
                        input_text=bundle.user_text(),
                        target_text=render_structured(review, grammar),
                        source_paper_id=paper.id,
                    )
                )
        else:
            if paper.meta_review is None or not paper.meta_review.strip():
                exclusions["missing_meta_review"] += 1
                continue
            if not parsed_reviews:
                exclusions["no_structured_reviews"] += 1
                continue
            records.append(
                TrainRecord(
                    kind=KIND_CHAIR,
                    input_text=_numbered_reviews_block(parsed_reviews, grammar),
                    target_text=paper.meta_review,
                    source_paper_id=paper.id,
                )
            )
    return EmissionResult(records=tuple(records), exclusions=dict(exclusions))
