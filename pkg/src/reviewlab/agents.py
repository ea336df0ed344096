"""Reviewer and area-chair agents: prompt assembly and the review pipeline.

One paper flows through N independent reviewer generations (sharing one
relevant-paper retrieval) and a single area-chair aggregation that
synthesizes the meta-review.  Prompts are assembled from editable
plain-text templates with ``{{placeholder}}`` substitution.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Sequence

from .corpus import DEFAULT_CHAR_BUDGET, PaperRecord, RelevantPaperRef
from .errors import ParseExhaustionError, PipelineError, ContentError, TransportError
from .gateway import AuditLog, ChatProvider, ChatRequest, RetryPolicy, complete_parsed
from .retrieval import RetrievalConfig
from .structured import (
    DEFAULT_GRAMMAR,
    STAGE_ANALYZE,
    STAGE_CONCLUDE,
    STAGE_SUMMARY,
    StructuredReview,
    TagGrammar,
    extract_verdict,
    parse_structured,
    render_structured,
)

_PLACEHOLDER_RE = re.compile(r"\{\{(\w+)\}\}")

REVIEWER_TEMPERATURE = 0.7
CHAIR_TEMPERATURE = 0.3


def render_template(name: str, **values: object) -> str:
    """Load ``templates/<name>.txt`` and substitute {{placeholders}}."""
    text = resources.files(__package__).joinpath(f"templates/{name}.txt").read_text(
        encoding="utf-8"
    )

    def substitute(match: re.Match) -> str:
        key = match.group(1)
        if key not in values:
            raise KeyError(f"template {name}: no value for placeholder {key!r}")
        return str(values[key])

    return _PLACEHOLDER_RE.sub(substitute, text).strip("\n")


@dataclass
class PipelineConfig:
    """Knobs for one review-generation run."""

    n_reviewers: int = 3
    reviewer_provider: ChatProvider | None = None
    chair_provider: ChatProvider | None = None
    grammar: TagGrammar = field(default_factory=TagGrammar)
    char_budget: int = DEFAULT_CHAR_BUDGET
    max_parse_retries: int = 2
    max_output_tokens: int = 2048
    reviewer_temperature: float = REVIEWER_TEMPERATURE
    chair_temperature: float = CHAIR_TEMPERATURE
    per_reviewer_retrieval: bool = False
    include_abstract_for_chair: bool = False
    retrieval_config: RetrievalConfig = field(default_factory=RetrievalConfig)
    retry_policy: RetryPolicy = field(default_factory=RetryPolicy)
    audit: AuditLog | None = None

    def __post_init__(self) -> None:
        if not (1 <= self.n_reviewers <= 8):
            raise ValueError("n_reviewers must lie in [1, 8]")
        if self.char_budget < 1:
            raise ValueError("char_budget must be positive")


@dataclass(frozen=True)
class PromptBundle:
    system_prompt: str
    paper_block: str
    relevant_block: str
    instruction_block: str

    def user_text(self) -> str:
        return "\n\n".join((self.paper_block, self.relevant_block, self.instruction_block))


@dataclass(frozen=True)
class MetaReview:
    text: str
    verdict: str


@dataclass(frozen=True)
class PipelineOutput:
    reviews: tuple[StructuredReview, ...]
    meta_review: MetaReview
    transcript: tuple[dict, ...]


def _sections_text(paper: PaperRecord) -> str:
    return "\n\n".join(f"## {s.heading}\n{s.body}" if s.heading else s.body for s in paper.sections)


def _grammar_placeholders(grammar: TagGrammar) -> dict[str, str]:
    return {
        "summary_open": grammar.stage_tags[STAGE_SUMMARY][0],
        "summary_close": grammar.stage_tags[STAGE_SUMMARY][1],
        "analyze_open": grammar.stage_tags[STAGE_ANALYZE][0],
        "analyze_close": grammar.stage_tags[STAGE_ANALYZE][1],
        "conclude_open": grammar.stage_tags[STAGE_CONCLUDE][0],
        "conclude_close": grammar.stage_tags[STAGE_CONCLUDE][1],
        "item_marker": grammar.list_item_marker.rstrip(),
    }


def assemble_reviewer_prompt(
    paper: PaperRecord,
    relevant: Sequence[RelevantPaperRef],
    config: PipelineConfig,
    reviewer_index: int = 1,
) -> PromptBundle:
    """Build the reviewer prompt: paper block, related work, instructions.

    Section text is truncated tail-first so the paper block never exceeds
    the character budget; the title and abstract always survive intact.
    """
    if len(relevant) > 2:
        raise ValueError("at most 2 relevant papers may be attached")
    if not paper.title.strip() or not paper.abstract.strip():
        raise ValueError("paper must carry a non-empty title and abstract")

    header = render_template(
        "paper_block", title=paper.title, abstract=paper.abstract, sections=""
    )
    if len(header) > config.char_budget:
        raise ValueError(
            f"char_budget {config.char_budget} cannot hold title and abstract "
            f"({len(header)} characters)"
        )
    sections = _sections_text(paper)
    # The newline joining the header to the section text costs one char.
    room = max(0, config.char_budget - len(header) - 1)
    paper_block = render_template(
        "paper_block", title=paper.title, abstract=paper.abstract, sections=sections[:room]
    )

    if relevant:
        entries = [render_template("related_header")]
        entries.extend(
            render_template(
                "related_entry", index=i, title=ref.title, abstract=ref.abstract
            )
            for i, ref in enumerate(relevant, start=1)
        )
        relevant_block = "\n\n".join(entries)
    else:
        relevant_block = render_template("related_empty")

    instruction_block = render_template(
        "reviewer_instructions", **_grammar_placeholders(config.grammar)
    )
    system_prompt = render_template(
        "reviewer_system", reviewer_index=reviewer_index, n_reviewers=config.n_reviewers
    )
    return PromptBundle(
        system_prompt=system_prompt,
        paper_block=paper_block,
        relevant_block=relevant_block,
        instruction_block=instruction_block,
    )


def generate_review(
    provider: ChatProvider,
    paper: PaperRecord,
    relevant: Sequence[RelevantPaperRef],
    config: PipelineConfig,
    reviewer_index: int = 1,
) -> StructuredReview:
    """Run one reviewer agent and parse its output into a StructuredReview."""
    bundle = assemble_reviewer_prompt(paper, relevant, config, reviewer_index)
    request = ChatRequest(
        system_prompt=bundle.system_prompt,
        user_prompt=bundle.user_text(),
        temperature=config.reviewer_temperature,
        max_output_tokens=config.max_output_tokens,
        model_name=provider.model_name,
    )
    try:
        return complete_parsed(
            provider,
            request,
            parser=lambda text: parse_structured(text, config.grammar),
            max_parse_retries=config.max_parse_retries,
            policy=config.retry_policy,
            audit=config.audit,
        )
    except ParseExhaustionError as exc:
        raise PipelineError(
            f"reviewer {reviewer_index} produced no parseable review: {exc}",
            stage=f"reviewer_{reviewer_index}",
        ) from exc


def _numbered_reviews_block(reviews: Sequence[StructuredReview], grammar: TagGrammar) -> str:
    return "\n\n".join(
        f"[Reviewer {i}]\n{render_structured(review, grammar)}"
        for i, review in enumerate(reviews, start=1)
    )


def _parse_meta(text: str) -> MetaReview:
    if not text.strip():
        raise ContentError("meta-review text is empty")
    return MetaReview(text=text.strip(), verdict=extract_verdict(text))


def generate_meta_review(
    provider: ChatProvider,
    reviews: Sequence[StructuredReview],
    config: PipelineConfig,
    paper: PaperRecord | None = None,
) -> MetaReview:
    """Aggregate reviews through the area-chair agent into a meta-review.

    The chair sees the rendered reviews numbered in submission order; the
    paper abstract is included only when the config asks for it.
    """
    if not reviews:
        raise ValueError("the area chair needs at least one review")
    abstract_block = ""
    if config.include_abstract_for_chair and paper is not None:
        abstract_block = f"[Submission abstract]\n{paper.abstract}\n\n"
    user_prompt = render_template(
        "chair_user",
        abstract_block=abstract_block,
        reviews_block=_numbered_reviews_block(reviews, config.grammar),
    )
    request = ChatRequest(
        system_prompt=render_template("chair_system"),
        user_prompt=user_prompt,
        temperature=config.chair_temperature,
        max_output_tokens=config.max_output_tokens,
        model_name=provider.model_name,
    )
    try:
        return complete_parsed(
            provider,
            request,
            parser=_parse_meta,
            max_parse_retries=config.max_parse_retries,
            policy=config.retry_policy,
            audit=config.audit,
        )
    except ParseExhaustionError as exc:
        raise PipelineError(f"area chair produced no usable meta-review: {exc}",
                            stage="chair") from exc


def run_pipeline(
    paper: PaperRecord,
    config: PipelineConfig,
    retrieval=None,
) -> PipelineOutput:
    """Full multi-role run: retrieve once, review N times, aggregate once.

    ``retrieval`` is an object with ``find(paper, config) -> refs`` (see
    reviewlab.retrieval.RelevantPaperFinder) or None to reuse the
    relevant papers already stored on the record.  Retrieval failures
    degrade to an empty related-work block with a recorded warning;
    reviewer or chair failures abort with a PipelineError naming the
    stage.
    """
    if config.reviewer_provider is None or config.chair_provider is None:
        raise ValueError("config must carry reviewer and chair providers")
    transcript: list[dict] = []

    def fetch_relevant() -> list[RelevantPaperRef]:
        if retrieval is None:
            transcript.append({"stage": "retrieval", "event": "stored",
                               "count": len(paper.relevant_papers)})
            return list(paper.relevant_papers)
        try:
            refs = retrieval.find(paper, config.retrieval_config)
            transcript.append({"stage": "retrieval", "event": "ok", "count": len(refs)})
            return refs
        except TransportError as exc:
            transcript.append(
                {"stage": "retrieval", "event": "warning",
                 "detail": f"retrieval failed, proceeding without related work: {exc}"}
            )
            return []

    shared_relevant = None if config.per_reviewer_retrieval else fetch_relevant()

    reviews: list[StructuredReview] = []
    for index in range(1, config.n_reviewers + 1):
        relevant = fetch_relevant() if config.per_reviewer_retrieval else shared_relevant
        review = generate_review(
            config.reviewer_provider, paper, relevant, config, reviewer_index=index
        )
        transcript.append(
            {"stage": f"reviewer_{index}", "event": "ok", "verdict": review.verdict}
        )
        reviews.append(review)

    meta = generate_meta_review(
        config.chair_provider, reviews, config,
        paper=paper if config.include_abstract_for_chair else None,
    )
    transcript.append({"stage": "chair", "event": "ok", "verdict": meta.verdict})
    return PipelineOutput(
        reviews=tuple(reviews), meta_review=meta, transcript=tuple(transcript)
    )
