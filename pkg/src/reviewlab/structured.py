"""Three-stage structured reviews: tag grammar, parsing, rendering, verdicts.

A structured review is plain text partitioned into SUMMARY, ANALYZE, and
CONCLUDE stages by explicit open/close markers.  The ANALYZE stage holds
bulleted strength and weakness lists under ``Strengths:`` / ``Weaknesses:``
headers.  The rendered form is the canonical on-wire format used in prompts,
training records, and CLI output, so rendering is deterministic
byte-for-byte and ``parse(render(x)) == x`` for every valid value.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import ContentError, InvalidReviewError, StructureError

VERDICT_ACCEPT = "accept"
VERDICT_REJECT = "reject"
VERDICT_UNDETERMINED = "undetermined"
VERDICTS = (VERDICT_ACCEPT, VERDICT_REJECT, VERDICT_UNDETERMINED)

STAGE_SUMMARY = "summary"
STAGE_ANALYZE = "analyze"
STAGE_CONCLUDE = "conclude"
STAGE_ORDER = (STAGE_SUMMARY, STAGE_ANALYZE, STAGE_CONCLUDE)

# Headers are recognized only at the start of a line so that the words
# "strengths"/"weaknesses" inside item text cannot re-split the region.
_STRENGTHS_HEADER = re.compile(r"^[ \t]*strengths\s*:?", re.IGNORECASE | re.MULTILINE)
_WEAKNESSES_HEADER = re.compile(r"^[ \t]*weaknesses\s*:?", re.IGNORECASE | re.MULTILINE)

# Words that flip the polarity of a nearby verdict keyword.
_NEGATORS = frozenset(
    {"not", "cannot", "no", "never", "neither", "nor", "dont", "wont",
     "shouldnt", "cant", "couldnt", "wouldnt", "isnt"}
)
_NEGATION_WINDOW = 3


@dataclass(frozen=True)
class TagGrammar:
    """Stage markers and the list-item marker for the structured format."""

    stage_tags: dict[str, tuple[str, str]] = field(
        default_factory=lambda: {
            STAGE_SUMMARY: ("<SUMMARY>", "</SUMMARY>"),
            STAGE_ANALYZE: ("<ANALYZE>", "</ANALYZE>"),
            STAGE_CONCLUDE: ("<CONCLUDE>", "</CONCLUDE>"),
        }
    )
    list_item_marker: str = "- "

    def __post_init__(self) -> None:
        markers = [self.list_item_marker]
        for stage in STAGE_ORDER:
            if stage not in self.stage_tags:
                raise ValueError(f"grammar is missing stage {stage!r}")
            open_m, close_m = self.stage_tags[stage]
            markers.extend((open_m, close_m))
        if any(not m for m in markers):
            raise ValueError("grammar markers must be non-empty")
        if len(set(markers)) != len(markers):
            raise ValueError("grammar markers must be mutually distinct")

    def all_markers(self) -> tuple[str, ...]:
        out: list[str] = []
        for stage in STAGE_ORDER:
            out.extend(self.stage_tags[stage])
        return tuple(out)


DEFAULT_GRAMMAR = TagGrammar()


@dataclass(frozen=True)
class StructuredReview:
    """One reviewer's output: summary, strengths/weaknesses, conclusion."""

    summary: str
    strengths: tuple[str, ...]
    weaknesses: tuple[str, ...]
    conclusion: str
    verdict: str

    @classmethod
    def build(
        cls,
        summary: str,
        strengths: list[str] | tuple[str, ...],
        weaknesses: list[str] | tuple[str, ...],
        conclusion: str,
    ) -> "StructuredReview":
        """Construct a review with the verdict derived from the conclusion."""
        return cls(
            summary=summary,
            strengths=tuple(strengths),
            weaknesses=tuple(weaknesses),
            conclusion=conclusion,
            verdict=extract_verdict(conclusion),
        )


def _words(text: str) -> list[str]:
    return re.findall(r"[^\W_]+", text.lower())


def extract_verdict(conclusion: str) -> str:
    """Scan a conclusion for accept/reject keywords and return the verdict.

    The scan is case-insensitive over word prefixes (``accept*`` /
    ``reject*``).  A negator within the three preceding words flips a
    keyword to the opposite family ("cannot accept" counts as reject).
    Signals from both families, or from neither, yield ``undetermined``.
    """
    words = _words(conclusion)
    accept_signal = False
    reject_signal = False
    for i, word in enumerate(words):
        if word.startswith("accept"):
            family_is_accept = True
        elif word.startswith("reject"):
            family_is_accept = False
        else:
            continue
        window = words[max(0, i - _NEGATION_WINDOW):i]
        negated = any(w in _NEGATORS for w in window)
        if family_is_accept != negated:
            accept_signal = True
        else:
            reject_signal = True
    if accept_signal == reject_signal:
        return VERDICT_UNDETERMINED
    return VERDICT_ACCEPT if accept_signal else VERDICT_REJECT


def validate_review(review: StructuredReview, grammar: TagGrammar = DEFAULT_GRAMMAR) -> list[str]:
    """Return all invariant violations for ``review`` (empty list if valid).

    Validity here is exactly what the canonical serialization can
    round-trip: stripped non-empty summary/conclusion, no stage markers
    embedded in any field, list items that cannot be mistaken for headers
    or new bullets, and a verdict that matches the conclusion.
    """
    violations: list[str] = []
    markers = grammar.all_markers()

    def check_text(name: str, text: str) -> None:
        if not text.strip():
            violations.append(f"{name}: must be non-empty")
            return
        if text != text.strip():
            violations.append(f"{name}: must not carry leading/trailing whitespace")
        for marker in markers:
            if marker in text:
                violations.append(f"{name}: must not contain stage marker {marker!r}")

    check_text("summary", review.summary)
    check_text("conclusion", review.conclusion)

    if not review.strengths and not review.weaknesses:
        violations.append("strengths/weaknesses: at least one list must be non-empty")
    for label, items in (("strengths", review.strengths), ("weaknesses", review.weaknesses)):
        for idx, item in enumerate(items):
            name = f"{label}[{idx}]"
            check_text(name, item)
            for line in item.splitlines():
                stripped = line.lstrip()
                if stripped.startswith(grammar.list_item_marker):
                    violations.append(f"{name}: line must not start with the list marker")
                if _STRENGTHS_HEADER.match(stripped) or _WEAKNESSES_HEADER.match(stripped):
                    violations.append(f"{name}: line must not look like a section header")

    if review.verdict not in VERDICTS:
        violations.append(f"verdict: {review.verdict!r} is not a known verdict")
    elif review.verdict != extract_verdict(review.conclusion):
        violations.append(
            f"verdict: {review.verdict!r} inconsistent with conclusion "
            f"(extracts to {extract_verdict(review.conclusion)!r})"
        )
    return violations


def render_structured(review: StructuredReview, grammar: TagGrammar = DEFAULT_GRAMMAR) -> str:
    """Serialize a review into the canonical tagged text form.

    Raises InvalidReviewError when the value violates its invariants;
    everything the renderer emits is guaranteed to re-parse to an equal
    value.
    """
    violations = validate_review(review, grammar)
    if violations:
        raise InvalidReviewError(violations)

    s_open, s_close = grammar.stage_tags[STAGE_SUMMARY]
    a_open, a_close = grammar.stage_tags[STAGE_ANALYZE]
    c_open, c_close = grammar.stage_tags[STAGE_CONCLUDE]
    marker = grammar.list_item_marker

    lines: list[str] = [s_open, review.summary, s_close, a_open, "Strengths:"]
    lines.extend(marker + item for item in review.strengths)
    lines.append("Weaknesses:")
    lines.extend(marker + item for item in review.weaknesses)
    lines.extend([a_close, c_open, review.conclusion, c_close])
    return "\n".join(lines)


def _stage_content(text: str, stage: str, grammar: TagGrammar) -> tuple[str, int, int]:
    """Locate one stage and return (content, span_start, span_end)."""
    open_m, close_m = grammar.stage_tags[stage]
    opens = text.count(open_m)
    closes = text.count(close_m)
    if opens == 0 and closes == 0:
        raise StructureError(f"missing {stage.upper()} stage markers")
    if opens == 0:
        raise StructureError(f"missing open marker for {stage.upper()}")
    if closes == 0:
        raise StructureError(f"missing close marker for {stage.upper()}")
    if opens > 1 or closes > 1:
        raise StructureError(f"duplicated or nested {stage.upper()} markers")
    start = text.index(open_m)
    end = text.index(close_m)
    if end < start:
        raise StructureError(f"close marker precedes open marker for {stage.upper()}")
    content = text[start + len(open_m):end]
    return content, start, end + len(close_m)


def _parse_items(region: str, marker: str) -> list[str]:
    """Collect bulleted items from a header region.

    A line whose stripped form starts with the marker begins a new item;
    later non-bullet lines continue the current item.  Text before the
    first bullet is ignored so provider chatter does not leak into items.
    """
    items: list[str] = []
    current: list[str] | None = None
    for line in region.splitlines():
        stripped = line.lstrip()
        if stripped.startswith(marker):
            if current is not None:
                items.append("\n".join(current))
            current = [stripped[len(marker):]]
        elif current is not None:
            current.append(line)
    if current is not None:
        items.append("\n".join(current))
    return [item.strip() for item in items if item.strip()]


def _split_analysis(content: str, grammar: TagGrammar) -> tuple[list[str], list[str]]:
    s_match = _STRENGTHS_HEADER.search(content)
    w_match = _WEAKNESSES_HEADER.search(content)
    headers = sorted(
        [(m, label) for m, label in ((s_match, "s"), (w_match, "w")) if m is not None],
        key=lambda pair: pair[0].start(),
    )
    regions = {"s": "", "w": ""}
    for idx, (match, label) in enumerate(headers):
        end = headers[idx + 1][0].start() if idx + 1 < len(headers) else len(content)
        regions[label] = content[match.end():end]
    marker = grammar.list_item_marker
    return _parse_items(regions["s"], marker), _parse_items(regions["w"], marker)


def parse_structured(text: str, grammar: TagGrammar = DEFAULT_GRAMMAR) -> StructuredReview:
    """Parse raw model output into a StructuredReview.

    Total over arbitrary strings: returns a valid review or raises a
    classified ReviewFormatError, never anything else.  Text outside the
    stage markers is ignored, as are unknown tags.
    """
    if not isinstance(text, str):
        raise StructureError(f"expected text, got {type(text).__name__}")

    spans: list[tuple[int, int, str]] = []
    contents: dict[str, str] = {}
    for stage in STAGE_ORDER:
        content, start, end = _stage_content(text, stage, grammar)
        contents[stage] = content
        spans.append((start, end, stage))

    spans.sort()
    for (_, prev_end, prev_stage), (next_start, _, next_stage) in zip(spans, spans[1:]):
        if next_start < prev_end:
            raise StructureError(
                f"interleaved markers: {prev_stage.upper()} overlaps {next_stage.upper()}"
            )

    summary = contents[STAGE_SUMMARY].strip()
    conclusion = contents[STAGE_CONCLUDE].strip()
    if not summary:
        raise ContentError("SUMMARY stage is empty")
    if not conclusion:
        raise ContentError("CONCLUDE stage is empty")

    strengths, weaknesses = _split_analysis(contents[STAGE_ANALYZE], grammar)
    if not strengths and not weaknesses:
        raise ContentError("ANALYZE stage contains no strength or weakness items")

    return StructuredReview.build(summary, strengths, weaknesses, conclusion)
