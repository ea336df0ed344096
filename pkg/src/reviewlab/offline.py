"""A self-contained provider that answers every prompt deterministically.

Backs the ``mock`` provider profile so the whole toolkit runs offline:
reviewer prompts get a synthesized tagged review, chair prompts get a
meta-review following the reviewer majority, transcription prompts get a
content-preserving restructuring, and judge prompts get a content-keyed
(never positional) preference.  Outputs depend only on the prompt text
and the salt, so repeated runs are bit-identical and two salts act as two
distinct "models".
"""

from __future__ import annotations

import hashlib
import re

from .gateway import ChatProvider, ChatRequest, ChatResponse
from .structured import (
    DEFAULT_GRAMMAR,
    STAGE_ANALYZE,
    STAGE_CONCLUDE,
    STAGE_SUMMARY,
    StructuredReview,
    TagGrammar,
    VERDICT_ACCEPT,
    VERDICT_REJECT,
    extract_verdict,
    render_structured,
)

_STRENGTH_PHRASES = (
    "The problem setting is well motivated and the exposition stays readable",
    "The method is simple to apply and the design choices are justified",
    "The experiments cover several baselines and the gains look consistent",
    "The paper positions itself honestly against the related work",
    "The analysis section isolates where the improvement comes from",
)
_WEAKNESS_PHRASES = (
    "The evaluation omits an obvious baseline, leaving the comparison incomplete",
    "Several claims outrun what the reported experiments can support",
    "The method section leaves key hyperparameters unstated",
    "The novelty over prior work is thinner than the introduction suggests",
    "The limitations discussion is cursory and skips failure cases",
)

_TITLE_RE = re.compile(r"^Title:\s*(.+)$", re.MULTILINE)
_ABSTRACT_RE = re.compile(r"^Abstract:\s*\n(.*?)(?:\n\n|\Z)", re.MULTILINE | re.DOTALL)
_SECTION_RE = re.compile(r"\[(Review [12]|Original review|Reference review)\]\n(.*?)(?=\n\[|\Z)", re.DOTALL)


def _digest(*parts: str) -> int:
    joined = "\x1f".join(parts)
    return int.from_bytes(hashlib.sha256(joined.encode("utf-8")).digest()[:8], "big")


class OfflineProvider(ChatProvider):
    """Deterministic stand-in for a remote chat model."""

    name = "offline"

    def __init__(self, salt: str = "", grammar: TagGrammar = DEFAULT_GRAMMAR) -> None:
        super().__init__()
        self.salt = salt
        self.grammar = grammar
        self.model_name = f"offline-{salt}" if salt else "offline"

    # -- prompt-kind specific synthesis -------------------------------------

    def _scrub(self, text: str) -> str:
        # Prompt-derived text must never smuggle grammar markers into a review.
        for marker in self.grammar.all_markers():
            text = text.replace(marker, " ")
        return " ".join(text.split())

    def _review_reply(self, request: ChatRequest) -> str:
        prompt = request.user_prompt
        title_match = _TITLE_RE.search(prompt)
        title = self._scrub(title_match.group(1)) if title_match else "the submission"
        abstract_match = _ABSTRACT_RE.search(prompt)
        abstract_words = ""
        if abstract_match:
            abstract_words = self._scrub(" ".join(abstract_match.group(1).split()[:30]))

        seed = _digest(self.salt, request.system_prompt, prompt)
        strengths = [
            _STRENGTH_PHRASES[seed % len(_STRENGTH_PHRASES)],
            _STRENGTH_PHRASES[(seed // 7) % len(_STRENGTH_PHRASES)],
        ]
        weaknesses = [_WEAKNESS_PHRASES[(seed // 49) % len(_WEAKNESS_PHRASES)]]
        accept = seed % 2 == 0
        conclusion = (
            f"Weighing the analysis above, I recommend "
            f"{'acceptance' if accept else 'rejection'} of this paper."
        )
        summary = f"This paper, titled '{title}', makes the following case: {abstract_words}".strip().rstrip(":")
        review = StructuredReview.build(
            summary=summary,
            strengths=list(dict.fromkeys(strengths)),
            weaknesses=weaknesses,
            conclusion=conclusion,
        )
        return render_structured(review, self.grammar)

    def _stage_spans(self, text: str, stage: str) -> list[str]:
        open_tag, close_tag = self.grammar.stage_tags[stage]
        spans = []
        start = 0
        while True:
            i = text.find(open_tag, start)
            if i < 0:
                break
            j = text.find(close_tag, i)
            if j < 0:
                break
            spans.append(text[i + len(open_tag):j].strip())
            start = j + len(close_tag)
        return spans

    def _chair_reply(self, request: ChatRequest) -> str:
        text = request.user_prompt
        verdicts = [extract_verdict(c) for c in self._stage_spans(text, STAGE_CONCLUDE)]
        accepts = verdicts.count(VERDICT_ACCEPT)
        rejects = verdicts.count(VERDICT_REJECT)
        decision = "acceptance" if accepts >= rejects else "rejection"

        summaries = self._stage_spans(text, STAGE_SUMMARY)
        topic = " ".join(summaries[0].split()[:40]) if summaries else "the submission"
        analyses = self._stage_spans(text, STAGE_ANALYZE)
        points = []
        for block in analyses:
            for line in block.splitlines():
                stripped = line.lstrip()
                if stripped.startswith(self.grammar.list_item_marker):
                    points.append(stripped[len(self.grammar.list_item_marker):])
        seed = _digest(self.salt, "chair", text)
        named_point = points[seed % len(points)] if points else "the overall execution"

        openers = (
            "The panel converged after weighing the individual assessments.",
            "Discussion among the reviewers settled the main disagreements.",
            "After reconciling the reviews, a consistent picture emerged.",
            "The reviews, read together, point in one direction.",
        )
        return (
            f"Meta-review: {openers[seed % len(openers)]} {topic} "
            f"{accepts} of {len(verdicts)} reviewers leaned positive. "
            f"The point that carried the most weight was this: {named_point} "
            f"Final recommendation: {decision}."
        )

    def _transcribe_reply(self, request: ChatRequest) -> str:
        sections = dict(_SECTION_RE.findall(request.user_prompt))
        original = sections.get("Original review", "").strip()
        # Scrub anything that would collide with the tag grammar.
        for marker in self.grammar.all_markers():
            original = original.replace(marker, " ")
        cleaned_lines = []
        for line in original.splitlines():
            stripped = line.lstrip()
            if stripped.startswith(self.grammar.list_item_marker):
                stripped = stripped[len(self.grammar.list_item_marker):]
            cleaned_lines.append(stripped)
        body = "\n".join(cleaned_lines).strip() or "(empty review)"

        verdict = extract_verdict(body)
        if verdict == VERDICT_ACCEPT:
            conclusion = "The original reviewer's recommendation amounts to acceptance."
        elif verdict == VERDICT_REJECT:
            conclusion = "The original reviewer's recommendation amounts to rejection."
        else:
            conclusion = "The original reviewer takes no clear position."
        review = StructuredReview.build(
            summary=body,
            strengths=["The points above are reproduced verbatim from the original review."],
            weaknesses=[],
            conclusion=conclusion,
        )
        return render_structured(review, self.grammar)

    def _judge_reply(self, request: ChatRequest) -> str:
        sections = dict(_SECTION_RE.findall(request.user_prompt))
        review_1 = sections.get("Review 1", "")
        review_2 = sections.get("Review 2", "")
        # Content-keyed preference: the same two texts always produce the
        # same winner regardless of slot order.
        h1 = _digest(self.salt, "judge", review_1.strip())
        h2 = _digest(self.salt, "judge", review_2.strip())
        slot = 1 if h1 <= h2 else 2
        return (
            "Both candidates track the reference at a comparable level of detail; "
            f"the closer match in content and form is candidate {slot}.\n"
            f"Answer: Review {slot}"
        )

    # -- dispatch ------------------------------------------------------------

    def send(self, request: ChatRequest) -> ChatResponse:
        prompt = request.user_prompt
        if "Answer: Review 1" in prompt:
            text = self._judge_reply(request)
        elif "[Original review]" in prompt:
            text = self._transcribe_reply(request)
        elif "[Reviewer 1]" in prompt:
            text = self._chair_reply(request)
        else:
            text = self._review_reply(request)
        return ChatResponse(
            text=text,
            usage=(len(prompt) // 4, len(text) // 4),
            latency=0.0,
        )
