"""Review Arena: pairwise LLM-judged tournaments over generated reviews.

Every model pair meets once per paper.  A pair is judged twice, with the
presentation order reversed the second time, so a judge that merely likes
the first slot cannot decide a winner: only agreement across both
orderings counts as a win, and disagreement splits the point half-half.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Mapping, Sequence

from .agents import render_template
from .errors import ContentError, CoverageError, JudgeError, ParseExhaustionError
from .gateway import AuditLog, ChatProvider, ChatRequest, RetryPolicy, complete_parsed

ORDER_FORWARD = "forward"
ORDER_REVERSED = "reversed"

RESULT_A_WINS = "a_wins"
RESULT_B_WINS = "b_wins"
RESULT_SPLIT = "split"

JUDGE_TEMPERATURE = 0.3

_ANSWER_RE = re.compile(r"answer\s*:\s*review\s*([12])", re.IGNORECASE)


@dataclass(frozen=True)
class ArenaPair:
    paper_id: str
    human_reference: str
    entry_a: tuple[str, str]  # (model label, review text)
    entry_b: tuple[str, str]

    def __post_init__(self) -> None:
        if self.entry_a[0] == self.entry_b[0]:
            raise ValueError("a pair must compare two distinct model labels")


@dataclass(frozen=True)
class JudgeVerdict:
    preferred: str  # "A" or "B"
    rationale: str
    ordering: str


@dataclass(frozen=True)
class ArenaOutcome:
    pair: ArenaPair
    forward: JudgeVerdict
    reversed: JudgeVerdict
    result: str


@dataclass(frozen=True)
class WinRateRow:
    model: str
    wins: float
    comparisons: int
    win_rate: float


@dataclass(frozen=True)
class WinRateTable:
    rows: tuple[WinRateRow, ...]

    def as_dict(self) -> dict:
        return {
            "rows": [
                {
                    "model": row.model,
                    "wins": row.wins,
                    "comparisons": row.comparisons,
                    "win_rate": row.win_rate,
                }
                for row in self.rows
            ]
        }


def _parse_answer(text: str) -> str:
    """Last-match scan for the constrained 'Answer: Review N' line."""
    matches = _ANSWER_RE.findall(text)
    if not matches:
        raise ContentError('reply lacks a final "Answer: Review 1" or "Answer: Review 2" line')
    return matches[-1]


def judge_pair(
    judge_provider: ChatProvider,
    pair: ArenaPair,
    ordering: str,
    max_parse_retries: int = 2,
    policy: RetryPolicy = RetryPolicy(),
    audit: AuditLog | None = None,
) -> JudgeVerdict:
    """One judged comparison under the given presentation ordering.

    The judge sees the human reference first, then the two candidates as
    "Review 1"/"Review 2"; the slot it names is mapped back to the A/B
    labels according to the ordering.
    """
    if ordering not in (ORDER_FORWARD, ORDER_REVERSED):
        raise ValueError(f"unknown ordering {ordering!r}")
    if not pair.entry_a[1].strip() or not pair.entry_b[1].strip():
        raise ValueError("both entry texts must be non-empty")
    if ordering == ORDER_FORWARD:
        slot_1, slot_2 = pair.entry_a[1], pair.entry_b[1]
        slot_to_label = {"1": "A", "2": "B"}
    else:
        slot_1, slot_2 = pair.entry_b[1], pair.entry_a[1]
        slot_to_label = {"1": "B", "2": "A"}

    request = ChatRequest(
        system_prompt=render_template("judge_system"),
        user_prompt=render_template(
            "judge_user",
            reference=pair.human_reference,
            review_1=slot_1,
            review_2=slot_2,
        ),
        temperature=JUDGE_TEMPERATURE,
        model_name=judge_provider.model_name,
    )

    def parser(text: str) -> JudgeVerdict:
        slot = _parse_answer(text)
        return JudgeVerdict(preferred=slot_to_label[slot], rationale=text.strip(),
                            ordering=ordering)

    try:
        return complete_parsed(
            judge_provider, request, parser,
            max_parse_retries=max_parse_retries, policy=policy, audit=audit,
        )
    except ParseExhaustionError as exc:
        raise JudgeError(
            f"judge gave no parseable verdict for paper {pair.paper_id}: {exc}"
        ) from exc


def evaluate_pair(
    judge_provider: ChatProvider,
    pair: ArenaPair,
    max_parse_retries: int = 2,
    policy: RetryPolicy = RetryPolicy(),
    audit: AuditLog | None = None,
) -> ArenaOutcome:
    """Double-judge one pair (forward then reversed) and combine verdicts."""
    forward = judge_pair(judge_provider, pair, ORDER_FORWARD,
                         max_parse_retries, policy, audit)
    reverse = judge_pair(judge_provider, pair, ORDER_REVERSED,
                         max_parse_retries, policy, audit)
    if forward.preferred == "A" and reverse.preferred == "A":
        result = RESULT_A_WINS
    elif forward.preferred == "B" and reverse.preferred == "B":
        result = RESULT_B_WINS
    else:
        result = RESULT_SPLIT
    return ArenaOutcome(pair=pair, forward=forward, reversed=reverse, result=result)


def tournament(
    judge_provider: ChatProvider,
    entries: Mapping[str, Mapping[str, str]],
    references: Mapping[str, str],
    paper_ids: Sequence[str] | None = None,
    max_parse_retries: int = 2,
    policy: RetryPolicy = RetryPolicy(),
    audit: AuditLog | None = None,
    on_outcome: Callable[[ArenaOutcome], None] | None = None,
) -> WinRateTable:
    """Round-robin every model pair over every paper and tally win rates.

    ``entries`` maps model label -> paper id -> review text; every model
    must cover every paper.  Splits credit half a win to each side, so
    total wins always equal total comparisons.  Rows come back sorted by
    win rate descending (ties by label).
    """
    if len(entries) < 2:
        raise ValueError("a tournament needs at least 2 models")
    papers = list(paper_ids) if paper_ids is not None else sorted(references)
    for paper_id in papers:
        if paper_id not in references:
            raise CoverageError(f"no human reference for paper {paper_id!r}")
        for model, reviews in entries.items():
            if paper_id not in reviews or not str(reviews[paper_id]).strip():
                raise CoverageError(
                    f"model {model!r} has no review for paper {paper_id!r}"
                )

    wins: dict[str, float] = {model: 0.0 for model in entries}
    comparisons: dict[str, int] = {model: 0 for model in entries}
    for paper_id in papers:
        for model_a, model_b in combinations(sorted(entries), 2):
            pair = ArenaPair(
                paper_id=paper_id,
                human_reference=references[paper_id],
                entry_a=(model_a, entries[model_a][paper_id]),
                entry_b=(model_b, entries[model_b][paper_id]),
            )
            outcome = evaluate_pair(judge_provider, pair, max_parse_retries, policy, audit)
            if on_outcome is not None:
                on_outcome(outcome)
            comparisons[model_a] += 1
            comparisons[model_b] += 1
            if outcome.result == RESULT_A_WINS:
                wins[model_a] += 1.0
            elif outcome.result == RESULT_B_WINS:
                wins[model_b] += 1.0
            else:
                wins[model_a] += 0.5
                wins[model_b] += 0.5

    rows = [
        WinRateRow(
            model=model,
            wins=wins[model],
            comparisons=comparisons[model],
            win_rate=100.0 * wins[model] / comparisons[model] if comparisons[model] else 0.0,
        )
        for model in entries
    ]
    rows.sort(key=lambda row: (-row.win_rate, row.model))
    return WinRateTable(rows=tuple(rows))
