from __future__ import annotations

import random
import string
from datetime import date

import pytest

from reviewlab.corpus import PaperRecord, RawReview, Section
from reviewlab.structured import StructuredReview, extract_verdict


def make_paper(
    paper_id: str = "paper-1",
    decision: str = "unknown",
    reviews: tuple[RawReview, ...] = (),
    meta_review: str | None = None,
    submission_date: date = date(2024, 5, 1),
    sections: tuple[Section, ...] = (Section("Introduction", "Widgets matter."),),
) -> PaperRecord:
    return PaperRecord(
        id=paper_id,
        title=f"A Study of {paper_id}",
        abstract=f"We investigate {paper_id} and report consistent improvements across benchmarks.",
        submission_date=submission_date,
        sections=sections,
        venue="TestConf 2024",
        decision=decision,
        reviews=reviews,
        meta_review=meta_review,
    )


VALID_REVIEW_TEXT = (
    "<SUMMARY>The paper proposes an adaptive calibration scheme.</SUMMARY>\n"
    "<ANALYZE>\nStrengths:\n- Clear motivation and strong baselines\n"
    "Weaknesses:\n- Missing ablations\n</ANALYZE>\n"
    "<CONCLUDE>Solid contribution overall; I recommend acceptance.</CONCLUDE>"
)

REJECT_REVIEW_TEXT = (
    "<SUMMARY>The paper revisits a known calibration trick.</SUMMARY>\n"
    "<ANALYZE>\nStrengths:\n- Readable presentation\n"
    "Weaknesses:\n- No new insight over prior work\n</ANALYZE>\n"
    "<CONCLUDE>The contribution is too thin; I recommend rejection.</CONCLUDE>"
)


def random_word(rng: random.Random, min_len: int = 2, max_len: int = 8) -> str:
    return "".join(
        rng.choice(string.ascii_lowercase) for _ in range(rng.randint(min_len, max_len))
    )


def random_phrase(rng: random.Random, min_words: int = 1, max_words: int = 8) -> str:
    return " ".join(random_word(rng) for _ in range(rng.randint(min_words, max_words)))


def random_valid_review(rng: random.Random) -> StructuredReview:
    """Generate an arbitrary review satisfying the type invariants."""
    n_strengths = rng.randint(0, 4)
    n_weaknesses = rng.randint(0, 4) if n_strengths else rng.randint(1, 4)
    tail = rng.choice(
        ["I recommend acceptance", "I recommend rejection", "I remain torn on this one",
         "accept", "this should be rejected", "no clear signal emerges"]
    )
    conclusion = f"{random_phrase(rng)}. {tail}."
    return StructuredReview(
        summary=random_phrase(rng),
        strengths=tuple(random_phrase(rng) for _ in range(n_strengths)),
        weaknesses=tuple(random_phrase(rng) for _ in range(n_weaknesses)),
        conclusion=conclusion,
        verdict=extract_verdict(conclusion),
    )


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240501)
