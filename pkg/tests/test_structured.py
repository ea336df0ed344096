from __future__ import annotations

import random

import pytest

from conftest import random_valid_review
from reviewlab.errors import ContentError, InvalidReviewError, ReviewFormatError, StructureError
from reviewlab.structured import (
    DEFAULT_GRAMMAR,
    StructuredReview,
    TagGrammar,
    extract_verdict,
    parse_structured,
    render_structured,
    validate_review,
)


def test_parse_fixture_all_fields():
    text = (
        "<SUMMARY>S</SUMMARY><ANALYZE>Strengths: - a\nWeaknesses: - b</ANALYZE>"
        "<CONCLUDE>Reject. R</CONCLUDE>"
    )
    review = parse_structured(text)
    assert review.summary == "S"
    assert review.strengths == ("a",)
    assert review.weaknesses == ("b",)
    assert review.conclusion == "Reject. R"
    assert review.verdict == "reject"


def test_parse_ignores_text_outside_tags_and_unknown_tags():
    text = (
        "Sure! Here is the review you asked for.\n"
        "<RATING>8</RATING>\n"
        "<SUMMARY>A paper about things.</SUMMARY>\n"
        "chatter between stages\n"
        "<ANALYZE>Strengths:\n- solid\nWeaknesses:\n- thin</ANALYZE>\n"
        "<CONCLUDE>I recommend acceptance.</CONCLUDE>\n"
        "Hope that helps!"
    )
    review = parse_structured(text)
    assert review.summary == "A paper about things."
    assert review.strengths == ("solid",)
    assert review.verdict == "accept"


def test_parse_missing_conclude_names_stage():
    with pytest.raises(StructureError, match="CONCLUDE"):
        parse_structured("<SUMMARY>s</SUMMARY><ANALYZE>Strengths:\n- x</ANALYZE>")


def test_parse_missing_close_marker():
    with pytest.raises(StructureError, match="close marker for SUMMARY"):
        parse_structured("<SUMMARY>s<ANALYZE>- x</ANALYZE><CONCLUDE>accept</CONCLUDE>")


def test_parse_duplicate_markers_rejected():
    text = (
        "<SUMMARY>one</SUMMARY><SUMMARY>two</SUMMARY>"
        "<ANALYZE>Strengths:\n- x</ANALYZE><CONCLUDE>accept</CONCLUDE>"
    )
    with pytest.raises(StructureError, match="SUMMARY"):
        parse_structured(text)


def test_parse_interleaved_markers_rejected():
    text = (
        "<SUMMARY>s <ANALYZE>Strengths:\n- x</SUMMARY> mixed</ANALYZE>"
        "<CONCLUDE>accept</CONCLUDE>"
    )
    with pytest.raises(StructureError):
        parse_structured(text)


def test_parse_empty_summary_is_content_error():
    text = (
        "<SUMMARY>   </SUMMARY><ANALYZE>Strengths:\n- x</ANALYZE>"
        "<CONCLUDE>accept</CONCLUDE>"
    )
    with pytest.raises(ContentError, match="SUMMARY"):
        parse_structured(text)


def test_parse_no_items_is_content_error():
    text = (
        "<SUMMARY>s</SUMMARY><ANALYZE>Looks fine to me.</ANALYZE>"
        "<CONCLUDE>accept</CONCLUDE>"
    )
    with pytest.raises(ContentError, match="ANALYZE"):
        parse_structured(text)


def test_render_minimal_contains_each_marker_pair_once():
    review = StructuredReview.build("s", ["a"], [], "Accept.")
    text = render_structured(review)
    for marker in DEFAULT_GRAMMAR.all_markers():
        assert text.count(marker) == 1


def test_render_is_deterministic_and_round_trips():
    review = StructuredReview.build(
        "A summary.", ["first strength", "second strength"], ["a weakness"],
        "Despite flaws, I recommend acceptance.",
    )
    once = render_structured(review)
    twice = render_structured(review)
    assert once == twice
    assert parse_structured(once) == review


def test_render_rejects_invariant_violations():
    no_items = StructuredReview.build("s", [], [], "Accept.")
    with pytest.raises(InvalidReviewError, match="at least one list"):
        render_structured(no_items)
    bad_verdict = StructuredReview(
        summary="s", strengths=("a",), weaknesses=(), conclusion="Accept.",
        verdict="reject",
    )
    with pytest.raises(InvalidReviewError, match="verdict"):
        render_structured(bad_verdict)
    embedded_marker = StructuredReview.build("has </SUMMARY> inside", ["a"], [], "Accept.")
    with pytest.raises(InvalidReviewError, match="marker"):
        render_structured(embedded_marker)


def test_validate_review_flags_header_lookalike_items():
    review = StructuredReview.build("s", ["Weaknesses: sneaky"], [], "Accept.")
    assert any("header" in v for v in validate_review(review))


@pytest.mark.parametrize(
    "conclusion,expected",
    [
        ("I recommend acceptance.", "accept"),
        ("This paper should be rejected.", "reject"),
        ("I cannot accept this paper.", "reject"),
        ("We should not reject this.", "accept"),
        ("Wonderful work all around.", "undetermined"),
        ("Accept? Reject? Hard to say.", "undetermined"),
        ("ACCEPT", "accept"),
    ],
)
def test_extract_verdict_table(conclusion, expected):
    assert extract_verdict(conclusion) == expected


def test_round_trip_property_many_generated_reviews():
    rng = random.Random(7)
    for _ in range(150):
        review = random_valid_review(rng)
        assert parse_structured(render_structured(review)) == review


def test_parse_total_over_noise():
    rng = random.Random(11)
    alphabet = "<>/SUMARYZECONLD ab\n-:"
    for _ in range(1500):
        text = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 60)))
        try:
            parse_structured(text)
        except ReviewFormatError:
            pass  # classified failure is the contract


def test_custom_grammar_round_trip():
    grammar = TagGrammar(
        stage_tags={
            "summary": ("[[SUM]]", "[[/SUM]]"),
            "analyze": ("[[ANA]]", "[[/ANA]]"),
            "conclude": ("[[CON]]", "[[/CON]]"),
        },
        list_item_marker="* ",
    )
    review = StructuredReview.build("s", ["a"], ["b"], "Reject this.")
    assert parse_structured(render_structured(review, grammar), grammar) == review


def test_grammar_validates_markers():
    with pytest.raises(ValueError, match="distinct"):
        TagGrammar(
            stage_tags={
                "summary": ("<X>", "<X>"),
                "analyze": ("<A>", "</A>"),
                "conclude": ("<C>", "</C>"),
            }
        )
