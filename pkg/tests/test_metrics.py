from __future__ import annotations

import random

import pytest

import bruteforce as bf
from reviewlab.metrics import (
    DEFAULT_STOP_WORDS,
    ROUGE_1,
    ROUGE_L,
    LexiconSentimentProvider,
    MetricConfig,
    MetricReport,
    ModelSentimentProvider,
    bleu,
    build_report,
    distinct_n,
    evaluate_collection,
    extract_propositions,
    inverse_self_bleu,
    inverse_self_bleu_display,
    ngrams,
    rouge,
    self_bleu,
    sentiment_consistency,
    sentiment_polarity,
    spice_like,
    tokenize,
)

ALPHABET = "abcde"


def random_tokens(rng: random.Random, min_len: int = 0, max_len: int = 12) -> list[str]:
    return [rng.choice(ALPHABET) for _ in range(rng.randint(min_len, max_len))]


def seq(text: str):
    return tokenize(text)


# -- tokenize ------------------------------------------------------------------


def test_tokenize_rule_fixture():
    assert list(tokenize("The cat, the CAT.").tokens) == ["the", "cat", "the", "cat"]


def test_tokenize_empty():
    assert tokenize("").tokens == ()


def test_tokenize_idempotent(rng):
    for _ in range(50):
        tokens = random_tokens(rng, 1, 12)
        joined = " ".join(tokens)
        assert list(tokenize(joined).tokens) == tokens


# -- distinct ------------------------------------------------------------------


def test_distinct_all_unique_tokens():
    result = distinct_n(seq("a b c d e f g h i j"), 4)
    assert result.score == pytest.approx(100.0)
    assert not result.degenerate


def test_distinct_alternation_fixture():
    result = distinct_n(seq("a b a b a b"), 4)
    assert result.score == pytest.approx(66.667, abs=1e-3)


def test_distinct_degenerate_short_text():
    result = distinct_n(seq("a b c"), 4)
    assert result.score == 0.0
    assert result.degenerate


def test_distinct_matches_bruteforce(rng):
    for _ in range(200):
        tokens = random_tokens(rng)
        for n in (1, 2, 4):
            mine = distinct_n(tokenize(" ".join(tokens)), n).score
            theirs = bf.naive_distinct(tokens, n)
            assert mine == pytest.approx(theirs, abs=1e-9)


def test_distinct_numerator_monotone_under_novel_ngram(rng):
    for _ in range(100):
        tokens = random_tokens(rng, 4, 12)
        before = len(set(ngrams(tokens, 4)))
        extended = tokens + [rng.choice(ALPHABET)]
        after = len(set(ngrams(extended, 4)))
        assert after >= before


# -- bleu ----------------------------------------------------------------------


def test_bleu_identity():
    text = seq("a b c d e f")
    assert bleu(text, [text], 4) == pytest.approx(1.0)


def test_bleu_disjoint_devolves_to_floor():
    value = bleu(seq("a a a a"), [seq("b b b b")], 4)
    assert value <= 1e-9 + 1e-12


def test_bleu_clipped_counts_fixture():
    value = bleu(seq("a b c d"), [seq("a b c e")], 2)
    assert value == pytest.approx(0.70711, abs=1e-4)


def test_bleu_empty_hypothesis():
    assert bleu(seq(""), [seq("a b")], 2) == 0.0


def test_bleu_requires_reference():
    with pytest.raises(ValueError):
        bleu(seq("a"), [], 2)


def test_bleu_matches_bruteforce(rng):
    for _ in range(200):
        hyp = random_tokens(rng)
        refs = [random_tokens(rng, 1, 12) for _ in range(rng.randint(1, 3))]
        mine = bleu(
            tokenize(" ".join(hyp)), [tokenize(" ".join(r)) for r in refs], 4
        )
        theirs = bf.naive_bleu(hyp, refs, 4)
        assert mine == pytest.approx(theirs, abs=1e-9)


# -- self-bleu / inverse -------------------------------------------------------


def test_self_bleu_identical_texts():
    text = seq("a b c d e")
    assert self_bleu([text, text, text], 4) == pytest.approx(1.0)


def test_self_bleu_requires_two_texts():
    with pytest.raises(ValueError):
        self_bleu([seq("a b")], 4)


def test_self_bleu_matches_bruteforce(rng):
    for _ in range(60):
        texts = [random_tokens(rng, 1, 10) for _ in range(rng.randint(2, 4))]
        mine = self_bleu([tokenize(" ".join(t)) for t in texts], 4)
        theirs = bf.naive_self_bleu(texts, 4)
        assert mine == pytest.approx(theirs, abs=1e-9)


def test_self_bleu_permutation_invariant(rng):
    texts = [tokenize(" ".join(random_tokens(rng, 2, 10))) for _ in range(4)]
    shuffled = list(texts)
    rng.shuffle(shuffled)
    assert self_bleu(texts, 4) == pytest.approx(self_bleu(shuffled, 4), abs=1e-12)


def test_inverse_self_bleu_identical_is_zero():
    text = seq("a b c d e")
    assert inverse_self_bleu([text, text], 4) == pytest.approx(0.0, abs=1e-6)


def test_inverse_self_bleu_disjoint_is_hundred():
    texts = [seq("a a a a a"), seq("b b b b b"), seq("c c c c c")]
    assert inverse_self_bleu(texts, 4) == pytest.approx(100.0, abs=1e-4)


def test_inverse_display_matches_reported_human_value():
    assert inverse_self_bleu_display(0.1016) == pytest.approx(89.84, abs=1e-9)


# -- rouge ---------------------------------------------------------------------


def test_rouge_identity_both_variants():
    text = seq("alpha beta gamma")
    for variant in (ROUGE_1, ROUGE_L):
        score = rouge(text, text, variant)
        assert (score.precision, score.recall, score.f1) == (1.0, 1.0, 1.0)


def test_rouge1_fixture():
    score = rouge(seq("the cat sat"), seq("the cat ran"), ROUGE_1)
    assert score.f1 == pytest.approx(0.6667, abs=1e-4)


def test_rougeL_fixture():
    score = rouge(seq("a b c d"), seq("a c b d"), ROUGE_L)
    assert score.f1 == pytest.approx(0.75)


def test_rouge_empty_side_is_zero():
    assert rouge(seq(""), seq("a"), ROUGE_1) == rouge(seq("a"), seq(""), ROUGE_L)


def test_rouge_matches_bruteforce(rng):
    for _ in range(200):
        gen = random_tokens(rng)
        ref = random_tokens(rng)
        gen_seq, ref_seq = tokenize(" ".join(gen)), tokenize(" ".join(ref))
        assert rouge(gen_seq, ref_seq, ROUGE_1).f1 == pytest.approx(
            bf.naive_rouge1_f1(gen, ref), abs=1e-9
        )
        assert rouge(gen_seq, ref_seq, ROUGE_L).f1 == pytest.approx(
            bf.naive_rougeL_f1(gen, ref), abs=1e-9
        )


# -- propositions / spice ------------------------------------------------------


def test_extract_propositions_fixture():
    props = extract_propositions("Good method.", stop_words=frozenset())
    assert props == {("good",), ("method",), ("good", "method")}


def test_extract_propositions_empty():
    assert extract_propositions("") == set()


def test_extract_propositions_deterministic():
    text = "The method is good. The results are weak!"
    assert extract_propositions(text) == extract_propositions(text)


def test_propositions_do_not_cross_sentences():
    props = extract_propositions("alpha. beta.", stop_words=frozenset())
    assert ("alpha", "beta") not in props


def test_spice_identity():
    text = "The proposed method improves calibration."
    assert spice_like(text, text).score == pytest.approx(100.0)


def test_spice_disjoint():
    assert spice_like("alpha beta", "gamma delta", stop_words=frozenset()).score == 0.0


def test_spice_half_overlap_fixture():
    value = spice_like("alpha. beta.", "alpha. gamma.", stop_words=frozenset())
    assert value.score == pytest.approx(50.0)


def test_spice_degenerate_when_both_empty():
    result = spice_like("", "")
    assert result.score == 0.0 and result.degenerate


def test_spice_matches_bruteforce(rng):
    words = ["alpha", "beta", "gamma", "delta", "epsilon", "the", "of"]
    for _ in range(200):
        gen = " ".join(rng.choice(words) for _ in range(rng.randint(0, 12)))
        ref = " ".join(rng.choice(words) for _ in range(rng.randint(0, 12)))
        mine = spice_like(gen, ref, DEFAULT_STOP_WORDS).score
        theirs = bf.naive_spice(gen, ref, DEFAULT_STOP_WORDS)
        assert mine == pytest.approx(theirs, abs=1e-9)


# -- sentiment -----------------------------------------------------------------


def test_sentiment_empty_text_is_neutral():
    assert sentiment_polarity("", LexiconSentimentProvider()).value == 0.0


def test_sentiment_positive_words_positive_sign():
    assert sentiment_polarity("good solid great", LexiconSentimentProvider()).value > 0


def test_sentiment_negation_fixture():
    value = sentiment_polarity("not good", LexiconSentimentProvider()).value
    assert value == pytest.approx(-0.341, abs=1e-3)


def test_sentiment_booster_strengthens():
    provider = LexiconSentimentProvider()
    plain = provider.polarity("good").value
    boosted = provider.polarity("very good").value
    dampened = provider.polarity("slightly good").value
    assert boosted > plain > dampened > 0


def test_sentiment_consistency_identical():
    assert sentiment_consistency("good", "good", LexiconSentimentProvider()) == 100.0


def test_sentiment_consistency_extremes():
    calls = iter([1.0, -1.0])
    provider = ModelSentimentProvider(classify=lambda _: next(calls))
    assert sentiment_consistency("x", "y", provider) == pytest.approx(0.0)


def test_sentiment_consistency_formula():
    calls = iter([0.5, 0.0])
    provider = ModelSentimentProvider(classify=lambda _: next(calls))
    assert sentiment_consistency("x", "y", provider) == pytest.approx(75.0)


# -- composite -----------------------------------------------------------------


HUMAN_ROW = (98.88, 89.84, 100.0, 100.0, 100.0, 100.0, 100.0)
OURS_ROW = (96.57, 77.60, 42.88, 19.27, 15.75, 44.71, 86.26)


def as_lists(row):
    return dict(zip(MetricReport.COMPONENT_FIELDS, ([v] for v in row)))


def test_build_report_reference_rows():
    assert build_report(as_lists(HUMAN_ROW)).overall == pytest.approx(98.39, abs=0.01)
    assert build_report(as_lists(OURS_ROW)).overall == pytest.approx(54.72, abs=0.01)


def test_build_report_all_zero():
    assert build_report(as_lists((0,) * 7)).overall == 0.0


def test_build_report_mean_property(rng):
    for _ in range(100):
        row = [rng.uniform(0, 100) for _ in range(7)]
        report = build_report(as_lists(row))
        assert report.overall == pytest.approx(sum(row) / 7, abs=1e-9)


def test_build_report_rejects_empty_and_misaligned():
    lists = as_lists(HUMAN_ROW)
    lists["rouge1_f1"] = []
    with pytest.raises(ValueError, match="empty"):
        build_report(lists)
    lists = as_lists(HUMAN_ROW)
    lists["rouge1_f1"] = [1.0, 2.0]
    with pytest.raises(ValueError, match="misaligned"):
        build_report(lists)


def test_evaluate_collection_end_to_end():
    generated = {
        "p1": "The method is sound and the writing is clear. I recommend acceptance.",
        "p2": "The evaluation is weak and the claims are overstated. Reject.",
    }
    references = {
        "p1": "Reviewers found the method sound and the paper clear. Accept.",
        "p2": "The committee found the evaluation unconvincing. Reject.",
    }
    report, per_paper = evaluate_collection(generated, references)
    assert set(per_paper) == {"p1", "p2"}
    assert report.overall == pytest.approx(
        sum(report.components().values()) / 7, abs=1e-9
    )
    for value in report.as_dict().values():
        assert 0.0 <= value <= 100.0


def test_metric_config_validation():
    with pytest.raises(ValueError):
        MetricConfig(ngram_order=0)
