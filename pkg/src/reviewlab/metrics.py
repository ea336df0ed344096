"""Review-quality metrics: n-gram diversity, overlap, propositions, sentiment.

Seven component scores feed one composite report:

* ``distinct_n``         — 100 x unique n-grams / total n-grams
* ``inverse_self_bleu``  — 100 x (1 - self-BLEU), higher = more diverse
* ``rouge`` (1 and L)    — unigram / longest-common-subsequence F1
* ``spice_like``         — F1 over extracted proposition tuples
* ``sentiment_*``        — 100 x (1 - |polarity gap| / 2), from a model-backed
                           provider and from the built-in rule lexicon

All metrics are pure and deterministic; reported scores live in [0, 100],
internal BLEU/ROUGE values in [0, 1].  Degenerate inputs (texts shorter
than n tokens, empty proposition sets) score 0 and carry a flag rather
than being dropped.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Collection, Mapping, NamedTuple, Sequence

ROUGE_1 = "ROUGE-1"
ROUGE_L = "ROUGE-L"

SENTIMENT_LEXICON = "lexicon"
SENTIMENT_MODEL = "model"

# Rule-lexicon constants: negation multiplier, booster increments, and the
# normalization denominator s / sqrt(s^2 + alpha).
NEGATION_SCALAR = -0.74
BOOSTER_INCREMENT = 0.293
NORMALIZATION_ALPHA = 15.0
NEGATION_WINDOW = 3

NEGATORS = frozenset(
    {"not", "no", "never", "cannot", "without", "neither", "nor", "none", "hardly"}
)
BOOSTERS_INCR = frozenset(
    {"very", "extremely", "highly", "really", "particularly", "especially",
     "exceptionally", "remarkably", "truly", "incredibly"}
)
BOOSTERS_DECR = frozenset(
    {"somewhat", "slightly", "marginally", "fairly", "relatively", "moderately",
     "barely", "almost"}
)

DEFAULT_STOP_WORDS = frozenset(
    """a an the and or but if then else of to in on at by for with from as is are was
    were be been being am do does did done this that these those it its they them
    their there here he she his her we you your i me my our us not no so such than
    too very can will just into over under about between during after before up
    down out off again further once more most other some any each few own same s t
    don should now has have had having what which who whom while because until
    both all only nor also may might must shall would could""".split()
)

_TOKEN_RE = re.compile(r"[^\W_]+")
_SENTENCE_SPLIT_RE = re.compile(r"[.!?]+")


class TokenSequence(NamedTuple):
    """An ordered list of normalized tokens."""

    tokens: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.tokens)


class MetricValue(NamedTuple):
    """A reported score plus a flag marking degenerate inputs."""

    score: float
    degenerate: bool = False


@dataclass(frozen=True)
class MetricConfig:
    ngram_order: int = 4
    rouge_variants: frozenset[str] = frozenset({ROUGE_1, ROUGE_L})
    sentiment_provider: str = SENTIMENT_LEXICON
    bleu_smoothing_epsilon: float = 1e-9

    def __post_init__(self) -> None:
        if self.ngram_order < 1:
            raise ValueError("ngram_order must be >= 1")
        if self.bleu_smoothing_epsilon <= 0:
            raise ValueError("bleu_smoothing_epsilon must be positive")


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class SentimentPolarity:
    value: float
    provider: str


@dataclass(frozen=True)
class MetricReport:
    """The seven component scores plus their arithmetic-mean composite."""

    distinct4: float
    inverse_self_bleu4: float
    rouge1_f1: float
    rougeL_f1: float
    spice_like: float
    sentiment_model: float
    sentiment_lexicon: float
    overall: float

    COMPONENT_FIELDS = (
        "distinct4", "inverse_self_bleu4", "rouge1_f1", "rougeL_f1",
        "spice_like", "sentiment_model", "sentiment_lexicon",
    )

    def components(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in self.COMPONENT_FIELDS}

    def as_dict(self) -> dict[str, float]:
        out = self.components()
        out["overall"] = self.overall
        return out


def tokenize(text: str) -> TokenSequence:
    """Lowercase and split on maximal runs of non-alphanumeric characters."""
    return TokenSequence(tokens=tuple(_TOKEN_RE.findall(text.lower())))


def ngrams(tokens: Sequence[str], n: int) -> list[tuple[str, ...]]:
    """All contiguous n-grams of ``tokens`` in order (empty if too short)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return [tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]


def distinct_n(text: TokenSequence, n: int) -> MetricValue:
    """Proportion of unique n-grams, scaled to [0, 100].

    Texts shorter than n tokens have no n-grams; they score 0 and are
    flagged degenerate.
    """
    grams = ngrams(text.tokens, n)
    if not grams:
        return MetricValue(0.0, degenerate=True)
    return MetricValue(100.0 * len(set(grams)) / len(grams))


def _closest_reference_length(ref_lengths: Sequence[int], hyp_length: int) -> int:
    # Ties on closeness go to the shorter reference.
    return min(ref_lengths, key=lambda r: (abs(r - hyp_length), r))


def bleu(
    hypothesis: TokenSequence,
    references: Sequence[TokenSequence],
    n: int,
    epsilon: float = 1e-9,
) -> float:
    """BLEU-n with clipped counts, an epsilon precision floor, and brevity
    penalty min(1, exp(1 - r/c)).

    Modified k-gram precision for k = 1..n clips each hypothesis k-gram
    count at the maximum count over the references.  Precisions of zero
    (including k-grams that do not exist because the hypothesis is shorter
    than k) are floored at ``epsilon``.  ``r`` is the reference length
    closest to the hypothesis length ``c``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not references:
        raise ValueError("at least one reference is required")
    if len(hypothesis) == 0:
        return 0.0

    log_precision_sum = 0.0
    for k in range(1, n + 1):
        hyp_counts = Counter(ngrams(hypothesis.tokens, k))
        total = sum(hyp_counts.values())
        if total == 0:
            log_precision_sum += math.log(epsilon)
            continue
        max_ref_counts: Counter = Counter()
        for ref in references:
            for gram, count in Counter(ngrams(ref.tokens, k)).items():
                if count > max_ref_counts[gram]:
                    max_ref_counts[gram] = count
        clipped = sum(min(count, max_ref_counts[gram]) for gram, count in hyp_counts.items())
        precision = max(clipped / total, epsilon)
        log_precision_sum += math.log(precision)
    geometric_mean = math.exp(log_precision_sum / n)

    c = len(hypothesis)
    r = _closest_reference_length([len(ref) for ref in references], c)
    brevity_penalty = min(1.0, math.exp(1.0 - r / c))
    return geometric_mean * brevity_penalty


def self_bleu(texts: Sequence[TokenSequence], n: int, epsilon: float = 1e-9) -> float:
    """Mean BLEU of each text against all the others as references."""
    if len(texts) < 2:
        raise ValueError("self-BLEU requires at least 2 texts")
    scores = []
    for i, hyp in enumerate(texts):
        references = [t for j, t in enumerate(texts) if j != i]
        scores.append(bleu(hyp, references, n, epsilon))
    return sum(scores) / len(scores)


def inverse_self_bleu_display(self_bleu_value: float) -> float:
    """Map a self-BLEU value onto the reported [0, 100] diversity scale."""
    return min(100.0, max(0.0, 100.0 * (1.0 - self_bleu_value)))


def inverse_self_bleu(texts: Sequence[TokenSequence], n: int, epsilon: float = 1e-9) -> float:
    """Diversity score: 100 x (1 - self_bleu), clipped to [0, 100]."""
    return inverse_self_bleu_display(self_bleu(texts, n, epsilon))


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    # Single-row dynamic program; O(len(a) * len(b)) time, O(len(b)) space.
    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for token in a:
        current = [0]
        for j, other in enumerate(b, start=1):
            if token == other:
                current.append(previous[j - 1] + 1)
            else:
                current.append(max(previous[j], current[j - 1]))
        previous = current
    return previous[-1]


def rouge(generated: TokenSequence, reference: TokenSequence, variant: str) -> RougeScore:
    """ROUGE-1 (clipped unigram overlap) or ROUGE-L (LCS) as P/R/F1.

    Either side empty yields all zeros.
    """
    if variant not in (ROUGE_1, ROUGE_L):
        raise ValueError(f"unknown ROUGE variant {variant!r}")
    if len(generated) == 0 or len(reference) == 0:
        return RougeScore(0.0, 0.0, 0.0)
    if variant == ROUGE_1:
        gen_counts = Counter(generated.tokens)
        ref_counts = Counter(reference.tokens)
        matches = sum(min(count, ref_counts[tok]) for tok, count in gen_counts.items())
        precision = matches / len(generated)
        recall = matches / len(reference)
    else:
        lcs = _lcs_length(generated.tokens, reference.tokens)
        precision = lcs / len(generated)
        recall = lcs / len(reference)
    return RougeScore(precision, recall, _f1(precision, recall))


def extract_propositions(
    text: str, stop_words: Collection[str] = DEFAULT_STOP_WORDS
) -> set[tuple[str, ...]]:
    """Extract the proposition-tuple set used by the SPICE-style score.

    Sentences split on terminal punctuation.  Within each sentence the
    content words (tokens not in ``stop_words``) contribute a unary tuple
    each, and every pair of consecutive content words contributes a binary
    tuple.  Tuples are lowercase-normalized; the result is a set.
    """
    propositions: set[tuple[str, ...]] = set()
    for sentence in _SENTENCE_SPLIT_RE.split(text):
        content = [tok for tok in tokenize(sentence).tokens if tok not in stop_words]
        propositions.update((word,) for word in content)
        propositions.update(zip(content, content[1:]))
    return propositions


def spice_like(
    generated: str, reference: str, stop_words: Collection[str] = DEFAULT_STOP_WORDS
) -> MetricValue:
    """F1 over the two proposition sets, scaled to [0, 100]."""
    gen_props = extract_propositions(generated, stop_words)
    ref_props = extract_propositions(reference, stop_words)
    if not gen_props and not ref_props:
        return MetricValue(0.0, degenerate=True)
    if not gen_props or not ref_props:
        return MetricValue(0.0)
    overlap = len(gen_props & ref_props)
    precision = overlap / len(gen_props)
    recall = overlap / len(ref_props)
    return MetricValue(100.0 * _f1(precision, recall))


def _load_default_lexicon() -> dict[str, float]:
    text = resources.files(__package__).joinpath("data/sentiment_lexicon.txt").read_text(
        encoding="utf-8"
    )
    lexicon: dict[str, float] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        token, valence = line.split("\t")
        lexicon[token] = float(valence)
    return lexicon


def load_lexicon(path: str | None = None) -> dict[str, float]:
    """Load a ``token<TAB>valence`` lexicon; the bundled one by default."""
    if path is None:
        return _load_default_lexicon()
    lexicon: dict[str, float] = {}
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            token, valence = line.split("\t")
            lexicon[token] = float(valence)
    return lexicon


@dataclass(frozen=True)
class LexiconSentimentProvider:
    """Rule-based polarity: lexicon valences with negation and boosters.

    For each token with a lexicon valence: an intensifier (dampener) in
    the immediately preceding position moves the valence 0.293 away from
    (toward) zero, then a negator within the 3 preceding tokens multiplies
    it by -0.74.  The valence sum s is normalized to [-1, 1] via
    s / sqrt(s^2 + 15).
    """

    lexicon: Mapping[str, float] = field(default_factory=_load_default_lexicon)
    name: str = SENTIMENT_LEXICON

    def polarity(self, text: str) -> SentimentPolarity:
        tokens = tokenize(text).tokens
        total = 0.0
        for i, token in enumerate(tokens):
            valence = self.lexicon.get(token)
            if valence is None:
                continue
            if i > 0:
                preceding = tokens[i - 1]
                if preceding in BOOSTERS_INCR:
                    valence += BOOSTER_INCREMENT if valence > 0 else -BOOSTER_INCREMENT
                elif preceding in BOOSTERS_DECR:
                    valence += -BOOSTER_INCREMENT if valence > 0 else BOOSTER_INCREMENT
            window = tokens[max(0, i - NEGATION_WINDOW):i]
            if any(w in NEGATORS for w in window):
                valence *= NEGATION_SCALAR
            total += valence
        if total == 0.0:
            return SentimentPolarity(0.0, self.name)
        normalized = total / math.sqrt(total * total + NORMALIZATION_ALPHA)
        return SentimentPolarity(max(-1.0, min(1.0, normalized)), self.name)


@dataclass(frozen=True)
class ModelSentimentProvider:
    """Polarity from an external classifier returning values in [-1, 1].

    The classifier callable owns transport; its errors propagate.
    """

    classify: Callable[[str], float]
    name: str = SENTIMENT_MODEL

    def polarity(self, text: str) -> SentimentPolarity:
        value = float(self.classify(text))
        return SentimentPolarity(max(-1.0, min(1.0, value)), self.name)


def sentiment_polarity(text: str, provider) -> SentimentPolarity:
    """Polarity of ``text`` in [-1, 1] under the given provider."""
    return provider.polarity(text)


def sentiment_consistency(generated: str, reference: str, provider) -> float:
    """100 x (1 - |p_gen - p_ref| / 2) over provider polarities."""
    p_gen = provider.polarity(generated).value
    p_ref = provider.polarity(reference).value
    return 100.0 * (1.0 - abs(p_gen - p_ref) / 2.0)


def build_report(
    per_metric_scores: Mapping[str, Sequence[float]],
    config: MetricConfig = MetricConfig(),
) -> MetricReport:
    """Aggregate per-metric score lists into a MetricReport.

    Each component becomes the arithmetic mean of its list; the overall
    score is the mean of the seven components.  Diversity metrics arrive
    as collection-level values (usually length-1 lists); the five
    per-paper consistency metrics must be aligned to the same length.
    """
    missing = [name for name in MetricReport.COMPONENT_FIELDS if name not in per_metric_scores]
    if missing:
        raise ValueError(f"missing metric lists: {', '.join(missing)}")
    for name in MetricReport.COMPONENT_FIELDS:
        if len(per_metric_scores[name]) == 0:
            raise ValueError(f"metric list {name!r} is empty")
    per_paper = ("rouge1_f1", "rougeL_f1", "spice_like", "sentiment_model", "sentiment_lexicon")
    lengths = {name: len(per_metric_scores[name]) for name in per_paper}
    if len(set(lengths.values())) > 1:
        raise ValueError(f"per-paper metric lists are misaligned: {lengths}")

    components = {
        name: sum(per_metric_scores[name]) / len(per_metric_scores[name])
        for name in MetricReport.COMPONENT_FIELDS
    }
    overall = sum(components.values()) / len(components)
    return MetricReport(overall=overall, **components)


def evaluate_collection(
    generated: Mapping[str, str],
    references: Mapping[str, str],
    config: MetricConfig = MetricConfig(),
    sentiment_model_provider=None,
) -> tuple[MetricReport, dict[str, dict[str, float]]]:
    """Score one model's generated reviews against human references.

    Diversity (distinct and inverse self-BLEU) is computed over the whole
    generated collection; the consistency metrics are computed per paper
    and mean-aggregated by build_report.  Returns the report plus
    per-paper component detail keyed by paper id.
    """
    if not generated:
        raise ValueError("no generated reviews to evaluate")
    missing = sorted(set(generated) - set(references))
    if missing:
        raise ValueError(f"no reference for paper(s): {', '.join(missing)}")

    lexicon_provider = LexiconSentimentProvider()
    if sentiment_model_provider is None:
        # Offline default: the model column falls back to the rule lexicon.
        sentiment_model_provider = lexicon_provider

    paper_ids = list(generated)
    token_seqs = [tokenize(generated[pid]) for pid in paper_ids]

    all_grams: list[tuple[str, ...]] = []
    for seq in token_seqs:
        all_grams.extend(ngrams(seq.tokens, config.ngram_order))
    distinct_score = 100.0 * len(set(all_grams)) / len(all_grams) if all_grams else 0.0

    if len(token_seqs) >= 2:
        diversity_inverse = inverse_self_bleu(
            token_seqs, config.ngram_order, config.bleu_smoothing_epsilon
        )
    else:
        # A single text has no variants to compare; treat as fully diverse.
        diversity_inverse = 100.0

    per_paper: dict[str, dict[str, float]] = {}
    lists: dict[str, list[float]] = {name: [] for name in MetricReport.COMPONENT_FIELDS}
    lists["distinct4"].append(distinct_score)
    lists["inverse_self_bleu4"].append(diversity_inverse)
    for pid in paper_ids:
        gen_text, ref_text = generated[pid], references[pid]
        gen_tokens, ref_tokens = tokenize(gen_text), tokenize(ref_text)
        detail = {
            "rouge1_f1": 100.0 * rouge(gen_tokens, ref_tokens, ROUGE_1).f1,
            "rougeL_f1": 100.0 * rouge(gen_tokens, ref_tokens, ROUGE_L).f1,
            "spice_like": spice_like(gen_text, ref_text).score,
            "sentiment_model": sentiment_consistency(
                gen_text, ref_text, sentiment_model_provider
            ),
            "sentiment_lexicon": sentiment_consistency(gen_text, ref_text, lexicon_provider),
        }
        per_paper[pid] = detail
        for name, value in detail.items():
            lists[name].append(value)

    return build_report(lists, config), per_paper
