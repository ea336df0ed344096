"""reviewlab: multi-agent paper-review generation and benchmarking.

The package splits into a data layer (corpus, structured), generation
(gateway, agents, retrieval, dataset), and evaluation (metrics, arena,
reporting), glued together by a CLI.  Everything runs offline against
deterministic providers, which is how the tests and demos exercise it.
"""

from .corpus import (
    BenchmarkSet,
    PaperRecord,
    RawReview,
    RelevantPaperRef,
    Section,
    load_corpus,
    save_corpus,
    split_benchmark,
    validate_record,
)
from .structured import (
    DEFAULT_GRAMMAR,
    StructuredReview,
    TagGrammar,
    extract_verdict,
    parse_structured,
    render_structured,
    validate_review,
)
from .gateway import (
    AuditLog,
    ChatRequest,
    ChatResponse,
    OpenAIChatProvider,
    RetryPolicy,
    ScriptedProvider,
    complete,
    complete_parsed,
)
from .offline import OfflineProvider
from .retrieval import (
    CandidatePaper,
    EmbeddingVector,
    HashEmbedder,
    RelevantPaperFinder,
    RetrievalConfig,
    SearchClient,
    cosine_similarity,
    select_relevant,
)
from .agents import (
    MetaReview,
    PipelineConfig,
    PipelineOutput,
    PromptBundle,
    assemble_reviewer_prompt,
    generate_meta_review,
    generate_review,
    run_pipeline,
)
from .metrics import (
    MetricConfig,
    MetricReport,
    RougeScore,
    SentimentPolarity,
    LexiconSentimentProvider,
    ModelSentimentProvider,
    bleu,
    build_report,
    distinct_n,
    evaluate_collection,
    extract_propositions,
    inverse_self_bleu,
    rouge,
    self_bleu,
    sentiment_consistency,
    sentiment_polarity,
    spice_like,
    tokenize,
)
from .arena import (
    ArenaOutcome,
    ArenaPair,
    JudgeVerdict,
    WinRateTable,
    evaluate_pair,
    judge_pair,
    tournament,
)
from .dataset import (
    EmissionResult,
    TrainRecord,
    TranscriptionCheck,
    annotate_relevant,
    emit_records,
    transcribe_corpus,
    transcribe_review,
    verify_transcription,
)
from .reporting import ComparisonTable, render_table, render_win_rates

__version__ = "0.1.0"
