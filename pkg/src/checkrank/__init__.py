"""Rank document sentences by whether a previously fact-checked claim verifies them.

Given a document and a database of verified claims, the package retrieves
candidate claims per sentence (BM25 over claim fields), pools per-pair
similarity features into sentence vectors, trains a pairwise linear ranker,
and evaluates rankings with evidence-aware MAP variants.
"""

from .bm25 import Bm25Index, build_index, idf, tokenize
from .corpus import (
    Corpus,
    DenseScoreRecord,
    GoldPair,
    ScoreTable,
    SentenceRec,
    TranscriptDoc,
    VerifiedClaim,
    load_claims,
    load_gold,
    load_scores,
    load_transcripts,
    normalize_truth_value,
    sentence_relevance,
)
from .errors import (
    CheckrankError,
    CoverageError,
    MissingScoreError,
    ParseError,
    UndefinedMetricError,
    ValidationError,
)
from .features import (
    ABLATIONS,
    BASELINE_NAMES,
    N_SLOTS,
    SLOT_NAMES,
    STRATEGIES,
    PairFeatures,
    SentenceVector,
    assemble_pair,
    candidates,
    pool_concat,
    pool_max,
)
from .metrics import (
    RankedSentence,
    RankingRun,
    aggregate_metrics,
    ap_graded,
    ap_hit_only,
    ap_inner,
    average_precision,
    evidence_hit,
    load_runs,
    map_inner,
    metric_columns,
    run_credits,
    save_runs,
    transcript_metrics,
    verdict_claims,
)
from .pipeline import (
    CvResult,
    ExperimentConfig,
    FoldReport,
    Workspace,
    build_vectors,
    check_coverage,
    emit_report,
    generate_candidates,
    load_workspace,
    run_ablations,
    run_baselines,
    run_cv,
    run_table_grid,
    train_full,
)
from .ranksvm import RankModel, TrainPair, fit, load_model, make_pairs, rank, save_model

__version__ = "0.1.0"

__all__ = [
    "ABLATIONS",
    "BASELINE_NAMES",
    "Bm25Index",
    "CheckrankError",
    "Corpus",
    "CoverageError",
    "CvResult",
    "DenseScoreRecord",
    "ExperimentConfig",
    "FoldReport",
    "GoldPair",
    "MissingScoreError",
    "N_SLOTS",
    "PairFeatures",
    "ParseError",
    "RankModel",
    "RankedSentence",
    "RankingRun",
    "SLOT_NAMES",
    "STRATEGIES",
    "ScoreTable",
    "SentenceRec",
    "SentenceVector",
    "TrainPair",
    "TranscriptDoc",
    "UndefinedMetricError",
    "ValidationError",
    "VerifiedClaim",
    "Workspace",
    "aggregate_metrics",
    "ap_graded",
    "ap_hit_only",
    "ap_inner",
    "assemble_pair",
    "average_precision",
    "build_index",
    "build_vectors",
    "candidates",
    "check_coverage",
    "emit_report",
    "evidence_hit",
    "fit",
    "generate_candidates",
    "idf",
    "load_claims",
    "load_gold",
    "load_model",
    "load_runs",
    "load_scores",
    "load_transcripts",
    "load_workspace",
    "make_pairs",
    "map_inner",
    "metric_columns",
    "normalize_truth_value",
    "pool_concat",
    "pool_max",
    "rank",
    "run_ablations",
    "run_baselines",
    "run_credits",
    "run_cv",
    "run_table_grid",
    "save_model",
    "save_runs",
    "sentence_relevance",
    "tokenize",
    "train_full",
    "transcript_metrics",
    "verdict_claims",
    "__version__",
]
