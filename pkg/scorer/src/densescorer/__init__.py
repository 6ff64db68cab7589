"""Compute dense similarity scores for a checkrank pair manifest.

The scorer is a sidecar: it reads the claims file, the transcript file,
and the pair manifest emitted by `checkrank candidates`, and writes the
scores.jsonl the main pipeline consumes. Model backends are selected by
identifier strings in a config file, so checkpoints can change without
touching the score-file contract.
"""

from .backends import ModelBank, bertscore_f1, cosine, embed, nli_posteriors
from .coverage import CoverageReport, validate_coverage
from .errors import ScorerError
from .score import METRICS, ScoreJob, score_pairs
from .textio import read_claims, read_manifest, read_sentences, split_sentences

__version__ = "0.1.0"

__all__ = [
    "CoverageReport",
    "METRICS",
    "ModelBank",
    "ScoreJob",
    "ScorerError",
    "bertscore_f1",
    "cosine",
    "embed",
    "nli_posteriors",
    "read_claims",
    "read_manifest",
    "read_sentences",
    "score_pairs",
    "split_sentences",
    "validate_coverage",
    "__version__",
]
