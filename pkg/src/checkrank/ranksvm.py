"""Linear pairwise learning-to-rank with hinge loss.

Labeled sentences become (relevant, non-relevant) difference pairs within
each transcript; a linear model w minimizes

    0.5 * ||w||^2 + C * sum_i max(0, 1 - w . (z(x+_i) - z(x-_i)))

by deterministic full-batch subgradient descent over z-scored features.
Each epoch starts from the 1/(C*t) step and halves it until the objective
does not increase, so the recorded loss is non-increasing; a step that
cannot help is skipped. No randomness is consumed: the seed is provenance,
stored so experiment records stay self-describing.

No bias term: rankings are invariant under score translation, so a bias is
unidentifiable. Z-scoring statistics come from the training vectors only and
are stored in the model, making inference self-contained.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ValidationError
from .features import SentenceVector
from .metrics import RankedSentence, RankingRun

MODEL_VERSION = 1

MAX_BACKTRACKS = 60


@dataclass(frozen=True)
class TrainPair:
    """One (relevant, non-relevant) sentence pair from a single transcript."""

    positive: SentenceVector
    negative: SentenceVector
    group: str

    def __post_init__(self):
        if self.positive.values.shape != self.negative.values.shape:
            raise ValidationError(
                f"pair in {self.group}: dimension mismatch "
                f"{self.positive.values.shape} vs {self.negative.values.shape}"
            )


@dataclass
class RankModel:
    """Trained weights plus the z-scoring statistics they expect."""

    weights: np.ndarray
    means: np.ndarray
    stds: np.ndarray
    strategy: str
    n_candidates: int
    C: float
    seed: int
    loss_history: list[float] = field(default_factory=list, repr=False, compare=False)

    @property
    def dims(self) -> int:
        return int(self.weights.shape[0])

    def __post_init__(self):
        if not np.all(np.isfinite(self.weights)):
            raise ValidationError("model weights must be finite")
        if np.any(self.stds <= 0):
            raise ValidationError("normalization stds must be positive")


def make_pairs(
    vectors_by_transcript: Mapping[str, Sequence[SentenceVector]],
    relevance: Mapping[str, bool],
) -> list[TrainPair]:
    """All (relevant, non-relevant) combinations within each transcript.

    Transcripts are visited in sorted id order, sentences in list (document)
    order, so the pair list is deterministic. A transcript with no relevant
    sentence simply contributes nothing.
    """
    pairs: list[TrainPair] = []
    for tid in sorted(vectors_by_transcript):
        vectors = vectors_by_transcript[tid]
        positives = [v for v in vectors if relevance.get(v.sentence_id, False)]
        negatives = [v for v in vectors if not relevance.get(v.sentence_id, False)]
        for pos in positives:
            for neg in negatives:
                pairs.append(TrainPair(pos, neg, tid))
    return pairs


def _training_matrix(pairs: Sequence[TrainPair]) -> tuple[np.ndarray, list[SentenceVector]]:
    """Stack the unique sentence vectors behind the pairs (first-appearance order)."""
    unique: dict[str, SentenceVector] = {}
    for p in pairs:
        for v in (p.positive, p.negative):
            unique.setdefault(v.sentence_id, v)
    vectors = list(unique.values())
    return np.stack([v.values for v in vectors]), vectors


def normalization_stats(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-dimension mean and population std; zero-variance dims get std 1."""
    means = values.mean(axis=0)
    stds = values.std(axis=0)
    stds = np.where(stds > 0.0, stds, 1.0)
    return means, stds


def hinge_objective(w: np.ndarray, diffs: np.ndarray, C: float) -> float:
    margins = diffs @ w
    return 0.5 * float(w @ w) + C * float(np.maximum(0.0, 1.0 - margins).sum())


def fit(
    pairs: Sequence[TrainPair],
    C: float = 1.0,
    seed: int = 0,
    epochs: int = 200,
    strategy: str = "max",
    n_candidates: int = 1,
) -> RankModel:
    """Train on difference vectors of z-scored features; fully deterministic."""
    if not pairs:
        raise ValidationError("cannot train on an empty pair list")
    dims = pairs[0].positive.values.shape[0]
    for p in pairs:
        if p.positive.values.shape[0] != dims:
            raise ValidationError("training pairs disagree on feature dimension")

    train_values, _vectors = _training_matrix(pairs)
    if not np.all(np.isfinite(train_values)):
        raise ValidationError("non-finite feature value in training data")
    means, stds = normalization_stats(train_values)

    diffs = np.stack(
        [(p.positive.values - means) / stds - (p.negative.values - means) / stds for p in pairs]
    )

    w = np.zeros(dims)
    loss = hinge_objective(w, diffs, C)
    history = [loss]
    for t in range(1, epochs + 1):
        margins = diffs @ w
        active = margins < 1.0
        grad = w - C * diffs[active].sum(axis=0)
        step = 1.0 / (C * t)
        for _ in range(MAX_BACKTRACKS + 1):
            candidate = w - step * grad
            candidate_loss = hinge_objective(candidate, diffs, C)
            if candidate_loss <= loss:
                w, loss = candidate, candidate_loss
                break
            step *= 0.5
        history.append(loss)

    return RankModel(
        weights=w,
        means=means,
        stds=stds,
        strategy=strategy,
        n_candidates=n_candidates,
        C=float(C),
        seed=int(seed),
        loss_history=history,
    )


def score(model: RankModel, values: np.ndarray) -> float:
    """w . z-scored(values); any vector of the right dimension is scorable."""
    if values.shape != model.weights.shape:
        raise ValidationError(
            f"vector has {values.shape[0]} dims, model expects {model.dims}"
        )
    return float(model.weights @ ((values - model.means) / model.stds))


def rank(
    model: RankModel, transcript_id: str, vectors: Sequence[SentenceVector]
) -> RankingRun:
    """Sort one transcript's sentences by descending score.

    Ties keep document order (the input order), favoring earlier mentions.
    Evidence lists pass through from feature assembly unchanged.
    """
    scored = [(score(model, v.values), i, v) for i, v in enumerate(vectors)]
    scored.sort(key=lambda t: (-t[0], t[1]))
    return RankingRun(
        transcript_id=transcript_id,
        sentences=tuple(
            RankedSentence(v.sentence_id, s, v.evidence) for s, _i, v in scored
        ),
    )


def save_model(model: RankModel, path: str) -> None:
    payload = {
        "version": MODEL_VERSION,
        "strategy": model.strategy,
        "n": model.n_candidates,
        "dims": model.dims,
        "weights": model.weights.tolist(),
        "means": model.means.tolist(),
        "stds": model.stds.tolist(),
        "C": model.C,
        "seed": model.seed,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True)


def load_model(path: str) -> RankModel:
    """Round-trip exact: JSON float repr preserves every bit of the weights."""
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: truncated or malformed model file") from exc
    if payload.get("version") != MODEL_VERSION:
        raise ValidationError(
            f"{path}: model version {payload.get('version')!r} unsupported "
            f"(expected {MODEL_VERSION})"
        )
    required = ("strategy", "n", "dims", "weights", "means", "stds", "C", "seed")
    missing = [k for k in required if k not in payload]
    if missing:
        raise ValidationError(f"{path}: model file missing fields {missing}")
    weights = np.array(payload["weights"], dtype=float)
    if weights.shape != (int(payload["dims"]),):
        raise ValidationError(f"{path}: weight count disagrees with dims")
    return RankModel(
        weights=weights,
        means=np.array(payload["means"], dtype=float),
        stds=np.array(payload["stds"], dtype=float),
        strategy=str(payload["strategy"]),
        n_candidates=int(payload["n"]),
        C=float(payload["C"]),
        seed=int(payload["seed"]),
    )
