"""19-slot similarity features per (sentence, claim) pair and per-sentence pooling.

Canonical slot layout (frozen so trained models stay portable and ablations
stay addressable by slot range):

    0  bm25_statement      7  sbert_statement     13 simcse_statement
    1  bm25_title          8  sbert_title         14 simcse_title
    2  bm25_body           9-12 sbert_body top-4  15-18 simcse_body top-4
    3  nli_entail
    4  nli_neutral
    5  nli_contradict
    6  bertscore_f1

Per-sentence vectors come from three pooling strategies over the top-N
candidates retrieved by BM25 on the claim body: block concatenation (19*N),
elementwise max (19), and elementwise max after dropping half-true claims.
All functions here are pure over immutable inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .bm25 import Bm25Index, tokenize
from .corpus import ScoreTable, SentenceRec, VerifiedClaim
from .errors import ValidationError

N_SLOTS = 19

SLOT_NAMES = (
    "bm25_statement",
    "bm25_title",
    "bm25_body",
    "nli_entail",
    "nli_neutral",
    "nli_contradict",
    "bertscore_f1",
    "sbert_statement",
    "sbert_title",
    "sbert_body_1",
    "sbert_body_2",
    "sbert_body_3",
    "sbert_body_4",
    "simcse_statement",
    "simcse_title",
    "simcse_body_1",
    "simcse_body_2",
    "simcse_body_3",
    "simcse_body_4",
)

SLOT_INDEX = {name: i for i, name in enumerate(SLOT_NAMES)}

# Slot groups by score family and by claim field, for ablation masks.
FAMILY_SLOTS = {
    "bm25": (0, 1, 2),
    "nli": (3, 4, 5),
    "bertscore": (6,),
    "sbert": (7, 8, 9, 10, 11, 12),
    "simcse": (13, 14, 15, 16, 17, 18),
}

FIELD_SLOTS = {
    # NLI and BERTScore are computed against the claim statement.
    "statement": (0, 3, 4, 5, 6, 7, 13),
    "title": (1, 8, 14),
    "body": (2, 9, 10, 11, 12, 15, 16, 17, 18),
}

STRATEGIES = ("concat", "max", "max-skip")

# Single-score baselines: ranking slot per baseline name. "On body" baselines
# use the top body slot, which dominates its block within every pair.
BASELINE_SLOTS = {
    "bm25_statement": 0,
    "bm25_title": 1,
    "bm25_body": 2,
    "nli_entail": 3,
    "nli_neutral": 4,
    "nli_contradict": 5,
    "bertscore_f1": 6,
    "sbert_statement": 7,
    "sbert_title": 8,
    "sbert_body": 9,
    "simcse_statement": 13,
    "simcse_title": 14,
    "simcse_body": 15,
}

# Derived baseline: entailment + contradiction posterior mass (either one
# signals a determinable verdict).
NLI_ENTAIL_CONTRADICT = "nli_entail_contradict"

BASELINE_NAMES = (
    "bertscore_f1",
    "nli_entail",
    "nli_neutral",
    "nli_contradict",
    NLI_ENTAIL_CONTRADICT,
    "simcse_title",
    "simcse_statement",
    "simcse_body",
    "sbert_title",
    "sbert_statement",
    "sbert_body",
    "bm25_statement",
    "bm25_body",
    "bm25_title",
)


@dataclass(frozen=True)
class PairFeatures:
    """The 19 similarity scores of one (sentence, claim) pair, canonical layout."""

    sentence_id: str
    claim_id: str
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (N_SLOTS,):
            raise ValidationError(
                f"pair ({self.sentence_id}, {self.claim_id}): expected {N_SLOTS} "
                f"slots, got {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValidationError(
                f"pair ({self.sentence_id}, {self.claim_id}): non-finite feature value"
            )


@dataclass(frozen=True)
class SentenceVector:
    """Pooled per-sentence vector plus the evidence candidate list kept for evaluation.

    ``values`` is 19*N-dimensional for concat and 19-dimensional for max /
    max-skip; ``evidence`` preserves the BM25-on-body candidate order;
    ``n_pooled`` counts the candidates actually pooled (0 marks the all-zero
    vector of an empty candidate set, which stays rankable).
    """

    sentence_id: str
    strategy: str
    n_candidates: int
    values: np.ndarray
    evidence: tuple[str, ...]
    n_pooled: int

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValidationError(f"unknown strategy: {self.strategy!r}")
        expected = N_SLOTS * self.n_candidates if self.strategy == "concat" else N_SLOTS
        if self.values.shape != (expected,):
            raise ValidationError(
                f"sentence {self.sentence_id}: {self.strategy} vector must have "
                f"{expected} dims, got {self.values.shape}"
            )


def _body_top4(values: tuple[float, ...]) -> list[float]:
    # Pad by repeating the last available value; an absent/empty body pads 0.0.
    vals = list(values) if values else [0.0]
    while len(vals) < 4:
        vals.append(vals[-1])
    return vals[:4]


def assemble_pair(
    sentence: SentenceRec,
    claim: VerifiedClaim,
    index: Bm25Index,
    scores: ScoreTable,
    lenient: bool = False,
) -> PairFeatures:
    """Fill the 19 slots: BM25 computed live from the index, dense slots copied
    from the score table (strict mode raises on any missing metric)."""
    query = tokenize(sentence.text)
    vals = np.zeros(N_SLOTS)
    vals[0] = index.score(query, "statement", claim.claim_id)
    vals[1] = index.score(query, "title", claim.claim_id)
    vals[2] = index.score(query, "body", claim.claim_id)

    sid, cid = sentence.sentence_id, claim.claim_id
    vals[3] = scores.lookup(sid, cid, "nli_entail", lenient)[0]
    vals[4] = scores.lookup(sid, cid, "nli_neutral", lenient)[0]
    vals[5] = scores.lookup(sid, cid, "nli_contradict", lenient)[0]
    vals[6] = scores.lookup(sid, cid, "bertscore_f1", lenient)[0]
    vals[7] = scores.lookup(sid, cid, "sbert_statement", lenient)[0]
    vals[8] = scores.lookup(sid, cid, "sbert_title", lenient)[0]
    vals[9:13] = _body_top4(scores.lookup(sid, cid, "sbert_body_top", lenient))
    vals[13] = scores.lookup(sid, cid, "simcse_statement", lenient)[0]
    vals[14] = scores.lookup(sid, cid, "simcse_title", lenient)[0]
    vals[15:19] = _body_top4(scores.lookup(sid, cid, "simcse_body_top", lenient))
    return PairFeatures(sid, cid, vals)


def candidates(sentence: SentenceRec, index: Bm25Index, n: int, field: str = "body") -> list[str]:
    """Top-n candidate claim ids for a sentence (BM25 on body by default)."""
    return [cid for cid, _score in index.retrieve(tokenize(sentence.text), field, n)]


def pool_concat(
    sentence_id: str,
    pairs: Sequence[PairFeatures],
    n: int,
    evidence: Sequence[str] = (),
) -> SentenceVector:
    """Concatenate candidate blocks in rank order, zero-padding to 19*n dims."""
    if len(pairs) > n:
        raise ValidationError(
            f"sentence {sentence_id}: {len(pairs)} candidate blocks exceed n={n}"
        )
    values = np.zeros(N_SLOTS * n)
    for i, pair in enumerate(pairs):
        values[i * N_SLOTS : (i + 1) * N_SLOTS] = pair.values
    return SentenceVector(
        sentence_id=sentence_id,
        strategy="concat",
        n_candidates=n,
        values=values,
        evidence=tuple(evidence),
        n_pooled=len(pairs),
    )


def pool_max(
    sentence_id: str,
    pairs: Sequence[PairFeatures],
    n: int,
    evidence: Sequence[str] = (),
    strategy: str = "max",
) -> SentenceVector:
    """Elementwise maximum over the first min(len, n) candidates.

    An empty candidate set yields the all-zeros vector with n_pooled=0, so
    every sentence stays rankable.
    """
    pooled = pairs[:n]
    if pooled:
        values = np.max(np.stack([p.values for p in pooled]), axis=0)
    else:
        values = np.zeros(N_SLOTS)
    return SentenceVector(
        sentence_id=sentence_id,
        strategy=strategy,
        n_candidates=n,
        values=values,
        evidence=tuple(evidence),
        n_pooled=len(pooled),
    )


def filter_half_true(
    pairs: Sequence[PairFeatures], claims_by_id: Mapping[str, VerifiedClaim]
) -> list[PairFeatures]:
    """Drop pairs whose claim carries a half-true label; order preserved."""
    out = []
    for pair in pairs:
        claim = claims_by_id.get(pair.claim_id)
        if claim is None:
            raise ValidationError(f"cannot resolve truth value of claim {pair.claim_id!r}")
        if claim.truth_value != "half-true":
            out.append(pair)
    return out


def baseline_pair_score(pair_values: np.ndarray, baseline: str) -> float:
    """The per-pair score a single-score baseline ranks by."""
    if baseline == NLI_ENTAIL_CONTRADICT:
        return float(pair_values[3] + pair_values[5])
    try:
        return float(pair_values[BASELINE_SLOTS[baseline]])
    except KeyError:
        raise ValidationError(f"unknown baseline: {baseline!r}") from None


def baseline_score(pair_values_iter: Iterable[np.ndarray], baseline: str) -> float:
    """Sentence-level baseline score: max of the slot over every scored claim.

    An empty iterable (no scored pairs at all) scores 0.0, leaving the
    sentence in document order.
    """
    best = 0.0
    seen = False
    for values in pair_values_iter:
        s = baseline_pair_score(values, baseline)
        if not seen or s > best:
            best, seen = s, True
    return best if seen else 0.0


ABLATIONS = (
    "bertscore",
    "nli",
    "simcse",
    "sbert",
    "bm25",
    "title",
    "statement",
    "body",
)


def ablation_mask(name: str | None) -> np.ndarray:
    """Boolean keep-mask over the 19 slots for a family or field ablation.

    Masked slots are zeroed before pooling; with z-scoring downstream a
    constant-zero dimension contributes nothing to training or scoring, so
    zeroing doubles as dropping.
    """
    keep = np.ones(N_SLOTS, dtype=bool)
    if name is None:
        return keep
    if name in FAMILY_SLOTS:
        drop = FAMILY_SLOTS[name]
    elif name in FIELD_SLOTS:
        drop = FIELD_SLOTS[name]
    else:
        raise ValidationError(f"unknown ablation: {name!r} (one of {ABLATIONS})")
    keep[list(drop)] = False
    return keep


def apply_mask(pair: PairFeatures, keep: np.ndarray) -> PairFeatures:
    if keep.all():
        return pair
    return PairFeatures(pair.sentence_id, pair.claim_id, np.where(keep, pair.values, 0.0))
