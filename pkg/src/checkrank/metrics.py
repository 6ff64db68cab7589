"""Evidence-aware average-precision variants and their MAP aggregates.

A ranking run orders the sentences of one transcript and keeps each
sentence's ordered evidence claim list. A sentence is *relevant* when some
gold pair gives it a true/false verdict; it has an *evidence hit* at cutoff
r when one of its gold verdict claims appears in the top-r of its evidence
list. Four AP flavours are computed over a run:

* AP            -- classic average precision over relevance alone.
* AP_m^r        -- graded: a relevant sentence whose evidence missed the
                   top-r contributes m (0 or 0.5) instead of 1 to precision,
                   but its rank still triggers a precision sample. m=1
                   reproduces AP exactly.
* AP_H^r        -- hit-only: a relevant sentence without a top-r hit earns
                   nothing anywhere (neither precision credit nor a sample);
                   the denominator stays the total relevant count, making
                   this the strictest variant.
* AP_inner      -- AP over one sentence's evidence list, where a claim is
                   relevant iff it forms a true/false-verdict gold pair with
                   the sentence.

For every run and cutoff: AP_H^r <= AP_0^r <= AP_0.5^r <= AP.

MAP variants average over transcripts (AP_inner over sentences); units where
the metric is undefined (no relevant items) are excluded and counted, never
zero-scored.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from .corpus import GoldPair, RELEVANT_VERDICTS
from .errors import ParseError, UndefinedMetricError, ValidationError

logger = logging.getLogger(__name__)

R_VALUES_DEFAULT = (1, 3)

# Table column order for reports: classic MAP, then m in {0, 0.5} and the
# hit-only variant, each at every cutoff.
def metric_columns(r_values: Sequence[int] = R_VALUES_DEFAULT) -> list[str]:
    cols = ["MAP"]
    cols += [f"MAP_0^{r}" for r in r_values]
    cols += [f"MAP_0.5^{r}" for r in r_values]
    cols += [f"MAP_H^{r}" for r in r_values]
    return cols


@dataclass(frozen=True)
class RankedSentence:
    sentence_id: str
    score: float
    evidence: tuple[str, ...] = ()


@dataclass(frozen=True)
class RankingRun:
    """One transcript's ranked sentences (rank = list position + 1)."""

    transcript_id: str
    sentences: tuple[RankedSentence, ...]

    def __post_init__(self):
        seen = set()
        for s in self.sentences:
            if s.sentence_id in seen:
                raise ValidationError(
                    f"run {self.transcript_id}: sentence {s.sentence_id} ranked twice"
                )
            seen.add(s.sentence_id)


@dataclass(frozen=True)
class SentenceCredit:
    """Per-ranked-sentence evaluation flags; a hit implies relevance."""

    relevant: bool
    evidence_hit: bool

    def __post_init__(self):
        if self.evidence_hit and not self.relevant:
            raise ValidationError("evidence_hit requires a relevant sentence")


def verdict_claims(gold: Iterable[GoldPair]) -> dict[str, set[str]]:
    """sentence_id -> set of claims that give it a true/false verdict."""
    out: dict[str, set[str]] = {}
    for p in gold:
        if p.verdict in RELEVANT_VERDICTS:
            out.setdefault(p.sentence_id, set()).add(p.claim_id)
    return out


def evidence_hit(
    sentence_id: str,
    evidence: Sequence[str],
    gold_claims: Mapping[str, set[str]],
    r: int,
) -> bool:
    """True iff a gold verdict claim for this sentence sits in evidence[:r]."""
    if r < 1:
        raise ValidationError(f"evidence cutoff r must be >= 1, got {r}")
    relevant = gold_claims.get(sentence_id)
    if not relevant:
        return False
    return any(cid in relevant for cid in evidence[:r])


def run_credits(
    run: RankingRun, gold_claims: Mapping[str, set[str]], r: int
) -> list[SentenceCredit]:
    """Credits in rank order for one run at evidence cutoff r."""
    out = []
    for s in run.sentences:
        relevant = bool(gold_claims.get(s.sentence_id))
        hit = relevant and evidence_hit(s.sentence_id, s.evidence, gold_claims, r)
        out.append(SentenceCredit(relevant, hit))
    return out


def average_precision(credits: Sequence[SentenceCredit]) -> float:
    """Classic AP: mean of precision sampled at each relevant rank."""
    n_relevant = sum(c.relevant for c in credits)
    if n_relevant == 0:
        raise UndefinedMetricError("no relevant sentence in transcript")
    total = 0.0
    seen_relevant = 0
    for k, c in enumerate(credits, start=1):
        if c.relevant:
            seen_relevant += 1
            total += seen_relevant / k
    return total / n_relevant


def ap_graded(credits: Sequence[SentenceCredit], miss_credit: float) -> float:
    """Graded AP: precision numerators count 1 per hit, miss_credit per
    relevant miss, 0 per non-relevant; sampled at every relevant rank."""
    if not 0.0 <= miss_credit <= 1.0:
        raise ValidationError(f"miss credit must lie in [0, 1], got {miss_credit}")
    n_relevant = sum(c.relevant for c in credits)
    if n_relevant == 0:
        raise UndefinedMetricError("no relevant sentence in transcript")
    total = 0.0
    prefix = 0.0
    for k, c in enumerate(credits, start=1):
        if c.relevant:
            prefix += 1.0 if c.evidence_hit else miss_credit
            total += prefix / k
        # non-relevant sentences add nothing and trigger no sample
    return total / n_relevant


def ap_hit_only(credits: Sequence[SentenceCredit]) -> float:
    """Hit-only AP: a relevant sentence without an evidence hit earns nothing
    anywhere; the denominator remains the total relevant count."""
    n_relevant = sum(c.relevant for c in credits)
    if n_relevant == 0:
        raise UndefinedMetricError("no relevant sentence in transcript")
    total = 0.0
    hit_prefix = 0
    for k, c in enumerate(credits, start=1):
        if c.relevant and c.evidence_hit:
            hit_prefix += 1
            total += hit_prefix / k
    return total / n_relevant


def ap_inner(evidence: Sequence[str], relevant_claims: set[str]) -> float:
    """AP over one sentence's evidence ranking; relevant claims never
    retrieved contribute 0."""
    if not relevant_claims:
        raise UndefinedMetricError("sentence has no gold verdict claim")
    total = 0.0
    hits = 0
    for k, cid in enumerate(evidence, start=1):
        if cid in relevant_claims:
            hits += 1
            total += hits / k
    return total / len(relevant_claims)


def map_over(units: Iterable, metric: Callable[[object], float]) -> tuple[float, int]:
    """Unweighted mean of metric over units; returns (mean, excluded count).

    Units where the metric is undefined are excluded with a warning; zero
    evaluable units is an error.
    """
    values = []
    excluded = 0
    for unit in units:
        try:
            values.append(metric(unit))
        except UndefinedMetricError:
            excluded += 1
    if excluded:
        logger.warning("excluded %d unit(s) with undefined AP from the mean", excluded)
    if not values:
        raise UndefinedMetricError("no evaluable unit")
    return sum(values) / len(values), excluded


def transcript_metrics(
    run: RankingRun,
    gold_claims: Mapping[str, set[str]],
    r_values: Sequence[int] = R_VALUES_DEFAULT,
) -> dict[str, float]:
    """All metric columns for one run (per-transcript AP values).

    Raises UndefinedMetricError when the transcript has no relevant sentence.
    """
    credits_r = {r: run_credits(run, gold_claims, r) for r in r_values}
    any_credits = next(iter(credits_r.values()))
    out = {"MAP": average_precision(any_credits)}
    for r in r_values:
        out[f"MAP_0^{r}"] = ap_graded(credits_r[r], 0.0)
    for r in r_values:
        out[f"MAP_0.5^{r}"] = ap_graded(credits_r[r], 0.5)
    for r in r_values:
        out[f"MAP_H^{r}"] = ap_hit_only(credits_r[r])
    return out


def aggregate_metrics(
    runs: Sequence[RankingRun],
    gold_claims: Mapping[str, set[str]],
    r_values: Sequence[int] = R_VALUES_DEFAULT,
) -> tuple[dict[str, float], int]:
    """Mean of every metric column over the evaluable transcripts.

    Returns (column -> MAP value, number of excluded transcripts).
    """
    per_run = []
    excluded = 0
    for run in runs:
        try:
            per_run.append(transcript_metrics(run, gold_claims, r_values))
        except UndefinedMetricError:
            excluded += 1
    if excluded:
        logger.warning(
            "excluded %d transcript(s) without relevant sentences from MAP", excluded
        )
    if not per_run:
        raise UndefinedMetricError("no evaluable transcript")
    agg = {
        col: sum(m[col] for m in per_run) / len(per_run)
        for col in metric_columns(r_values)
    }
    return agg, excluded


def map_inner(
    sentence_evidence: Mapping[str, Sequence[str]],
    gold_claims: Mapping[str, set[str]],
) -> tuple[float, int]:
    """Mean AP_inner over sentences that have at least one gold verdict claim.

    Sentences are visited in sorted id order; the mean is order-independent.
    Returns (mean, number of sentences without gold verdict claims skipped).
    """
    values = []
    skipped = 0
    for sid in sorted(sentence_evidence):
        relevant = gold_claims.get(sid, set())
        if not relevant:
            skipped += 1
            continue
        values.append(ap_inner(sentence_evidence[sid], relevant))
    if not values:
        raise UndefinedMetricError("no sentence with a gold verdict claim")
    return sum(values) / len(values), skipped


# ---------------------------------------------------------------------------
# run file persistence: one line per ranked sentence

def save_runs(runs: Iterable[RankingRun], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for run in runs:
            for rank, s in enumerate(run.sentences, start=1):
                rec = {
                    "transcript_id": run.transcript_id,
                    "rank": rank,
                    "sentence_id": s.sentence_id,
                    "score": s.score,
                    "evidence": list(s.evidence),
                }
                fh.write(json.dumps(rec, sort_keys=True) + "\n")


def load_runs(path: str) -> list[RankingRun]:
    """Read a run file back; ranks must be contiguous from 1 per transcript."""
    by_transcript: dict[str, list[tuple[int, RankedSentence]]] = {}
    order: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(path, lineno, f"malformed JSON: {exc.msg}") from exc
            try:
                tid = str(obj["transcript_id"])
                entry = (
                    int(obj["rank"]),
                    RankedSentence(
                        sentence_id=str(obj["sentence_id"]),
                        score=float(obj["score"]),
                        evidence=tuple(str(c) for c in obj.get("evidence", [])),
                    ),
                )
            except (KeyError, ValueError, TypeError) as exc:
                raise ParseError(path, lineno, f"bad run record: {exc}") from exc
            if tid not in by_transcript:
                order.append(tid)
            by_transcript.setdefault(tid, []).append(entry)
    runs = []
    for tid in order:
        entries = sorted(by_transcript[tid], key=lambda e: e[0])
        ranks = [r for r, _s in entries]
        if ranks != list(range(1, len(ranks) + 1)):
            raise ValidationError(f"run {tid}: ranks are not contiguous from 1")
        runs.append(RankingRun(tid, tuple(s for _r, s in entries)))
    return runs
