"""Run one scoring job: every manifest pair gets all 10 metric records."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .backends import ModelBank, bertscore_f1, cosine, embed, nli_posteriors
from .errors import ScorerError
from .textio import (
    SEGMENTATION_RULE,
    read_claims,
    read_manifest,
    read_sentences,
    split_sentences,
    write_jsonl_atomic,
)

METRICS = (
    "nli_entail",
    "nli_neutral",
    "nli_contradict",
    "bertscore_f1",
    "sbert_statement",
    "sbert_title",
    "sbert_body_top",
    "simcse_statement",
    "simcse_title",
    "simcse_body_top",
)


@dataclass
class ScoreJob:
    """Inputs and knobs for one scoring run."""

    manifest: str
    claims: str
    transcripts: str
    out: str
    models: dict
    batch_size: int = 64
    device: str = "cpu"

    def __post_init__(self):
        if self.batch_size < 1:
            raise ScorerError("batch_size must be >= 1")


def _check(value: float, metric: str, sid: str, cid: str) -> float:
    if not math.isfinite(value):
        raise ScorerError(f"pair ({sid}, {cid}): non-finite {metric} score")
    return float(value)


def _pair_records(sid: str, cid: str, sentence: str, claim: dict, bank: ModelBank) -> list[dict]:
    entail, neutral, contradict = nli_posteriors(sentence, claim["statement"])
    records = [
        ("nli_entail", [entail]),
        ("nli_neutral", [neutral]),
        ("nli_contradict", [contradict]),
        ("bertscore_f1", [bertscore_f1(sentence, claim["statement"])]),
    ]
    for prefix, salt, dim in (
        ("sbert", bank.sbert_salt, bank.sbert_dim),
        ("simcse", bank.simcse_salt, bank.simcse_dim),
    ):
        sent_vec = embed(sentence, salt, dim)
        records.append((f"{prefix}_statement", [cosine(sent_vec, embed(claim["statement"], salt, dim))]))
        records.append((f"{prefix}_title", [cosine(sent_vec, embed(claim["title"], salt, dim))]))
        segments = split_sentences(claim["body"])
        sims = sorted(
            (cosine(sent_vec, embed(seg, salt, dim)) for seg in segments), reverse=True
        )[:4]
        records.append((f"{prefix}_body_top", sims or [0.0]))
    return [
        {
            "sentence_id": sid,
            "claim_id": cid,
            "metric": metric,
            "values": [_check(v, metric, sid, cid) for v in values],
        }
        for metric, values in records
    ]


def score_pairs(job: ScoreJob) -> dict:
    """Score every manifest pair and write scores.jsonl + a meta sidecar.

    Returns the meta dict. The score file is written atomically; the
    sidecar `<out>.meta.json` records model identifiers and the body
    segmentation rule for provenance (the score file itself stays pure
    records).
    """
    bank = ModelBank.from_config(job.models)
    pairs = read_manifest(job.manifest)
    claims = read_claims(job.claims)
    sentences = read_sentences(job.transcripts)

    def records():
        for sid, cid in pairs:
            if sid not in sentences:
                raise ScorerError(f"pair ({sid}, {cid}): unknown sentence_id")
            if cid not in claims:
                raise ScorerError(f"pair ({sid}, {cid}): unknown claim_id")
            yield from _pair_records(sid, cid, sentences[sid], claims[cid], bank)

    n_records = write_jsonl_atomic(job.out, records())
    meta = {
        "models": bank.identifiers,
        "segmentation": SEGMENTATION_RULE,
        "batch_size": job.batch_size,
        "device": job.device,
        "n_pairs": len(pairs),
        "n_records": n_records,
    }
    with open(job.out + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return meta
