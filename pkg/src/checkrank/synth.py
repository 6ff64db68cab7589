"""Deterministic synthetic corpora with a known, linearly separable structure.

Every relevant sentence shares a unique marker token with its gold claim's
article body, so BM25-on-body retrieves that claim at rank 1 and the planted
evidence hit is guaranteed. Dense scores are drawn from disjoint ranges for
matching and non-matching pairs, so a linear ranker can separate relevant
sentences perfectly; the direction each informative slot separates in is
recorded in PLANTED_SIGNS for sign-recovery checks.

A shared filler token appears in every sentence and every claim body, which
keeps candidate pools full (exactly ``pool`` claims per sentence) and makes
pair counts exact: n_sentences x pool.

Optionally, half-true decoy claims are planted against non-relevant
sentences with match-level dense scores: plain max pooling is fooled by
them, skipping half-true claims is not.
"""

from __future__ import annotations

import datetime
from pathlib import Path

import numpy as np

from .bm25 import build_index
from .corpus import (
    Corpus,
    GoldPair,
    ScoreTable,
    SentenceRec,
    TranscriptDoc,
    VerifiedClaim,
    DenseScoreRecord,
    save_claims,
    save_gold,
    save_scores,
    save_transcripts,
)
from .errors import ValidationError
from .features import candidates

# Slots whose pooled value separates relevant from non-relevant sentences,
# with the sign a trained linear ranker must recover on them.
PLANTED_SIGNS = {
    "bm25_body": 1.0,
    "nli_entail": 1.0,
    "nli_contradict": -1.0,
    "bertscore_f1": 1.0,
    "sbert_statement": 1.0,
    "simcse_statement": 1.0,
}

# Disjoint vocabularies: sentence filler never appears in distractor claim
# bodies, so only the shared token and the planted markers carry BM25 mass.
_SENTENCE_WORDS = (
    "we always believed people deserve better schools roads jobs wages "
    "growth security votes future children families towns farmers here now"
).split()

_ARTICLE_WORDS = (
    "records archive research analysis figures statistics report review "
    "study index bureau ledger summary detail context source checked rated"
).split()

_COMMON = "policy"

_SPEAKERS = ("moderator", "candidate-a", "candidate-b")

# Gold claims cycle through every non-half-true label so max-skip never
# drops a genuinely matching claim.
_GOLD_TRUTHS = ("true", "false", "mostly-true", "mostly-false", "pants-on-fire")

# Distractor claims rotate through all six labels, half-true included.
TRUTH_CYCLE = (
    "true",
    "mostly-true",
    "half-true",
    "mostly-false",
    "false",
    "pants-on-fire",
)

_HIGH = {
    "nli_entail": (0.75, 0.92),
    "nli_contradict": (0.01, 0.05),
    "bertscore_f1": (0.80, 0.95),
    "sbert_statement": (0.85, 0.98),
    "sbert_title": (0.60, 0.90),
    "sbert_body_top": (0.70, 0.95),
    "simcse_statement": (0.85, 0.98),
    "simcse_title": (0.60, 0.90),
    "simcse_body_top": (0.70, 0.95),
}

_LOW = {
    "nli_entail": (0.05, 0.20),
    "nli_contradict": (0.02, 0.15),
    "bertscore_f1": (0.20, 0.50),
    "sbert_statement": (0.05, 0.30),
    "sbert_title": (0.05, 0.30),
    "sbert_body_top": (0.05, 0.30),
    "simcse_statement": (0.05, 0.30),
    "simcse_title": (0.05, 0.30),
    "simcse_body_top": (0.05, 0.30),
}

# Non-relevant sentences carry a high contradiction signal on every pair;
# this is the negatively-signed plant.
_LOW_CONTRA = (0.35, 0.60)


def _words(rng: np.random.Generator, source: list[str] | tuple[str, ...], k: int) -> list[str]:
    return [source[int(i)] for i in rng.integers(0, len(source), size=k)]


def _pair_records(
    rng: np.random.Generator, sentence_id: str, claim_id: str, kind: str
) -> list[DenseScoreRecord]:
    """All 10 metric records for one pair; ranges depend on the pair kind."""
    ranges = dict(_HIGH if kind == "match" else _LOW)
    if kind == "nonrel":
        ranges["nli_contradict"] = _LOW_CONTRA

    def draw(metric: str) -> float:
        lo, hi = ranges[metric]
        return float(rng.uniform(lo, hi))

    entail = draw("nli_entail")
    contradict = draw("nli_contradict")
    recs = [
        DenseScoreRecord(sentence_id, claim_id, "nli_entail", (entail,)),
        DenseScoreRecord(sentence_id, claim_id, "nli_neutral", (1.0 - entail - contradict,)),
        DenseScoreRecord(sentence_id, claim_id, "nli_contradict", (contradict,)),
        DenseScoreRecord(sentence_id, claim_id, "bertscore_f1", (draw("bertscore_f1"),)),
    ]
    for metric in ("sbert_statement", "sbert_title", "simcse_statement", "simcse_title"):
        recs.append(DenseScoreRecord(sentence_id, claim_id, metric, (draw(metric),)))
    for metric in ("sbert_body_top", "simcse_body_top"):
        tops = sorted((draw(metric) for _ in range(4)), reverse=True)
        recs.append(DenseScoreRecord(sentence_id, claim_id, metric, tuple(tops)))
    return recs


def make_corpus(
    n_transcripts: int = 5,
    n_sentences: int = 40,
    n_relevant: int = 8,
    n_extra_claims: int = 30,
    pool: int = 15,
    seed: int = 0,
    half_true_decoys: int = 0,
) -> Corpus:
    """Build a fully scored in-memory corpus; same arguments, same bytes out.

    half_true_decoys > 0 attaches that many half-true claims per transcript
    to its trailing non-relevant sentences, scored like true matches.
    """
    if n_relevant + half_true_decoys > n_sentences:
        raise ValidationError("more planted sentences than sentences")
    rng = np.random.default_rng(seed)

    claims: list[VerifiedClaim] = []
    docs: list[TranscriptDoc] = []
    gold: list[GoldPair] = []
    gold_of: dict[str, str] = {}
    decoy_of: dict[str, str] = {}
    relevant_ids: set[str] = set()

    for i in range(n_extra_claims):
        cid = f"d{i:04d}"
        claims.append(
            VerifiedClaim(
                claim_id=cid,
                statement=" ".join(_words(rng, _ARTICLE_WORDS, 6)),
                truth_value=TRUTH_CYCLE[i % len(TRUTH_CYCLE)],
                title=" ".join(_words(rng, _ARTICLE_WORDS, 3)),
                body=" ".join([_COMMON] + _words(rng, _ARTICLE_WORDS, 10)),
                date=datetime.date(2017, 1, 1) + datetime.timedelta(days=i),
            )
        )

    marker_count = 0
    for t in range(n_transcripts):
        tid = f"ev{t + 1:02d}"
        rel_positions = set(
            int(p) for p in rng.choice(n_sentences, size=n_relevant, replace=False)
        )
        non_rel = [p for p in range(n_sentences) if p not in rel_positions]
        decoy_positions = set(non_rel[-half_true_decoys:]) if half_true_decoys else set()

        sentences = []
        for pos in range(n_sentences):
            sid = f"{tid}-s{pos:03d}"
            text_words = _words(rng, _SENTENCE_WORDS, 8) + [_COMMON]
            if pos in rel_positions:
                marker = f"factmark{marker_count:04d}"
                cid = f"g{marker_count:04d}"
                marker_count += 1
                text_words.append(marker)
                truth = _GOLD_TRUTHS[marker_count % len(_GOLD_TRUTHS)]
                verdict = "true" if truth in ("true", "mostly-true") else "false"
                claims.append(
                    VerifiedClaim(
                        claim_id=cid,
                        statement=" ".join(_words(rng, _SENTENCE_WORDS, 5) + [marker]),
                        truth_value=truth,
                        title=" ".join(["checking", marker]),
                        body=" ".join(
                            [marker, marker, _COMMON] + _words(rng, _ARTICLE_WORDS, 4)
                        ),
                        date=datetime.date(2017, 6, 1) + datetime.timedelta(days=marker_count),
                    )
                )
                gold.append(GoldPair(sid, cid, "agree", verdict))
                gold_of[sid] = cid
                relevant_ids.add(sid)
            elif pos in decoy_positions:
                marker = f"decoymark{marker_count:04d}"
                cid = f"h{marker_count:04d}"
                marker_count += 1
                text_words.append(marker)
                claims.append(
                    VerifiedClaim(
                        claim_id=cid,
                        statement=" ".join(_words(rng, _SENTENCE_WORDS, 5) + [marker]),
                        truth_value="half-true",
                        title=" ".join(["checking", marker]),
                        body=" ".join(
                            [marker, marker, _COMMON] + _words(rng, _ARTICLE_WORDS, 4)
                        ),
                        date=datetime.date(2017, 6, 1) + datetime.timedelta(days=marker_count),
                    )
                )
                decoy_of[sid] = cid
            sentences.append(
                SentenceRec(
                    sentence_id=sid,
                    transcript_id=tid,
                    index=pos,
                    text=" ".join(text_words) + ".",
                    speaker=_SPEAKERS[pos % len(_SPEAKERS)],
                )
            )
        # A couple of annotated-but-not-verifiable pairs, to exercise the
        # verdict labels that must not count toward relevance.
        if len(non_rel) >= 2:
            gold.append(GoldPair(f"{tid}-s{non_rel[0]:03d}", "d0000", "unrelated", "not-claim"))
            gold.append(GoldPair(f"{tid}-s{non_rel[1]:03d}", "d0001", "agree", "unknown"))
        docs.append(
            TranscriptDoc(
                tid,
                tuple(sentences),
                event_date=datetime.date(2018, 1, 1) + datetime.timedelta(days=t),
            )
        )

    index = build_index(claims)
    records: list[DenseScoreRecord] = []
    for doc in docs:
        for sent in doc.sentences:
            for cid in candidates(sent, index, pool):
                if gold_of.get(sent.sentence_id) == cid or decoy_of.get(sent.sentence_id) == cid:
                    kind = "match"
                elif sent.sentence_id in relevant_ids or sent.sentence_id in decoy_of:
                    # decoy sentences mimic relevant ones on their side pairs,
                    # so only the half-true label gives them away
                    kind = "rel"
                else:
                    kind = "nonrel"
                records.extend(_pair_records(rng, sent.sentence_id, cid, kind))

    return Corpus(tuple(claims), tuple(docs), tuple(gold), ScoreTable(records))


def write_corpus(corpus: Corpus, out_dir: str | Path) -> dict[str, str]:
    """Write the four corpus files into out_dir; returns their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "claims": str(out / "claims.jsonl"),
        "transcripts": str(out / "transcript.jsonl"),
        "gold": str(out / "gold.jsonl"),
        "scores": str(out / "scores.jsonl"),
    }
    save_claims(corpus.claims, paths["claims"])
    save_transcripts(corpus.transcripts, paths["transcripts"])
    save_gold(corpus.gold, paths["gold"])
    save_scores(corpus.scores, paths["scores"])
    return paths
