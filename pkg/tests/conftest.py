"""Shared fixtures: tiny hand-built corpora plus generated ones."""

import numpy as np
import pytest

from checkrank.corpus import (
    Corpus,
    DenseScoreRecord,
    GoldPair,
    ScoreTable,
    SentenceRec,
    TranscriptDoc,
    VerifiedClaim,
)
from checkrank.synth import make_corpus


def claim(cid, statement="taxes fund the wall", truth="false",
          title="wall funding checked", body="the wall body text"):
    return VerifiedClaim(claim_id=cid, statement=statement, truth_value=truth,
                         title=title, body=body)


def dense_records(sid, cid, **overrides):
    """A full set of the 10 dense metric records for one pair."""
    base = {
        "nli_entail": (0.7,),
        "nli_neutral": (0.2,),
        "nli_contradict": (0.1,),
        "bertscore_f1": (0.5,),
        "sbert_statement": (0.4,),
        "sbert_title": (0.3,),
        "sbert_body_top": (0.6, 0.5, 0.4, 0.3),
        "simcse_statement": (0.45,),
        "simcse_title": (0.35,),
        "simcse_body_top": (0.55, 0.45),
    }
    base.update(overrides)
    return [DenseScoreRecord(sid, cid, m, tuple(v)) for m, v in base.items()]


def tiny_corpus():
    """Two transcripts, fully scored pairs, one relevant sentence each."""
    claims = [
        claim("c1", statement="taxes fund the wall", truth="false",
              title="wall funding", body="congress never funded the wall project"),
        claim("c2", statement="jobs grew last year", truth="true",
              title="jobs report", body="employment grew steadily across sectors"),
        claim("c3", statement="crime fell by half", truth="half-true",
              title="crime stats", body="urban crime trends are mixed overall"),
    ]
    t1 = TranscriptDoc("t1", (
        SentenceRec("t1s0", "t1", 0, text="they said taxes fund the wall"),
        SentenceRec("t1s1", "t1", 1, text="the weather was nice that evening"),
        SentenceRec("t1s2", "t1", 2, text="people cheered loudly at the end"),
    ))
    t2 = TranscriptDoc("t2", (
        SentenceRec("t2s0", "t2", 0, text="jobs grew a lot last year they claim"),
        SentenceRec("t2s1", "t2", 1, text="nobody mentioned the venue again"),
    ))
    gold = [
        GoldPair("t1s0", "c1", "agree", "false"),
        GoldPair("t2s0", "c2", "agree", "true"),
        GoldPair("t1s1", "c3", "unrelated", "unknown"),
    ]
    records = []
    for sent in list(t1.sentences) + list(t2.sentences):
        for c in claims:
            records.extend(dense_records(sent.sentence_id, c.claim_id))
    return Corpus(claims=claims, transcripts=[t1, t2], gold=gold,
                  scores=ScoreTable(records))


@pytest.fixture
def corpus2():
    return tiny_corpus()


@pytest.fixture(scope="session")
def planted_corpus():
    """The separable generated corpus shared by the slower integration tests."""
    return make_corpus(n_transcripts=3, n_sentences=12, n_relevant=3,
                       n_extra_claims=12, pool=6, seed=7)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
