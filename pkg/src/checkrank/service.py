"""Read-only HTTP facade over corpora, run files, and evidence.

The whole corpus is validated and loaded at startup (a malformed corpus
means the app constructor raises and the service never starts); after that
every request is served from immutable in-memory state, so concurrent reads
need no locks. There are no mutating endpoints.

Errors are JSON ``{code, message}`` bodies; every response carries an
``X-Schema-Version`` header.
"""

from __future__ import annotations

import datetime
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import HTTPException, RequestValidationError
from fastapi.responses import JSONResponse

from .bm25 import Bm25Index, build_index, tokenize
from .corpus import Corpus, SentenceRec
from .errors import ValidationError
from .features import SLOT_NAMES, assemble_pair
from .metrics import RankingRun, load_runs, verdict_claims

SCHEMA_VERSION = "1"

MAX_PAGE = 500

DEFAULT_EVIDENCE = 5


class ServiceState:
    """Immutable-after-init data the endpoints read from."""

    def __init__(self, corpus: Corpus, runs: dict[str, dict[str, RankingRun]]):
        self.corpus = corpus
        self.index: Bm25Index = build_index(corpus.claims)
        self.runs = runs
        self.relevance = corpus.relevance() if corpus.gold else {}
        self.gold_claims = verdict_claims(corpus.gold)
        self.verdict_of = {
            (p.sentence_id, p.claim_id): p.verdict for p in corpus.gold
        }
        self.transcript_of = {
            s.sentence_id: t.transcript_id
            for t in corpus.transcripts
            for s in t.sentences
        }


def load_state(data_dir: str, runs_dir: str | None = None) -> ServiceState:
    """Load and validate everything the service needs; raises on bad data."""
    root = Path(data_dir)
    claims = root / "claims.jsonl"
    transcripts = root / "transcript.jsonl"
    if not claims.is_file() or not transcripts.is_file():
        raise ValidationError(
            f"{data_dir}: need claims.jsonl and transcript.jsonl"
        )
    gold = root / "gold.jsonl"
    scores = root / "scores.jsonl"
    corpus = Corpus.load(
        str(claims),
        str(transcripts),
        str(gold) if gold.is_file() else None,
        str(scores) if scores.is_file() else None,
    )
    runs: dict[str, dict[str, RankingRun]] = {}
    if runs_dir:
        known = set()
        for t in corpus.transcripts:
            known.add(t.transcript_id)
        for path in sorted(Path(runs_dir).glob("*.jsonl")):
            run_list = load_runs(str(path))
            for run in run_list:
                if run.transcript_id not in known:
                    raise ValidationError(
                        f"{path}: run references unknown transcript {run.transcript_id!r}"
                    )
            runs[path.stem] = {run.transcript_id: run for run in run_list}
    return ServiceState(corpus, runs)


def _page(items: list, offset: int, limit: int) -> list:
    if offset < 0:
        raise HTTPException(status_code=422, detail="offset must be >= 0")
    if not 1 <= limit <= MAX_PAGE:
        raise HTTPException(status_code=422, detail=f"limit must be in 1..{MAX_PAGE}")
    return items[offset : offset + limit]


def _date_key(d: datetime.date | None):
    return (d is None, d or datetime.date.min)


def create_app(
    data_dir: str,
    runs_dir: str | None = None,
    evidence_limit: int = DEFAULT_EVIDENCE,
) -> FastAPI:
    state = load_state(data_dir, runs_dir)
    app = FastAPI(title="checkrank", version=SCHEMA_VERSION)

    def claim_view(sentence: SentenceRec, claim_id: str) -> dict:
        claim = state.corpus.claims_by_id[claim_id]
        pair = assemble_pair(sentence, claim, state.index, state.corpus.scores, lenient=True)
        return {
            "claim_id": claim.claim_id,
            "statement": claim.statement,
            "truth_value": claim.truth_value,
            "title": claim.title,
            "date": claim.date.isoformat() if claim.date else None,
            "verdict": state.verdict_of.get((sentence.sentence_id, claim_id)),
            "scores": {
                name: float(value) for name, value in zip(SLOT_NAMES, pair.values)
            },
        }

    @app.exception_handler(HTTPException)
    async def http_error(_request: Request, exc: HTTPException):
        return JSONResponse(
            status_code=exc.status_code,
            content={"code": exc.status_code, "message": str(exc.detail)},
        )

    @app.exception_handler(RequestValidationError)
    async def invalid_request(_request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=422,
            content={"code": 422, "message": "invalid request parameters"},
        )

    @app.middleware("http")
    async def schema_header(request: Request, call_next):
        response = await call_next(request)
        response.headers["X-Schema-Version"] = SCHEMA_VERSION
        return response

    @app.get("/transcripts")
    def list_transcripts(offset: int = 0, limit: int = MAX_PAGE):
        docs = sorted(
            state.corpus.transcripts,
            key=lambda t: (_date_key(t.event_date), t.transcript_id),
        )
        return _page(
            [
                {
                    "transcript_id": t.transcript_id,
                    "event_date": t.event_date.isoformat() if t.event_date else None,
                    "n_sentences": len(t),
                }
                for t in docs
            ],
            offset,
            limit,
        )

    @app.get("/transcripts/{transcript_id}/ranking")
    def ranking(transcript_id: str, run: str, offset: int = 0, limit: int = MAX_PAGE):
        if transcript_id not in state.corpus.transcripts_by_id:
            raise HTTPException(status_code=404, detail=f"unknown transcript {transcript_id!r}")
        if run not in state.runs:
            raise HTTPException(status_code=404, detail=f"unknown run {run!r}")
        run_for = state.runs[run].get(transcript_id)
        if run_for is None:
            raise HTTPException(
                status_code=404, detail=f"run {run!r} has no ranking for {transcript_id!r}"
            )
        rows = []
        for rank_pos, ranked in enumerate(run_for.sentences, start=1):
            sent = state.corpus.sentences_by_id[ranked.sentence_id]
            rows.append(
                {
                    "rank": rank_pos,
                    "sentence_id": sent.sentence_id,
                    "text": sent.text,
                    "speaker": sent.speaker,
                    "score": ranked.score,
                    "relevant": state.relevance.get(sent.sentence_id)
                    if state.corpus.gold
                    else None,
                    "evidence": [
                        claim_view(sent, cid)
                        for cid in ranked.evidence[:evidence_limit]
                    ],
                }
            )
        return _page(rows, offset, limit)

    @app.get("/sentences/{sentence_id}/evidence")
    def evidence(sentence_id: str, r: int = DEFAULT_EVIDENCE):
        sent = state.corpus.sentences_by_id.get(sentence_id)
        if sent is None:
            raise HTTPException(status_code=404, detail=f"unknown sentence {sentence_id!r}")
        if r < 1:
            raise HTTPException(status_code=422, detail="r must be >= 1")
        ranked = state.index.retrieve(tokenize(sent.text), "body", r)
        return {
            "sentence_id": sentence_id,
            "transcript_id": state.transcript_of[sentence_id],
            "text": sent.text,
            "relevant": state.relevance.get(sentence_id) if state.corpus.gold else None,
            "evidence": [claim_view(sent, cid) for cid, _score in ranked],
        }

    @app.get("/runs")
    def list_runs(offset: int = 0, limit: int = MAX_PAGE):
        rows = [
            {
                "run_id": run_id,
                "transcripts": sorted(by_tid),
                "n_sentences": sum(len(r.sentences) for r in by_tid.values()),
            }
            for run_id, by_tid in sorted(state.runs.items())
        ]
        return _page(rows, offset, limit)

    return app
