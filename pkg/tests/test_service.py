"""HTTP service: read-only endpoints, paging, errors, schema header."""

import json

import pytest
from fastapi.testclient import TestClient

from checkrank.bm25 import build_index
from checkrank.errors import ValidationError
from checkrank.features import SLOT_NAMES, candidates
from checkrank.metrics import RankedSentence, RankingRun, save_runs
from checkrank.corpus import sentence_relevance
from checkrank.service import create_app, load_state
from checkrank.synth import make_corpus, write_corpus


@pytest.fixture(scope="module")
def service_env(tmp_path_factory):
    root = tmp_path_factory.mktemp("service")
    data_dir = root / "data"
    runs_dir = root / "runs"
    runs_dir.mkdir()
    corpus = make_corpus(n_transcripts=2, n_sentences=6, n_relevant=2,
                         n_extra_claims=8, pool=4, seed=9)
    write_corpus(corpus, data_dir)

    index = build_index(corpus.claims)
    pools = {
        s.sentence_id: candidates(s, index, 4)
        for t in corpus.transcripts
        for s in t.sentences
    }
    demo_runs = []
    for doc in corpus.transcripts:
        ranked = [
            RankedSentence(s.sentence_id, float(len(doc) - i), tuple(pools[s.sentence_id]))
            for i, s in enumerate(reversed(doc.sentences))
        ]
        demo_runs.append(RankingRun(doc.transcript_id, tuple(ranked)))
    save_runs(demo_runs, str(runs_dir / "demo.jsonl"))

    # a second run that covers only the first transcript, with over-long evidence
    wide = tuple(c.claim_id for c in corpus.claims[:7])
    partial = RankingRun(
        "ev01",
        tuple(
            RankedSentence(s.sentence_id, float(9 - i), wide)
            for i, s in enumerate(corpus.transcripts[0].sentences)
        ),
    )
    save_runs([partial], str(runs_dir / "partial.jsonl"))
    return corpus, data_dir, runs_dir, demo_runs


@pytest.fixture(scope="module")
def client(service_env):
    _, data_dir, runs_dir, _ = service_env
    app = create_app(str(data_dir), str(runs_dir))
    return TestClient(app, raise_server_exceptions=False)


def test_transcripts_sorted_by_date_then_id(client):
    resp = client.get("/transcripts")
    assert resp.status_code == 200
    rows = resp.json()
    assert [r["transcript_id"] for r in rows] == ["ev01", "ev02"]
    assert rows[0]["event_date"] == "2018-01-01"
    assert rows[0]["n_sentences"] == 6


def test_transcripts_pagination(client):
    assert len(client.get("/transcripts", params={"limit": 1}).json()) == 1
    rows = client.get("/transcripts", params={"offset": 1}).json()
    assert [r["transcript_id"] for r in rows] == ["ev02"]
    assert client.get("/transcripts", params={"offset": 2}).json() == []

    resp = client.get("/transcripts", params={"offset": -1})
    assert resp.status_code == 422
    assert resp.json() == {"code": 422, "message": "offset must be >= 0"}
    for bad_limit in (0, 501):
        resp = client.get("/transcripts", params={"limit": bad_limit})
        assert resp.status_code == 422
        assert resp.json()["message"] == "limit must be in 1..500"


def test_ranking_preserves_run_file_order(client, service_env):
    corpus, _, _, demo_runs = service_env
    run = next(r for r in demo_runs if r.transcript_id == "ev01")
    rows = client.get("/transcripts/ev01/ranking", params={"run": "demo"}).json()
    assert [r["sentence_id"] for r in rows] == [s.sentence_id for s in run.sentences]
    assert [r["rank"] for r in rows] == list(range(1, 7))
    assert [r["score"] for r in rows] == [s.score for s in run.sentences]
    relevance = sentence_relevance(corpus.transcripts[0], corpus.gold)
    for row in rows:
        assert row["relevant"] == relevance[row["sentence_id"]]
        assert row["speaker"] in ("moderator", "candidate-a", "candidate-b")


def test_ranking_evidence_views(client, service_env):
    corpus, _, _, _ = service_env
    rows = client.get("/transcripts/ev01/ranking", params={"run": "demo"}).json()
    claims_by_id = {c.claim_id: c for c in corpus.claims}
    for row in rows:
        assert len(row["evidence"]) == 4  # full pool fits under the cap
        for ev in row["evidence"]:
            claim = claims_by_id[ev["claim_id"]]
            assert ev["statement"] == claim.statement
            assert ev["truth_value"] == claim.truth_value
            assert set(ev["scores"]) == set(SLOT_NAMES)
            assert all(isinstance(v, float) for v in ev["scores"].values())


def test_ranking_evidence_is_capped_at_five(client):
    rows = client.get("/transcripts/ev01/ranking", params={"run": "partial"}).json()
    assert all(len(r["evidence"]) == 5 for r in rows)  # 7 in the file, 5 served


def test_ranking_requires_the_run_parameter(client):
    resp = client.get("/transcripts/ev01/ranking")
    assert resp.status_code == 422
    assert resp.json() == {"code": 422, "message": "invalid request parameters"}


def test_ranking_404s(client):
    resp = client.get("/transcripts/ev99/ranking", params={"run": "demo"})
    assert resp.status_code == 404
    assert "unknown transcript" in resp.json()["message"]

    resp = client.get("/transcripts/ev01/ranking", params={"run": "missing"})
    assert resp.status_code == 404
    assert "unknown run" in resp.json()["message"]

    resp = client.get("/transcripts/ev02/ranking", params={"run": "partial"})
    assert resp.status_code == 404
    assert "no ranking" in resp.json()["message"]


def test_ranking_pagination(client):
    rows = client.get(
        "/transcripts/ev01/ranking", params={"run": "demo", "offset": 4, "limit": 500}
    ).json()
    assert [r["rank"] for r in rows] == [5, 6]


def test_sentence_evidence_is_live_retrieval(client, service_env):
    corpus, _, _, _ = service_env
    index = build_index(corpus.claims)
    gold_by_sid = {
        g.sentence_id: g.claim_id
        for g in corpus.gold
        if g.verdict in ("true", "false")
    }
    sid = next(iter(gold_by_sid))
    body = client.get(f"/sentences/{sid}/evidence").json()
    assert body["sentence_id"] == sid
    assert body["transcript_id"] == sid.split("-")[0]
    assert body["relevant"] is True
    served = [ev["claim_id"] for ev in body["evidence"]]
    sent = corpus.sentences_by_id[sid]
    assert served == candidates(sent, index, 5)
    assert served[0] == gold_by_sid[sid]  # marker token pins the gold claim on top

    two = client.get(f"/sentences/{sid}/evidence", params={"r": 2}).json()
    assert [ev["claim_id"] for ev in two["evidence"]] == served[:2]


def test_sentence_evidence_errors(client):
    resp = client.get("/sentences/nope/evidence")
    assert resp.status_code == 404
    assert "unknown sentence" in resp.json()["message"]

    resp = client.get("/sentences/ev01-s000/evidence", params={"r": 0})
    assert resp.status_code == 422
    assert resp.json()["message"] == "r must be >= 1"


def test_runs_listing(client):
    rows = client.get("/runs").json()
    assert [r["run_id"] for r in rows] == ["demo", "partial"]
    demo = rows[0]
    assert demo["transcripts"] == ["ev01", "ev02"]
    assert demo["n_sentences"] == 12
    assert rows[1]["transcripts"] == ["ev01"]


def test_schema_version_header_on_every_response(client):
    for path, params in [
        ("/transcripts", {}),
        ("/transcripts/ev01/ranking", {"run": "demo"}),
        ("/transcripts/ev99/ranking", {"run": "demo"}),  # 404
        ("/transcripts/ev01/ranking", {}),               # 422
        ("/runs", {}),
    ]:
        resp = client.get(path, params=params)
        assert resp.headers["X-Schema-Version"] == "1"


def test_service_is_read_only(client):
    assert client.post("/transcripts").status_code == 405
    assert client.delete("/runs").status_code == 405
    assert client.put("/sentences/x/evidence").status_code == 405
    routes = [r for r in client.app.routes if hasattr(r, "methods")]
    app_routes = [r for r in routes if r.path.startswith(("/transcripts", "/sentences", "/runs"))]
    assert app_routes
    for route in app_routes:
        assert route.methods <= {"GET", "HEAD"}


def test_create_app_refuses_malformed_corpus(tmp_path, service_env):
    _, data_dir, _, _ = service_env
    bad_dir = tmp_path / "bad"
    bad_dir.mkdir()
    (bad_dir / "transcript.jsonl").write_bytes((data_dir / "transcript.jsonl").read_bytes())
    lines = (data_dir / "claims.jsonl").read_text().splitlines()
    lines[0] = "{oops"
    (bad_dir / "claims.jsonl").write_text("\n".join(lines) + "\n")
    with pytest.raises(ValidationError, match="claims.jsonl:1"):
        create_app(str(bad_dir))


def test_load_state_requires_corpus_files(tmp_path):
    with pytest.raises(ValidationError, match="need claims.jsonl"):
        load_state(str(tmp_path))


def test_load_state_rejects_dangling_run_files(tmp_path, service_env):
    _, data_dir, _, _ = service_env
    runs_dir = tmp_path / "runs"
    runs_dir.mkdir()
    (runs_dir / "ghost.jsonl").write_text(json.dumps({
        "transcript_id": "ghost", "rank": 1, "sentence_id": "x",
        "score": 0.0, "evidence": [],
    }) + "\n")
    with pytest.raises(ValidationError, match="unknown transcript"):
        load_state(str(data_dir), str(runs_dir))


def test_empty_corpus_serves_empty_listing(tmp_path):
    (tmp_path / "claims.jsonl").write_text(
        json.dumps({
            "claim_id": "c1", "statement": "water is wet", "truth_value": "true",
            "title": "water", "body": "it is",
        }) + "\n"
    )
    (tmp_path / "transcript.jsonl").write_text("")
    app = create_app(str(tmp_path))
    with TestClient(app) as empty_client:
        assert empty_client.get("/transcripts").json() == []
        assert empty_client.get("/runs").json() == []
