"""
Serving rankings for human review
=================================

"""

# The read-only HTTP facade serves transcripts, saved ranking runs, and
# per-claim evidence views. Here it is driven in-process; in production
# run `checkrank serve --data DIR --runs DIR`.
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from checkrank import (
    ExperimentConfig, build_vectors, load_workspace, rank, save_runs, train_full,
)
from checkrank.service import create_app
from checkrank.synth import make_corpus, write_corpus

data = Path(tempfile.mkdtemp(prefix="checkrank-serve-"))
write_corpus(
    make_corpus(n_transcripts=2, n_sentences=8, n_relevant=2,
                n_extra_claims=10, pool=5, seed=13),
    data,
)

# Train once over the corpus and save the resulting rankings as a named
# run the service can list.
ws = load_workspace(ExperimentConfig(
    claims=str(data / "claims.jsonl"), transcripts=str(data / "transcript.jsonl"),
    gold=str(data / "gold.jsonl"), scores=str(data / "scores.jsonl"),
    pool=5, n_candidates=3, epochs=60, c_grid=(1.0,),
))
model = train_full(ws)
vectors = build_vectors(ws)
runs_dir = data / "runs"
runs_dir.mkdir()
save_runs(
    [rank(model, tid, vecs) for tid, vecs in sorted(vectors.items())],
    str(runs_dir / "demo.jsonl"),
)

client = TestClient(create_app(str(data), str(runs_dir)))

# Transcripts come back sorted by event date.
print("GET /transcripts ->", client.get("/transcripts").json())
print("GET /runs        ->", client.get("/runs").json())

# A run's ranking, with evidence claims expanded into review cards.
rows = client.get("/transcripts/ev01/ranking", params={"run": "demo"}).json()
top = rows[0]
print(f"\n#1 of ev01: {top['sentence_id']} ({top['speaker']})")
print("  ", top["text"])
card = top["evidence"][0]
print("  top evidence:", card["claim_id"], f"[{card['truth_value']}]",
      "-", card["statement"])

# Ad-hoc evidence for any sentence, retrieved live from the claim index.
fresh = client.get(f"/sentences/{top['sentence_id']}/evidence", params={"r": 2}).json()
print("\nlive retrieval:", [c["claim_id"] for c in fresh["evidence"]])
