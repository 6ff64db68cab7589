"""
Training the pairwise ranker
============================

"""

# Train on a synthetic corpus where a handful of feature slots carry
# signal, then rank one transcript and inspect what surfaces.
from checkrank import (
    ExperimentConfig, SLOT_NAMES, Workspace, build_index, build_vectors,
    rank, sentence_relevance, train_full,
)
from checkrank.synth import PLANTED_SIGNS, make_corpus

corpus = make_corpus(n_transcripts=4, n_sentences=14, n_relevant=3,
                     n_extra_claims=12, pool=6, seed=21)
config = ExperimentConfig(claims="claims", transcripts="transcripts",
                          pool=6, n_candidates=3, strategy="max")
ws = Workspace(config, corpus, build_index(corpus.claims))

# One model over every transcript; fit() z-scores the vectors and runs
# subgradient descent on the hinge objective.
model = train_full(ws)
print("strategy:", model.strategy, "| dims:", model.weights.shape[0],
      "| C:", model.C)

# The planted slots come back with the planted signs.
print("\nlearned weights on the planted slots:")
for name, sign in sorted(PLANTED_SIGNS.items()):
    w = model.weights[SLOT_NAMES.index(name)]
    print(f"  {name:<16} {w:+.3f}   (planted {'+' if sign > 0 else '-'})")

# Rank one transcript; the evidence lists ride along unchanged.
doc = corpus.transcripts[0]
vectors = build_vectors(ws)[doc.transcript_id]
run = rank(model, doc.transcript_id, vectors)
relevant = sentence_relevance(doc, corpus.gold)
print(f"\ntop 5 of {doc.transcript_id}:")
for i, s in enumerate(run.sentences[:5], start=1):
    flag = "*" if relevant[s.sentence_id] else " "
    print(f"  {i}. {flag} {s.sentence_id}  score={s.score:+.3f}  evidence={s.evidence[:3]}")
print("(* = verifiable per the gold annotations)")
