"""
Pair features and sentence-vector pooling
=========================================

"""

# A synthetic, fully scored corpus stands in for real data: every
# (sentence, claim) pair already has its dense similarity records.
from checkrank import SLOT_NAMES, assemble_pair, build_index, candidates
from checkrank.features import filter_half_true, pool_concat, pool_max
from checkrank.synth import make_corpus

corpus = make_corpus(n_transcripts=1, n_sentences=8, n_relevant=2,
                     n_extra_claims=8, pool=5, seed=7)
index = build_index(corpus.claims)
claims_by_id = corpus.claims_by_id

# Take one sentence and its BM25-on-body candidate pool.
sentence = corpus.transcripts[0].sentences[0]
pool = candidates(sentence, index, 5)
print("sentence:", sentence.text)
print("candidates:", pool)

# Each pair becomes a 19-slot vector: 3 BM25 fields, 3 NLI
# probabilities, BERTScore, and the SBERT/SimCSE similarity slots.
pairs = [
    assemble_pair(sentence, claims_by_id[cid], index, corpus.scores)
    for cid in pool
]
top = pairs[0]
print("\nslots of the top pair:")
for name, value in zip(SLOT_NAMES, top.values):
    print(f"  {name:<16} {value:.4f}")

# Three pooling strategies turn the pair list into one sentence vector.
# Concatenation takes exactly the top-n blocks; max pooling slices
# the top n itself.
n = 3
concat = pool_concat(sentence.sentence_id, pairs[:n], n)
pooled = pool_max(sentence.sentence_id, pairs, n)
print("\nconcat dims:", concat.values.shape[0], "(19 x", str(n) + ")")
print("max dims:   ", pooled.values.shape[0])

# Skipping drops candidates whose claim is labeled half-true before
# pooling; the survivors keep their retrieval order.
kept = filter_half_true(pairs, claims_by_id)
skipped = pool_max(sentence.sentence_id, kept, n, strategy="max-skip")
dropped = [(i, p.claim_id) for i, p in enumerate(pairs) if p not in kept]
print("half-true dropped (rank, claim):", dropped or "none")
# A drop below rank n leaves the pooled vector untouched; a drop inside
# the top n lets the next candidate take its slot.
print("max-skip vector equals plain max:", bool((pooled.values == skipped.values).all()))
