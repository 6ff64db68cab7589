"""
Evidence-aware average precision
================================

"""

# A ranking is judged twice over: a sentence must be relevant (some
# gold claim verifies it) AND its attached evidence must actually
# contain such a claim within the top r ("hit").
from checkrank import RankedSentence, RankingRun, run_credits
from checkrank.metrics import SentenceCredit, ap_graded, ap_hit_only, average_precision

run = RankingRun("t1", (
    RankedSentence("t1-s0", 3.0, evidence=("c9", "c2")),
    RankedSentence("t1-s1", 2.0, evidence=("c5",)),
    RankedSentence("t1-s2", 1.0, evidence=("c7",)),
))
gold = {"t1-s0": {"c2"}, "t1-s1": {"c8"}}

# At r=1 only the top evidence slot counts, so s0 misses (c9 sits
# above c2); at r=2 it hits.
for r in (1, 2):
    credits = run_credits(run, gold, r)
    print(f"r={r}:", [(c.relevant, c.evidence_hit) for c in credits])

# The worked example: relevant+hit, relevant+miss, non-relevant.
triple = (
    SentenceCredit(True, True),
    SentenceCredit(True, False),
    SentenceCredit(False, False),
)
print("\nAP        :", average_precision(triple))   # classic: misses still count
print("AP_0      :", ap_graded(triple, 0.0))        # miss credits nothing
print("AP_0.5    :", ap_graded(triple, 0.5))        # miss credits half
print("AP_H      :", ap_hit_only(triple))           # only hits are relevant

# Whatever the ranking, the variants are ordered
#   AP_H <= AP_0 <= AP_0.5 <= AP,
# with equality when every relevant sentence is a hit.
all_hits = tuple(SentenceCredit(c.relevant, c.relevant) for c in triple)
print("\nall-hit run collapses the family:",
      ap_hit_only(all_hits) == ap_graded(all_hits, 0.0) == average_precision(all_hits))
