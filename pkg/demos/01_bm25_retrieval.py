"""
Retrieving verified claims with BM25
====================================

"""

# The claim database: statement, truth label, and the fact-checking
# article's title and body.
from checkrank import Bm25Index, VerifiedClaim, tokenize

claims = (
    VerifiedClaim(
        "c-tax", "the tax plan cuts middle class taxes", "false",
        title="checking the tax plan",
        body="the plan raises taxes on most middle class households",
    ),
    VerifiedClaim(
        "c-jobs", "the state added a million jobs", "mostly-true",
        title="jobs numbers check out",
        body="employment grew by roughly a million jobs over the term",
    ),
    VerifiedClaim(
        "c-debt", "the national debt doubled", "half-true",
        title="debt arithmetic",
        body="gross debt grew but did not double over the period",
    ),
)

# Build one inverted index over all three claim fields.
index = Bm25Index(claims)

# Score a debate sentence against each field of one claim.
sentence = "My opponent's tax plan raises your taxes."
query = tokenize(sentence)
print("query tokens:", query)
for field in ("statement", "title", "body"):
    print(f"  {field:<10} c-tax ->", round(index.score(query, field, "c-tax"), 4))

# Retrieval ranks the whole database for one field; zero-score claims
# are dropped, ties break on claim id.
print("\ntop matches on body:")
for cid, s in index.retrieve(query, "body", 5):
    print(f"  {cid:<7} {s:.4f}")
