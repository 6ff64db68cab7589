"""Field-scoped Okapi BM25 inverted index over the claim database.

Each claim is indexed independently per field (statement, title, body).
The index is write-once: built from a claim list, then read-only, so
concurrent queries need no locking.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import VerifiedClaim
from .errors import ValidationError

FIELDS = ("statement", "title", "body")

SNAPSHOT_VERSION = 1

# Word characters minus underscore: lowercase, split on any non-alphanumeric.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric characters; no stemming, no stopwords."""
    return _TOKEN_RE.findall(text.lower())


def idf(n_docs: int, df: int) -> float:
    """ln(1 + (N - df + 0.5) / (df + 0.5)); non-negative for all df <= N."""
    return math.log(1.0 + (n_docs - df + 0.5) / (df + 0.5))


@dataclass
class _FieldIndex:
    postings: dict[str, list[tuple[int, int]]]  # term -> [(doc ordinal, tf)], ordinal-sorted
    doc_lengths: list[int]
    avg_length: float

    def __post_init__(self):
        # Derived inverse view for O(1) point lookups; not serialized.
        self.tf_by_doc: list[dict[str, int]] = [{} for _ in self.doc_lengths]
        for term, plist in self.postings.items():
            for ordinal, tf in plist:
                self.tf_by_doc[ordinal][term] = tf


class Bm25Index:
    """Okapi BM25 over three claim fields with tf saturation k1 and length norm b."""

    def __init__(self, claims: Sequence[VerifiedClaim], k1: float = 1.2, b: float = 0.75):
        if not claims:
            raise ValidationError("cannot build an index over an empty claim list")
        self.k1 = float(k1)
        self.b = float(b)
        self.claim_ids = [c.claim_id for c in claims]
        self._ordinal = {cid: i for i, cid in enumerate(self.claim_ids)}
        self.n_docs = len(claims)
        self.fields: dict[str, _FieldIndex] = {}
        for field_id in FIELDS:
            postings: dict[str, list[tuple[int, int]]] = {}
            lengths: list[int] = []
            for ordinal, claim in enumerate(claims):
                tokens = tokenize(claim.field_text(field_id))
                lengths.append(len(tokens))
                for term, tf in sorted(Counter(tokens).items()):
                    postings.setdefault(term, []).append((ordinal, tf))
            avg = sum(lengths) / len(lengths)
            self.fields[field_id] = _FieldIndex(postings, lengths, avg)

    def _field(self, field_id: str) -> _FieldIndex:
        try:
            return self.fields[field_id]
        except KeyError:
            raise ValidationError(f"unknown field: {field_id!r}") from None

    def df(self, term: str, field_id: str) -> int:
        return len(self._field(field_id).postings.get(term, ()))

    def _term_weight(self, fi: _FieldIndex, term: str, tf: int, doc_len: int) -> float:
        df = len(fi.postings[term])
        norm = self.k1 * (1.0 - self.b + self.b * doc_len / fi.avg_length)
        return idf(self.n_docs, df) * (tf * (self.k1 + 1.0)) / (tf + norm)

    def score(self, query: Iterable[str], field_id: str, claim_id: str) -> float:
        """BM25 point score of one claim's field against a token stream.

        Query terms absent from the field contribute 0; repeated query terms
        contribute once per occurrence.
        """
        fi = self._field(field_id)
        if claim_id not in self._ordinal:
            raise ValidationError(f"unknown claim_id: {claim_id!r}")
        ordinal = self._ordinal[claim_id]
        doc_len = fi.doc_lengths[ordinal]
        if fi.avg_length == 0.0:
            return 0.0
        tf_map = fi.tf_by_doc[ordinal]
        total = 0.0
        for term in query:
            tf = tf_map.get(term, 0)
            if tf == 0:
                continue
            total += self._term_weight(fi, term, tf, doc_len)
        return total

    def retrieve(self, query: Iterable[str], field_id: str, k: int) -> list[tuple[str, float]]:
        """Top-k claims by descending score; ties by ascending claim_id.

        Zero-score claims carry no ranking information and are never returned,
        so the result holds min(k, #claims with score > 0) entries.
        """
        if k < 1:
            raise ValidationError(f"k must be >= 1, got {k}")
        fi = self._field(field_id)
        if fi.avg_length == 0.0:
            return []
        acc: dict[int, float] = {}
        for term in query:
            plist = fi.postings.get(term)
            if not plist:
                continue
            for ordinal, tf in plist:
                w = self._term_weight(fi, term, tf, fi.doc_lengths[ordinal])
                acc[ordinal] = acc.get(ordinal, 0.0) + w
        scored = [
            (self.claim_ids[ordinal], s) for ordinal, s in acc.items() if s > 0.0
        ]
        scored.sort(key=lambda pair: (-pair[1], pair[0]))
        return scored[:k]

    def to_dict(self) -> dict:
        return {
            "version": SNAPSHOT_VERSION,
            "k1": self.k1,
            "b": self.b,
            "claim_ids": self.claim_ids,
            "fields": {
                fid: {
                    "doc_lengths": fi.doc_lengths,
                    "avg_length": fi.avg_length,
                    "postings": {t: [[d, f] for d, f in pl] for t, pl in fi.postings.items()},
                }
                for fid, fi in self.fields.items()
            },
        }

    def save(self, path: str) -> None:
        """Write a versioned snapshot; loading it reproduces the index bit-for-bit."""
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True)

    @classmethod
    def load(cls, path: str) -> "Bm25Index":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if data.get("version") != SNAPSHOT_VERSION:
            raise ValidationError(
                f"index snapshot version {data.get('version')!r} unsupported "
                f"(expected {SNAPSHOT_VERSION})"
            )
        index = cls.__new__(cls)
        index.k1 = float(data["k1"])
        index.b = float(data["b"])
        index.claim_ids = list(data["claim_ids"])
        index._ordinal = {cid: i for i, cid in enumerate(index.claim_ids)}
        index.n_docs = len(index.claim_ids)
        index.fields = {}
        for fid, f in data["fields"].items():
            postings = {
                t: [(int(d), int(tf)) for d, tf in pl] for t, pl in f["postings"].items()
            }
            index.fields[fid] = _FieldIndex(postings, list(f["doc_lengths"]), float(f["avg_length"]))
        return index

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Bm25Index):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def build_index(claims: Sequence[VerifiedClaim], k1: float = 1.2, b: float = 0.75) -> Bm25Index:
    """Index all three fields of every claim; the result is immutable."""
    return Bm25Index(claims, k1=k1, b=b)
