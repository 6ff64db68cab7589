"""Deterministic, dependency-free scoring backends selected by model id.

Each backend family implements one slice of the score file: hashed
character n-gram embeddings stand in for the two sentence-embedding
models, a token-overlap softmax for the NLI head, and token-level F1
for the BERTScore slot. Transformer checkpoints can be swapped in by
registering new identifiers; the output contract stays the same.
"""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import ScorerError

_TOKEN = re.compile(r"[^\W_]+", re.UNICODE)

NEGATIONS = frozenset({"not", "no", "never", "none", "nobody", "nothing", "nor"})

# identifier grammar per role
_EMBED_FAMILY = "hash-ngram-v1"
_NLI_FAMILY = "token-overlap-nli-v1"
_BERTSCORE_FAMILY = "token-f1-v1"

ROLES = ("nli", "bertscore", "sbert", "simcse")


def tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text.lower())


def _ngrams(text: str, lo: int = 3, hi: int = 5):
    padded = f" {' '.join(tokenize(text))} "
    for n in range(lo, hi + 1):
        for i in range(len(padded) - n + 1):
            yield padded[i:i + n]


def embed(text: str, salt: str, dim: int) -> np.ndarray:
    """Hashed character n-gram counts; same text and salt, same vector."""
    vec = np.zeros(dim)
    for gram in _ngrams(text):
        digest = hashlib.blake2b(
            gram.encode("utf-8"), key=salt.encode("utf-8")[:64], digest_size=8
        ).digest()
        vec[int.from_bytes(digest, "big") % dim] += 1.0
    return vec


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def nli_posteriors(premise: str, hypothesis: str) -> tuple[float, float, float]:
    """(entail, neutral, contradict) from token overlap; sums to 1 by softmax."""
    p, h = set(tokenize(premise)), set(tokenize(hypothesis))
    overlap = len(p & h) / len(h) if h else 0.0
    negation_flip = (bool(p & NEGATIONS) != bool(h & NEGATIONS))
    entail = 3.0 * overlap - (2.5 if negation_flip else 0.0)
    contradict = 2.0 * overlap if negation_flip else overlap - 1.0
    neutral = 1.0
    exps = [math.exp(z) for z in (entail, neutral, contradict)]
    total = sum(exps)
    return (exps[0] / total, exps[1] / total, exps[2] / total)


def bertscore_f1(candidate: str, reference: str) -> float:
    """Token-level F1 over multisets; empty sides score 0."""
    cand, ref = tokenize(candidate), tokenize(reference)
    if not cand or not ref:
        return 0.0
    counts: dict[str, int] = {}
    for t in ref:
        counts[t] = counts.get(t, 0) + 1
    matched = 0
    for t in cand:
        if counts.get(t, 0) > 0:
            counts[t] -= 1
            matched += 1
    if matched == 0:
        return 0.0
    precision = matched / len(cand)
    recall = matched / len(ref)
    return 2.0 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class ModelBank:
    """Resolved backends for the four model roles."""

    nli: str
    bertscore: str
    sbert_salt: str
    sbert_dim: int
    simcse_salt: str
    simcse_dim: int
    identifiers: dict

    @classmethod
    def from_config(cls, models: dict) -> "ModelBank":
        for role in ROLES:
            if role not in models:
                raise ScorerError(f"missing model identifier for role {role!r}")
        nli = models["nli"]
        if nli != _NLI_FAMILY:
            raise ScorerError(f"unknown NLI model {nli!r}")
        bert = models["bertscore"]
        if bert != _BERTSCORE_FAMILY:
            raise ScorerError(f"unknown BERTScore model {bert!r}")
        salts, dims = {}, {}
        for role in ("sbert", "simcse"):
            ident = models[role]
            family, _, rest = ident.partition(":")
            salt, _, dim = rest.partition(":")
            if family != _EMBED_FAMILY or not salt or not dim.isdigit() or int(dim) < 1:
                raise ScorerError(
                    f"unknown embedding model {ident!r} "
                    f"(expected {_EMBED_FAMILY}:<salt>:<dim>)"
                )
            salts[role], dims[role] = salt, int(dim)
        return cls(
            nli=nli, bertscore=bert,
            sbert_salt=salts["sbert"], sbert_dim=dims["sbert"],
            simcse_salt=salts["simcse"], simcse_dim=dims["simcse"],
            identifiers=dict(models),
        )
