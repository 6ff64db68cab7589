"""Data model, validation and JSON-lines persistence for the claim-matching corpus.

Four file kinds, one record per line, UTF-8:

* ``claims.jsonl``     -- the database of previously fact-checked claims
* ``transcript.jsonl`` -- pre-segmented document sentences (plus optional
  transcript header lines carrying an event date)
* ``gold.jsonl``       -- annotated (sentence, claim) pairs with stance/verdict
* ``scores.jsonl``     -- externally computed dense similarity scores

Loaded corpora are immutable after validation and safe for concurrent reads.
"""

from __future__ import annotations

import datetime
import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .errors import MissingScoreError, ParseError, ValidationError

TRUTH_VALUES = (
    "pants-on-fire",
    "false",
    "mostly-false",
    "half-true",
    "mostly-true",
    "true",
)

STANCES = ("agree", "disagree", "unrelated", "not-claim")
VERDICTS = ("true", "false", "unknown", "not-claim")

# Verdicts that make an input sentence count as verifiable/relevant.
RELEVANT_VERDICTS = ("true", "false")

METRICS = (
    "nli_entail",
    "nli_neutral",
    "nli_contradict",
    "bertscore_f1",
    "sbert_statement",
    "sbert_title",
    "sbert_body_top",
    "simcse_statement",
    "simcse_title",
    "simcse_body_top",
)

NLI_METRICS = ("nli_entail", "nli_neutral", "nli_contradict")
BODY_TOP_METRICS = ("sbert_body_top", "simcse_body_top")
NLI_SIMPLEX_TOL = 1e-4

_PUNCT_RE = re.compile(r"[^a-z0-9]+")


def normalize_truth_value(raw: str) -> str:
    """Map a surface truth label ("Pants on Fire!", "Mostly--False", ...) onto the enum.

    Case-insensitive and punctuation-stripped; unmapped strings raise, never guess.
    """
    key = _PUNCT_RE.sub("", raw.lower())
    table = {
        "pantsonfire": "pants-on-fire",
        "false": "false",
        "mostlyfalse": "mostly-false",
        "halftrue": "half-true",
        "mostlytrue": "mostly-true",
        "true": "true",
    }
    if key not in table:
        raise ValidationError(f"unknown truth value: {raw!r}")
    return table[key]


def _normalize_label(raw: str, allowed: tuple[str, ...], kind: str) -> str:
    # Accepts case and dash variants ("not–claim" with an en dash, "Not-Claim").
    key = _PUNCT_RE.sub("-", raw.lower()).strip("-")
    if key not in allowed:
        raise ValidationError(f"unknown {kind} label: {raw!r}")
    return key


def _parse_date(raw: str) -> datetime.date:
    try:
        return datetime.date.fromisoformat(raw)
    except ValueError as exc:
        raise ValidationError(f"bad ISO-8601 date: {raw!r}") from exc


@dataclass(frozen=True)
class VerifiedClaim:
    """One database entry: normalized claim statement plus its fact-checking article."""

    claim_id: str
    statement: str
    truth_value: str
    title: str
    body: str
    speaker: str | None = None
    date: datetime.date | None = None

    def __post_init__(self):
        if not self.claim_id:
            raise ValidationError("claim_id must be non-empty")
        if not self.statement.strip():
            raise ValidationError(f"claim {self.claim_id}: statement is empty")
        if self.truth_value not in TRUTH_VALUES:
            raise ValidationError(
                f"claim {self.claim_id}: truth_value {self.truth_value!r} not in {TRUTH_VALUES}"
            )

    def field_text(self, field_id: str) -> str:
        if field_id == "statement":
            return self.statement
        if field_id == "title":
            return self.title
        if field_id == "body":
            return self.body
        raise ValidationError(f"unknown field: {field_id!r}")


@dataclass(frozen=True)
class SentenceRec:
    """One identified sentence of an input document."""

    sentence_id: str
    transcript_id: str
    index: int
    text: str
    speaker: str | None = None

    def __post_init__(self):
        if self.index < 0:
            raise ValidationError(f"sentence {self.sentence_id}: negative index")
        if not self.text.strip():
            raise ValidationError(f"sentence {self.sentence_id}: empty sentence")


@dataclass(frozen=True)
class TranscriptDoc:
    """An input document as an ordered, contiguously indexed sentence list."""

    transcript_id: str
    sentences: tuple[SentenceRec, ...]
    event_date: datetime.date | None = None

    def __post_init__(self):
        if not self.sentences:
            raise ValidationError(f"transcript {self.transcript_id}: empty document")
        for pos, sent in enumerate(self.sentences):
            if sent.transcript_id != self.transcript_id:
                raise ValidationError(
                    f"sentence {sent.sentence_id} belongs to {sent.transcript_id}, "
                    f"not {self.transcript_id}"
                )
            if sent.index != pos:
                raise ValidationError(
                    f"transcript {self.transcript_id}: index gap at {pos}"
                )

    def __len__(self) -> int:
        return len(self.sentences)


@dataclass(frozen=True)
class GoldPair:
    """Annotated (sentence, claim) pair: stance plus the verifiability verdict."""

    sentence_id: str
    claim_id: str
    stance: str
    verdict: str

    def __post_init__(self):
        if self.stance not in STANCES:
            raise ValidationError(f"unknown stance label: {self.stance!r}")
        if self.verdict not in VERDICTS:
            raise ValidationError(f"unknown verdict label: {self.verdict!r}")


@dataclass(frozen=True)
class DenseScoreRecord:
    """Externally computed scores for one (sentence, claim, metric) triple."""

    sentence_id: str
    claim_id: str
    metric: str
    values: tuple[float, ...]

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ValidationError(f"unknown metric: {self.metric!r}")
        n = len(self.values)
        if self.metric in BODY_TOP_METRICS:
            if not 1 <= n <= 4:
                raise ValidationError(
                    f"{self.metric} carries 1..4 values, got {n} "
                    f"for pair ({self.sentence_id}, {self.claim_id})"
                )
            for a, b in zip(self.values, self.values[1:]):
                if b > a:
                    raise ValidationError(
                        f"{self.metric} values not non-increasing for pair "
                        f"({self.sentence_id}, {self.claim_id}): {list(self.values)}"
                    )
        elif n != 1:
            raise ValidationError(
                f"{self.metric} carries exactly 1 value, got {n} "
                f"for pair ({self.sentence_id}, {self.claim_id})"
            )
        if self.metric in NLI_METRICS:
            v = self.values[0]
            if not 0.0 <= v <= 1.0:
                raise ValidationError(
                    f"{self.metric} value {v} outside [0, 1] for pair "
                    f"({self.sentence_id}, {self.claim_id})"
                )


def _read_jsonl(path: str) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(path, lineno, f"malformed JSON: {exc.msg}") from exc
            if not isinstance(obj, dict):
                raise ParseError(path, lineno, "record is not a JSON object")
            yield lineno, obj


def _write_jsonl(path: str, records: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def _require(obj: dict, key: str, path: str, lineno: int):
    if key not in obj:
        raise ParseError(path, lineno, f"missing field {key!r}")
    return obj[key]


def load_claims(path: str) -> list[VerifiedClaim]:
    """Parse and validate claims.jsonl; order follows the file."""
    claims: list[VerifiedClaim] = []
    seen: dict[str, int] = {}
    for lineno, obj in _read_jsonl(path):
        try:
            claim = VerifiedClaim(
                claim_id=str(_require(obj, "claim_id", path, lineno)),
                statement=str(_require(obj, "statement", path, lineno)),
                truth_value=normalize_truth_value(str(_require(obj, "truth_value", path, lineno))),
                title=str(_require(obj, "title", path, lineno)),
                body=str(_require(obj, "body", path, lineno)),
                speaker=obj.get("speaker"),
                date=_parse_date(obj["date"]) if obj.get("date") else None,
            )
        except ParseError:
            raise
        except ValidationError as exc:
            raise ParseError(path, lineno, str(exc)) from exc
        if claim.claim_id in seen:
            raise ParseError(
                path, lineno,
                f"duplicate claim_id {claim.claim_id!r} (first seen on line {seen[claim.claim_id]})",
            )
        seen[claim.claim_id] = lineno
        claims.append(claim)
    return claims


def save_claims(claims: Iterable[VerifiedClaim], path: str) -> None:
    def rec(c: VerifiedClaim) -> dict:
        out = {
            "claim_id": c.claim_id,
            "statement": c.statement,
            "truth_value": c.truth_value,
            "title": c.title,
            "body": c.body,
        }
        if c.speaker is not None:
            out["speaker"] = c.speaker
        if c.date is not None:
            out["date"] = c.date.isoformat()
        return out

    _write_jsonl(path, (rec(c) for c in claims))


def load_transcripts(path: str) -> list[TranscriptDoc]:
    """Parse transcript.jsonl into one TranscriptDoc per transcript_id.

    Lines with a ``sentence_id`` are sentence records; lines without are
    transcript headers (optional ``event_date``). Sentences are ordered by
    their stored index, which must be contiguous from 0.
    """
    sentences: dict[str, list[SentenceRec]] = {}
    headers: dict[str, datetime.date | None] = {}
    order: list[str] = []
    seen_sentence_ids: dict[str, int] = {}
    for lineno, obj in _read_jsonl(path):
        tid = str(_require(obj, "transcript_id", path, lineno))
        if "sentence_id" not in obj:
            date = _parse_date(obj["event_date"]) if obj.get("event_date") else None
            if tid not in headers and tid not in sentences:
                order.append(tid)
            headers[tid] = date
            continue
        try:
            sent = SentenceRec(
                sentence_id=str(obj["sentence_id"]),
                transcript_id=tid,
                index=int(_require(obj, "index", path, lineno)),
                text=str(_require(obj, "text", path, lineno)),
                speaker=obj.get("speaker"),
            )
        except ParseError:
            raise
        except (ValidationError, ValueError) as exc:
            raise ParseError(path, lineno, str(exc)) from exc
        if sent.sentence_id in seen_sentence_ids:
            raise ParseError(
                path, lineno,
                f"duplicate sentence_id {sent.sentence_id!r} "
                f"(first seen on line {seen_sentence_ids[sent.sentence_id]})",
            )
        seen_sentence_ids[sent.sentence_id] = lineno
        if tid not in sentences and tid not in headers:
            order.append(tid)
        sentences.setdefault(tid, []).append(sent)

    docs = []
    for tid in order:
        recs = sorted(sentences.get(tid, []), key=lambda s: s.index)
        indices = [s.index for s in recs]
        for pos, idx in enumerate(indices):
            if idx != pos:
                if idx > pos and pos not in indices:
                    raise ValidationError(f"transcript {tid}: index gap at {pos}")
                raise ValidationError(f"transcript {tid}: duplicate index {idx}")
        docs.append(TranscriptDoc(tid, tuple(recs), event_date=headers.get(tid)))
    return docs


def load_transcript(path: str) -> TranscriptDoc:
    """Load a file holding exactly one transcript."""
    docs = load_transcripts(path)
    if len(docs) != 1:
        raise ValidationError(
            f"{path}: expected a single transcript, found {len(docs)}"
        )
    return docs[0]


def save_transcripts(docs: Iterable[TranscriptDoc], path: str) -> None:
    def lines():
        for doc in docs:
            header = {"transcript_id": doc.transcript_id}
            if doc.event_date is not None:
                header["event_date"] = doc.event_date.isoformat()
            yield header
            for s in doc.sentences:
                rec = {
                    "sentence_id": s.sentence_id,
                    "transcript_id": s.transcript_id,
                    "index": s.index,
                    "text": s.text,
                }
                if s.speaker is not None:
                    rec["speaker"] = s.speaker
                yield rec

    _write_jsonl(path, lines())


def load_gold(
    path: str,
    sentence_ids: set[str] | None = None,
    claim_ids: set[str] | None = None,
) -> list[GoldPair]:
    """Parse gold.jsonl; reject dangling references when id sets are supplied."""
    pairs: list[GoldPair] = []
    seen: dict[tuple[str, str], int] = {}
    for lineno, obj in _read_jsonl(path):
        try:
            pair = GoldPair(
                sentence_id=str(_require(obj, "sentence_id", path, lineno)),
                claim_id=str(_require(obj, "claim_id", path, lineno)),
                stance=_normalize_label(str(_require(obj, "stance", path, lineno)), STANCES, "stance"),
                verdict=_normalize_label(str(_require(obj, "verdict", path, lineno)), VERDICTS, "verdict"),
            )
        except ParseError:
            raise
        except ValidationError as exc:
            raise ParseError(path, lineno, str(exc)) from exc
        key = (pair.sentence_id, pair.claim_id)
        if key in seen:
            raise ParseError(path, lineno, f"duplicate gold pair {key} (first seen on line {seen[key]})")
        seen[key] = lineno
        if sentence_ids is not None and pair.sentence_id not in sentence_ids:
            raise ParseError(path, lineno, f"unknown sentence_id {pair.sentence_id!r}")
        if claim_ids is not None and pair.claim_id not in claim_ids:
            raise ParseError(path, lineno, f"unknown claim_id {pair.claim_id!r}")
        pairs.append(pair)
    return pairs


def save_gold(pairs: Iterable[GoldPair], path: str) -> None:
    _write_jsonl(
        path,
        (
            {
                "sentence_id": p.sentence_id,
                "claim_id": p.claim_id,
                "stance": p.stance,
                "verdict": p.verdict,
            }
            for p in pairs
        ),
    )


class ScoreTable:
    """Dense scores keyed by (sentence_id, claim_id, metric); O(1) expected lookup.

    Strict lookups raise MissingScoreError; lenient lookups return zeros and
    count the misses (silent zeros would corrupt max-pooling, so the count is
    kept for logging).
    """

    def __init__(self, records: Iterable[DenseScoreRecord] = ()):
        self._table: dict[tuple[str, str, str], tuple[float, ...]] = {}
        self.lenient_misses = 0
        for rec in records:
            self._add(rec)
        self._check_simplex()

    def _add(self, rec: DenseScoreRecord) -> None:
        key = (rec.sentence_id, rec.claim_id, rec.metric)
        if key in self._table:
            raise ValidationError(f"duplicate score record for {key}")
        self._table[key] = rec.values

    def _check_simplex(self) -> None:
        pairs = {(s, c) for (s, c, m) in self._table if m in NLI_METRICS}
        for s, c in pairs:
            vals = []
            for m in NLI_METRICS:
                got = self._table.get((s, c, m))
                if got is None:
                    raise ValidationError(
                        f"pair ({s}, {c}): incomplete NLI triplet (missing {m})"
                    )
                vals.append(got[0])
            total = sum(vals)
            if abs(total - 1.0) > NLI_SIMPLEX_TOL:
                raise ValidationError(
                    f"pair ({s}, {c}): NLI triplet sums to {total}, not 1 +- {NLI_SIMPLEX_TOL}"
                )

    def __len__(self) -> int:
        return len(self._table)

    def __contains__(self, key: tuple[str, str, str]) -> bool:
        return key in self._table

    def keys(self):
        return self._table.keys()

    def has_pair(self, sentence_id: str, claim_id: str) -> bool:
        return any((sentence_id, claim_id, m) in self._table for m in METRICS)

    def pairs_for_sentence(self, sentence_id: str) -> list[str]:
        """Claim ids with at least one recorded metric for this sentence, sorted."""
        return sorted({c for (s, c, _m) in self._table if s == sentence_id})

    def lookup(
        self, sentence_id: str, claim_id: str, metric: str, lenient: bool = False
    ) -> tuple[float, ...]:
        got = self._table.get((sentence_id, claim_id, metric))
        if got is not None:
            return got
        if lenient:
            self.lenient_misses += 1
            return (0.0,)
        raise MissingScoreError(sentence_id, claim_id, metric)

    def records(self) -> list[DenseScoreRecord]:
        return [
            DenseScoreRecord(s, c, m, vals)
            for (s, c, m), vals in self._table.items()
        ]


def load_scores(
    path: str,
    sentence_ids: set[str] | None = None,
    claim_ids: set[str] | None = None,
) -> ScoreTable:
    """Parse scores.jsonl into a ScoreTable, validating every record invariant."""
    records = []
    for lineno, obj in _read_jsonl(path):
        try:
            values = obj.get("values")
            if not isinstance(values, list):
                raise ValidationError("field 'values' must be a list")
            rec = DenseScoreRecord(
                sentence_id=str(_require(obj, "sentence_id", path, lineno)),
                claim_id=str(_require(obj, "claim_id", path, lineno)),
                metric=str(_require(obj, "metric", path, lineno)),
                values=tuple(float(v) for v in values),
            )
        except ParseError:
            raise
        except (ValidationError, ValueError, TypeError) as exc:
            raise ParseError(path, lineno, str(exc)) from exc
        if sentence_ids is not None and rec.sentence_id not in sentence_ids:
            raise ParseError(path, lineno, f"unknown sentence_id {rec.sentence_id!r}")
        if claim_ids is not None and rec.claim_id not in claim_ids:
            raise ParseError(path, lineno, f"unknown claim_id {rec.claim_id!r}")
        records.append(rec)
    return ScoreTable(records)


def save_scores(table: ScoreTable, path: str) -> None:
    recs = sorted(table.records(), key=lambda r: (r.sentence_id, r.claim_id, r.metric))
    _write_jsonl(
        path,
        (
            {
                "sentence_id": r.sentence_id,
                "claim_id": r.claim_id,
                "metric": r.metric,
                "values": list(r.values),
            }
            for r in recs
        ),
    )


def sentence_relevance(
    transcript: TranscriptDoc, gold: Iterable[GoldPair]
) -> dict[str, bool]:
    """A sentence is relevant iff some gold pair gives it a true/false verdict."""
    verified = {
        p.sentence_id for p in gold if p.verdict in RELEVANT_VERDICTS
    }
    return {s.sentence_id: s.sentence_id in verified for s in transcript.sentences}


@dataclass
class Corpus:
    """A validated, immutable bundle of claims, transcripts, gold pairs and scores."""

    claims: tuple[VerifiedClaim, ...]
    transcripts: tuple[TranscriptDoc, ...]
    gold: tuple[GoldPair, ...]
    scores: ScoreTable = field(default_factory=ScoreTable)

    def __post_init__(self):
        self.claims_by_id: Mapping[str, VerifiedClaim] = {
            c.claim_id: c for c in self.claims
        }
        self.transcripts_by_id: Mapping[str, TranscriptDoc] = {
            t.transcript_id: t for t in self.transcripts
        }
        self.sentences_by_id: Mapping[str, SentenceRec] = {
            s.sentence_id: s for t in self.transcripts for s in t.sentences
        }
        self.check_references()

    def check_references(self) -> None:
        """Referential integrity: every gold pair and score names existing ids."""
        for p in self.gold:
            if p.sentence_id not in self.sentences_by_id:
                raise ValidationError(f"gold pair references unknown sentence {p.sentence_id!r}")
            if p.claim_id not in self.claims_by_id:
                raise ValidationError(f"gold pair references unknown claim {p.claim_id!r}")
        for (s, c, _m) in self.scores.keys():
            if s not in self.sentences_by_id:
                raise ValidationError(f"score record references unknown sentence {s!r}")
            if c not in self.claims_by_id:
                raise ValidationError(f"score record references unknown claim {c!r}")

    @classmethod
    def load(
        cls,
        claims_path: str,
        transcript_path: str,
        gold_path: str | None = None,
        scores_path: str | None = None,
    ) -> "Corpus":
        claims = load_claims(claims_path)
        transcripts = load_transcripts(transcript_path)
        claim_ids = {c.claim_id for c in claims}
        sentence_ids = {s.sentence_id for t in transcripts for s in t.sentences}
        gold = (
            load_gold(gold_path, sentence_ids, claim_ids) if gold_path else []
        )
        scores = (
            load_scores(scores_path, sentence_ids, claim_ids)
            if scores_path
            else ScoreTable()
        )
        return cls(tuple(claims), tuple(transcripts), tuple(gold), scores)

    def relevance(self) -> dict[str, bool]:
        """Relevance map for every sentence of every transcript."""
        out: dict[str, bool] = {}
        for t in self.transcripts:
            out.update(sentence_relevance(t, self.gold))
        return out
