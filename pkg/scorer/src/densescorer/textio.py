"""Readers for the manifest/corpus files and the atomic score writer."""

from __future__ import annotations

import json
import os
import re
import tempfile
from typing import Iterable, Iterator

from .errors import ScorerError

_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+")

# recorded in the output meta file for provenance
SEGMENTATION_RULE = "split on sentence-final punctuation [.!?] followed by whitespace"


def split_sentences(body: str) -> list[str]:
    """Body segmentation for top-4 scoring; empty segments are dropped."""
    return [seg for seg in _SENTENCE_SPLIT.split(body) if seg.strip()]


def _read_jsonl(path: str) -> Iterator[tuple[int, dict]]:
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise ScorerError(f"cannot read {path}: {exc.strerror}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ScorerError(f"{path}:{lineno}: malformed JSON: {exc.msg}") from exc
            if not isinstance(obj, dict):
                raise ScorerError(f"{path}:{lineno}: record is not a JSON object")
            yield lineno, obj


def _field(obj: dict, key: str, path: str, lineno: int) -> str:
    if key not in obj:
        raise ScorerError(f"{path}:{lineno}: missing field {key!r}")
    return str(obj[key])


def read_manifest(path: str) -> list[tuple[str, str]]:
    """(sentence_id, claim_id) pairs in file order."""
    return [
        (_field(obj, "sentence_id", path, lineno), _field(obj, "claim_id", path, lineno))
        for lineno, obj in _read_jsonl(path)
    ]


def read_claims(path: str) -> dict[str, dict]:
    """claim_id -> {statement, title, body}."""
    claims: dict[str, dict] = {}
    for lineno, obj in _read_jsonl(path):
        cid = _field(obj, "claim_id", path, lineno)
        claims[cid] = {
            "statement": _field(obj, "statement", path, lineno),
            "title": _field(obj, "title", path, lineno),
            "body": _field(obj, "body", path, lineno),
        }
    return claims


def read_sentences(path: str) -> dict[str, str]:
    """sentence_id -> text; transcript header lines are skipped."""
    sentences: dict[str, str] = {}
    for lineno, obj in _read_jsonl(path):
        if "sentence_id" not in obj:
            continue
        sentences[str(obj["sentence_id"])] = _field(obj, "text", path, lineno)
    return sentences


def write_jsonl_atomic(path: str, records: Iterable[dict]) -> int:
    """Write all records to a temp file, fsync, then rename over path."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".densescorer-", suffix=".tmp")
    count = 0
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            for rec in records:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
                count += 1
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
    return count
