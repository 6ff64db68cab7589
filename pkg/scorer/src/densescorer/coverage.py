"""Check a score file against the pair manifest it was meant to cover."""

from __future__ import annotations

from dataclasses import dataclass

from .score import METRICS
from .textio import _read_jsonl, read_manifest


@dataclass
class CoverageReport:
    """Missing (sentence, claim, metric) entries and duplicate-record conflicts."""

    missing: list[tuple[str, str, str]]
    conflicts: list[tuple[str, str, str]]
    n_pairs: int
    n_records: int

    @property
    def ok(self) -> bool:
        return not self.missing and not self.conflicts

    def lines(self) -> list[str]:
        out = [
            f"missing {sid}/{cid}/{metric}" for sid, cid, metric in self.missing
        ] + [
            f"conflict {sid}/{cid}/{metric} (duplicate record)"
            for sid, cid, metric in self.conflicts
        ]
        if not out:
            out = [f"complete: {self.n_pairs} pairs, {self.n_records} records"]
        return out


def validate_coverage(manifest_path: str, scores_path: str) -> CoverageReport:
    """Every manifest pair needs all 10 metrics exactly once."""
    pairs = read_manifest(manifest_path)
    seen: set[tuple[str, str, str]] = set()
    conflicts: list[tuple[str, str, str]] = []
    n_records = 0
    for lineno, obj in _read_jsonl(scores_path):
        key = (
            str(obj.get("sentence_id")),
            str(obj.get("claim_id")),
            str(obj.get("metric")),
        )
        n_records += 1
        if key in seen:
            conflicts.append(key)
        seen.add(key)
    missing = [
        (sid, cid, metric)
        for sid, cid in pairs
        for metric in METRICS
        if (sid, cid, metric) not in seen
    ]
    return CoverageReport(missing, conflicts, len(pairs), n_records)
