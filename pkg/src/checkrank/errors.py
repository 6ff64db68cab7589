"""Exception hierarchy shared across the package.

Every CheckrankError maps to CLI exit code 1; OS-level failures map to 2.
"""

from __future__ import annotations


class CheckrankError(Exception):
    """Base class for all checkrank errors."""


class ValidationError(CheckrankError):
    """Bad input data: malformed files, broken invariants, dangling references."""


class ParseError(ValidationError):
    """A line of an input file could not be parsed; carries file and line number."""

    def __init__(self, path: str, lineno: int, message: str):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = path
        self.lineno = lineno


class MissingScoreError(ValidationError):
    """A dense score required in strict mode is absent from the score table."""

    def __init__(self, sentence_id: str, claim_id: str, metric: str):
        super().__init__(
            f"missing dense score for pair ({sentence_id}, {claim_id}), metric {metric}"
        )
        self.sentence_id = sentence_id
        self.claim_id = claim_id
        self.metric = metric


class CoverageError(ValidationError):
    """The score table does not cover every candidate pair; carries the gap list."""

    def __init__(self, missing: list[tuple[str, str, str]]):
        preview = ", ".join(f"({s}, {c}, {m})" for s, c, m in missing[:5])
        more = "" if len(missing) <= 5 else f" and {len(missing) - 5} more"
        super().__init__(f"{len(missing)} (pair, metric) entries uncovered: {preview}{more}")
        self.missing = missing


class UndefinedMetricError(CheckrankError):
    """AP is undefined for this unit (no relevant items); excluded from means."""
