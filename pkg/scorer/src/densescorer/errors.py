"""Scorer failures; every ScorerError maps to CLI exit code 1."""


class ScorerError(Exception):
    """Bad configuration, unresolvable references, or a failed score job."""
