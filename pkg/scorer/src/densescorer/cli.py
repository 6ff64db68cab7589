"""densescorer: score pair manifests and validate score-file coverage.

    densescorer score    --manifest m.jsonl --claims c.jsonl \
                         --transcripts t.jsonl --out scores.jsonl \
                         --models models.json
    densescorer validate --manifest m.jsonl --scores scores.jsonl

Exit codes: 0 success / complete coverage, 1 scorer errors or coverage
gaps, 2 OS-level failures.
"""

from __future__ import annotations

import argparse
import json
import sys

from .coverage import validate_coverage
from .errors import ScorerError
from .score import ScoreJob, score_pairs


def _cmd_score(args) -> int:
    try:
        with open(args.models, encoding="utf-8") as fh:
            models = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ScorerError(f"{args.models}: not valid JSON: {exc.msg}") from exc
    if not isinstance(models, dict):
        raise ScorerError(f"{args.models}: models config must be a JSON object")
    meta = score_pairs(ScoreJob(
        manifest=args.manifest,
        claims=args.claims,
        transcripts=args.transcripts,
        out=args.out,
        models=models,
        batch_size=args.batch_size,
        device=args.device,
    ))
    print(f"scored {meta['n_pairs']} pairs ({meta['n_records']} records) -> {args.out}")
    return 0


def _cmd_validate(args) -> int:
    report = validate_coverage(args.manifest, args.scores)
    for line in report.lines():
        print(line)
    return 0 if report.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="densescorer",
        description="Dense similarity scores for a checkrank pair manifest.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score every pair in the manifest")
    p.add_argument("--manifest", required=True, help="pair manifest JSONL")
    p.add_argument("--claims", required=True, help="claims.jsonl path")
    p.add_argument("--transcripts", required=True, help="transcript.jsonl path")
    p.add_argument("--out", required=True, help="scores.jsonl output path")
    p.add_argument("--models", required=True, help="JSON file of model identifiers")
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--device", default="cpu", help="device hint (recorded in meta)")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("validate", help="report missing or duplicated records")
    p.add_argument("--manifest", required=True, help="pair manifest JSONL")
    p.add_argument("--scores", required=True, help="scores.jsonl to check")
    p.set_defaults(func=_cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScorerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
