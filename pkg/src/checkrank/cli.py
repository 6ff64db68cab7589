"""Command-line front end.

One subcommand per pipeline stage:

    ingest      validate corpus files and write normalized copies
    index       build and save the BM25 index snapshot
    candidates  emit candidate pools + the pair manifest to score
    features    emit pooled sentence vectors
    baselines   rank by each single-score baseline and report
    train       fit one model on the full corpus
    cv          leave-one-transcript-out evaluation (plus --grid/--ablations)
    eval        score an existing run file against gold
    report      re-render a report JSON as an aligned text table
    serve       start the read-only HTTP service

Config comes from --config (a JSON file) with individual flags overriding;
relative corpus paths resolve against --data-root or $CHECKRANK_DATA_ROOT.
Exit codes: 0 ok, 1 validation failure, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import pipeline
from .bm25 import build_index
from .corpus import Corpus, save_claims, save_gold, save_scores, save_transcripts
from .errors import CheckrankError, ValidationError
from .metrics import aggregate_metrics, load_runs, metric_columns, save_runs, transcript_metrics, verdict_claims
from .pipeline import ExperimentConfig, Workspace, load_workspace
from .ranksvm import save_model

ENV_DATA_ROOT = "CHECKRANK_DATA_ROOT"


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON experiment config file")
    p.add_argument("--data-root", help=f"base dir for relative paths (default ${ENV_DATA_ROOT})")
    p.add_argument("--claims", help="claims.jsonl path")
    p.add_argument("--transcripts", help="transcript.jsonl path")
    p.add_argument("--gold", help="gold.jsonl path")
    p.add_argument("--scores", help="scores.jsonl path")
    p.add_argument("--strategy", choices=pipeline.ALL_STRATEGIES)
    p.add_argument("--baseline", help="baseline slot name for strategy baseline-slot")
    p.add_argument("--n", type=int, dest="n_candidates", help="top-N candidates pooled")
    p.add_argument("--pool", type=int, help="candidate pool size (default 15)")
    p.add_argument("--r-values", help="evidence cutoffs, comma-separated (default 1,3)")
    p.add_argument("--c-grid", help="C grid, comma-separated (default 0.1,1,10)")
    p.add_argument("--epochs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--ablation", help="feature group to mask out")
    p.add_argument("--evidence-source", choices=pipeline.EVIDENCE_SOURCES)
    p.add_argument(
        "--skip-half-true-evidence", action="store_const", const=True, default=None
    )
    p.add_argument("--lenient", action="store_const", const=True, default=None)


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    """Merge config file, environment, and flag overrides into one config."""
    data: dict = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{args.config}: not valid JSON ({exc.msg})") from exc
        if not isinstance(data, dict):
            raise ValidationError(f"{args.config}: config must be a JSON object")
    overrides = {
        "claims": args.claims,
        "transcripts": args.transcripts,
        "gold": args.gold,
        "scores": args.scores,
        "strategy": args.strategy,
        "baseline": args.baseline,
        "n_candidates": args.n_candidates,
        "pool": args.pool,
        "epochs": args.epochs,
        "seed": args.seed,
        "ablation": args.ablation,
        "evidence_source": args.evidence_source,
        "skip_half_true_evidence": args.skip_half_true_evidence,
        "lenient": args.lenient,
    }
    if args.r_values:
        overrides["r_values"] = [int(v) for v in args.r_values.split(",")]
    if args.c_grid:
        overrides["c_grid"] = [float(v) for v in args.c_grid.split(",")]
    data.update({k: v for k, v in overrides.items() if v is not None})
    root = args.data_root or os.environ.get(ENV_DATA_ROOT)
    return ExperimentConfig.from_dict(data, data_root=root)


def _outdir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_ingest(args) -> int:
    cfg = build_config(args)
    corpus = Corpus.load(cfg.claims, cfg.transcripts, cfg.gold, cfg.scores)
    out = _outdir(args.out)
    save_claims(corpus.claims, str(out / "claims.jsonl"))
    save_transcripts(corpus.transcripts, str(out / "transcript.jsonl"))
    if cfg.gold:
        save_gold(corpus.gold, str(out / "gold.jsonl"))
    if cfg.scores:
        save_scores(corpus.scores, str(out / "scores.jsonl"))
    n_sentences = sum(len(t) for t in corpus.transcripts)
    n_relevant = sum(corpus.relevance().values())
    print(
        f"ingested {len(corpus.claims)} claims, {len(corpus.transcripts)} transcripts, "
        f"{n_sentences} sentences ({n_relevant} relevant), "
        f"{len(corpus.gold)} gold pairs, {len(corpus.scores)} score records -> {out}"
    )
    return 0


def cmd_index(args) -> int:
    cfg = build_config(args)
    corpus = Corpus.load(cfg.claims, cfg.transcripts)
    index = build_index(corpus.claims)
    index.save(args.out)
    print(f"indexed {len(corpus.claims)} claims -> {args.out}")
    return 0


def cmd_candidates(args) -> int:
    cfg = build_config(args)
    ws = load_workspace(cfg)
    cands = pipeline.generate_candidates(ws)
    pairs = pipeline.manifest_pairs(cands)
    pipeline.save_candidates(cands, args.out)
    if args.manifest:
        pipeline.save_manifest(pairs, args.manifest)
    print(f"{len(cands)} sentences x pool {cfg.pool} -> {len(pairs)} candidate pairs")
    return 0


def cmd_features(args) -> int:
    cfg = build_config(args)
    ws = load_workspace(cfg)
    pipeline.ensure_coverage(ws)
    vectors = pipeline.build_vectors(ws)
    with open(args.out, "w", encoding="utf-8") as fh:
        for doc in ws.corpus.transcripts:
            for vec in vectors[doc.transcript_id]:
                rec = {
                    "sentence_id": vec.sentence_id,
                    "transcript_id": doc.transcript_id,
                    "strategy": vec.strategy,
                    "n": vec.n_candidates,
                    "n_pooled": vec.n_pooled,
                    "values": [float(v) for v in vec.values],
                    "evidence": list(vec.evidence),
                }
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
    dims = len(next(iter(vectors.values()))[0].values) if vectors else 0
    print(f"wrote {sum(len(v) for v in vectors.values())} vectors ({dims} dims) -> {args.out}")
    return 0


def cmd_baselines(args) -> int:
    cfg = build_config(args)
    ws = load_workspace(cfg)
    block = pipeline.run_baselines(ws)
    report = {
        "columns": metric_columns(cfg.r_values),
        "blocks": [block],
        "config": cfg.to_dict(),
    }
    out = _outdir(args.out_dir)
    text = pipeline.emit_report(
        report, str(out / "report.json"), str(out / "report.txt")
    )
    if args.emit_runs:
        for name in [row["name"] for row in block["rows"]]:
            runs, _evidence = pipeline.baseline_runs(ws, name)
            save_runs(runs, str(out / f"runs-{name}.jsonl"))
    print(text)
    return 0


def cmd_train(args) -> int:
    cfg = build_config(args)
    ws = load_workspace(cfg)
    model = pipeline.train_full(ws)
    save_model(model, args.out)
    print(
        f"trained {model.strategy} top-{model.n_candidates} model "
        f"({model.dims} dims, C={model.C}) -> {args.out}"
    )
    return 0


def cmd_cv(args) -> int:
    cfg = build_config(args)
    ws = load_workspace(cfg)
    out = _outdir(args.out_dir)
    if args.grid:
        report = pipeline.run_table_grid(ws)
    elif args.ablations:
        report = pipeline.run_ablations(ws)
    else:
        result = pipeline.run_cv(ws)
        report = {
            "columns": metric_columns(cfg.r_values),
            "blocks": [
                {
                    "name": f"cv ({cfg.strategy}, top-{cfg.n_candidates})",
                    "rows": [
                        {
                            "name": f"top-{cfg.n_candidates}",
                            "n": cfg.n_candidates,
                            "metrics": result.aggregate,
                            "excluded": result.excluded,
                        }
                    ],
                }
            ],
            "config": cfg.to_dict(),
        }
        save_runs(result.runs(), str(out / "runs.jsonl"))
        with open(out / "folds.json", "w", encoding="utf-8") as fh:
            json.dump(pipeline.fold_summary(result), fh, sort_keys=True, indent=1)
            fh.write("\n")
        models_dir = _outdir(str(out / "models"))
        for fold in result.folds:
            save_model(fold.model, str(models_dir / f"fold-{fold.transcript_id}.json"))
    text = pipeline.emit_report(report, str(out / "report.json"), str(out / "report.txt"))
    print(text)
    return 0


def cmd_eval(args) -> int:
    cfg = build_config(args)
    corpus = Corpus.load(cfg.claims, cfg.transcripts, cfg.gold)
    runs = load_runs(args.runs)
    known = set(corpus.transcripts_by_id)
    for run in runs:
        if run.transcript_id not in known:
            raise ValidationError(f"run file references unknown transcript {run.transcript_id!r}")
    gold_claims = verdict_claims(corpus.gold)
    aggregate, excluded = aggregate_metrics(runs, gold_claims, cfg.r_values)
    per_transcript = {}
    for run in runs:
        try:
            per_transcript[run.transcript_id] = transcript_metrics(
                run, gold_claims, cfg.r_values
            )
        except CheckrankError:
            per_transcript[run.transcript_id] = None
    payload = {
        "aggregate": aggregate,
        "excluded_transcripts": excluded,
        "per_transcript": per_transcript,
        "columns": metric_columns(cfg.r_values),
    }
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True, indent=1)
            fh.write("\n")
    cols = metric_columns(cfg.r_values)
    print("  ".join(cols))
    print("  ".join(f"{aggregate[c]:.4f}" for c in cols))
    return 0


def cmd_report(args) -> int:
    with open(args.json, encoding="utf-8") as fh:
        try:
            report = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{args.json}: not valid JSON ({exc.msg})") from exc
    text = pipeline.emit_report(report, text_path=args.text)
    print(text)
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.data_dir, args.runs_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="checkrank",
        description="Rank document sentences by whether a fact-check already exists.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate corpus files, write normalized copies")
    _add_config_flags(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("index", help="build the BM25 index snapshot")
    _add_config_flags(p)
    p.add_argument("--out", required=True, help="index JSON path")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("candidates", help="emit candidate pools and the pair manifest")
    _add_config_flags(p)
    p.add_argument("--out", required=True, help="candidates JSONL path")
    p.add_argument("--manifest", help="pair manifest JSONL path")
    p.set_defaults(func=cmd_candidates)

    p = sub.add_parser("features", help="emit pooled sentence vectors")
    _add_config_flags(p)
    p.add_argument("--out", required=True, help="vectors JSONL path")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("baselines", help="rank by every single-score baseline")
    _add_config_flags(p)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--emit-runs", action="store_true", help="also write per-baseline run files")
    p.set_defaults(func=cmd_baselines)

    p = sub.add_parser("train", help="fit one model on the full corpus")
    _add_config_flags(p)
    p.add_argument("--out", required=True, help="model JSON path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("cv", help="leave-one-transcript-out evaluation")
    _add_config_flags(p)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--grid", action="store_true", help="full strategy x top-N table")
    p.add_argument("--ablations", action="store_true", help="feature-group ablation table")
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("eval", help="evaluate an existing run file")
    _add_config_flags(p)
    p.add_argument("--runs", required=True, help="run file (JSONL)")
    p.add_argument("--out", help="evaluation report JSON path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("report", help="render a report JSON as aligned text")
    p.add_argument("--json", required=True, help="report JSON path")
    p.add_argument("--text", help="write the table here as well")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve", help="start the read-only HTTP service")
    p.add_argument("--data-dir", required=True, help="directory with the corpus files")
    p.add_argument("--runs-dir", help="directory with run files (JSONL)")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CheckrankError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
