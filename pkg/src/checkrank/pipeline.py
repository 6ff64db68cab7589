"""End-to-end experiment orchestration.

Stages: load + validate the corpus, generate BM25-on-body candidate pools
(with the pair manifest external scorers must cover), assemble pooled
feature vectors, run single-score baselines, train/evaluate by
leave-one-transcript-out cross-validation, and render reports.

Everything is deterministic given the config: files come out byte-identical
across re-runs. Normalization statistics and the C choice for each fold are
computed strictly from that fold's training transcripts.
"""

from __future__ import annotations

import dataclasses
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .bm25 import Bm25Index, build_index, tokenize
from .corpus import METRICS, Corpus, ScoreTable, SentenceRec
from .errors import CoverageError, UndefinedMetricError, ValidationError
from .features import (
    ABLATIONS,
    BASELINE_NAMES,
    STRATEGIES,
    PairFeatures,
    SentenceVector,
    ablation_mask,
    apply_mask,
    assemble_pair,
    baseline_pair_score,
    baseline_score,
    candidates,
    filter_half_true,
    pool_concat,
    pool_max,
)
from .metrics import (
    R_VALUES_DEFAULT,
    RankedSentence,
    RankingRun,
    aggregate_metrics,
    map_inner,
    metric_columns,
    transcript_metrics,
    verdict_claims,
)
from .ranksvm import RankModel, fit, make_pairs, rank

logger = logging.getLogger(__name__)

N_GRID = (1, 3, 5, 10, 20, 30)

MODEL_STRATEGIES = STRATEGIES  # ("concat", "max", "max-skip")

ALL_STRATEGIES = ("baseline-slot",) + MODEL_STRATEGIES

EVIDENCE_SOURCES = ("bm25_body", "self")

_CONFIG_FIELDS = None  # filled after the dataclass is defined


@dataclass
class ExperimentConfig:
    """One experiment: corpus paths plus every knob the pipeline honors."""

    claims: str
    transcripts: str
    gold: str | None = None
    scores: str | None = None
    strategy: str = "max"
    baseline: str | None = None
    n_candidates: int = 5
    pool: int = 15
    r_values: tuple[int, ...] = R_VALUES_DEFAULT
    c_grid: tuple[float, ...] = (0.1, 1.0, 10.0)
    epochs: int = 200
    seed: int = 0
    ablation: str | None = None
    evidence_source: str = "bm25_body"
    skip_half_true_evidence: bool = False
    lenient: bool = False
    data_root: str | None = None

    def __post_init__(self):
        if self.data_root:
            root = Path(self.data_root)
            for name in ("claims", "transcripts", "gold", "scores"):
                value = getattr(self, name)
                if value and not Path(value).is_absolute():
                    setattr(self, name, str(root / value))
        self.r_values = tuple(int(r) for r in self.r_values)
        self.c_grid = tuple(float(c) for c in self.c_grid)
        if self.strategy not in ALL_STRATEGIES:
            raise ValidationError(
                f"unknown strategy {self.strategy!r}; expected one of {ALL_STRATEGIES}"
            )
        if self.strategy == "baseline-slot":
            if self.baseline is None:
                raise ValidationError("strategy 'baseline-slot' needs a baseline name")
            if self.baseline not in BASELINE_NAMES:
                raise ValidationError(f"unknown baseline {self.baseline!r}")
        if self.n_candidates < 1:
            raise ValidationError("n_candidates must be >= 1")
        if self.pool < self.n_candidates:
            raise ValidationError(
                f"candidate pool ({self.pool}) smaller than n_candidates ({self.n_candidates})"
            )
        if not self.r_values or any(r < 1 for r in self.r_values):
            raise ValidationError("r_values must be positive integers")
        if not self.c_grid or any(c <= 0 for c in self.c_grid):
            raise ValidationError("c_grid must be positive")
        if self.epochs < 1:
            raise ValidationError("epochs must be >= 1")
        if self.ablation is not None and self.ablation not in ABLATIONS:
            raise ValidationError(f"unknown ablation {self.ablation!r}")
        if self.evidence_source not in EVIDENCE_SOURCES:
            raise ValidationError(f"unknown evidence source {self.evidence_source!r}")
        if self.evidence_source == "self" and self.strategy != "baseline-slot":
            raise ValidationError(
                "evidence source 'self' is only defined for baseline-slot runs"
            )

    @classmethod
    def from_dict(cls, data: Mapping, data_root: str | None = None) -> "ExperimentConfig":
        unknown = set(data) - _CONFIG_FIELDS
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        if "claims" not in data or "transcripts" not in data:
            raise ValidationError("config must name 'claims' and 'transcripts' paths")
        merged = dict(data)
        if data_root is not None and "data_root" not in merged:
            merged["data_root"] = data_root
        return cls(**merged)

    @classmethod
    def from_file(cls, path: str, data_root: str | None = None) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}: not valid JSON ({exc.msg})") from exc
        if not isinstance(data, dict):
            raise ValidationError(f"{path}: config must be a JSON object")
        return cls.from_dict(data, data_root=data_root)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["r_values"] = list(self.r_values)
        out["c_grid"] = list(self.c_grid)
        return out


_CONFIG_FIELDS = {f.name for f in dataclasses.fields(ExperimentConfig)}


@dataclass
class Workspace:
    """A loaded corpus with its BM25 index, ready to run stages against."""

    config: ExperimentConfig
    corpus: Corpus
    index: Bm25Index

    @property
    def gold_claims(self) -> dict[str, set[str]]:
        return verdict_claims(self.corpus.gold)


def load_workspace(config: ExperimentConfig) -> Workspace:
    corpus = Corpus.load(config.claims, config.transcripts, config.gold, config.scores)
    return Workspace(config, corpus, build_index(corpus.claims))


# ---------------------------------------------------------------------------
# candidate pools and the dense-score coverage contract

def generate_candidates(ws: Workspace) -> dict[str, tuple[str, ...]]:
    """BM25-on-body top-`pool` claims per sentence, in document order."""
    out: dict[str, tuple[str, ...]] = {}
    for doc in ws.corpus.transcripts:
        for sent in doc.sentences:
            out[sent.sentence_id] = tuple(candidates(sent, ws.index, ws.config.pool))
    return out


def manifest_pairs(cands: Mapping[str, Sequence[str]]) -> list[tuple[str, str]]:
    return [(sid, cid) for sid in cands for cid in cands[sid]]


def save_candidates(cands: Mapping[str, Sequence[str]], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sid, claims in cands.items():
            fh.write(
                json.dumps({"sentence_id": sid, "claims": list(claims)}, sort_keys=True)
                + "\n"
            )


def load_candidates(path: str) -> dict[str, tuple[str, ...]]:
    out: dict[str, tuple[str, ...]] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            out[str(obj["sentence_id"])] = tuple(str(c) for c in obj["claims"])
    return out


def save_manifest(pairs: Sequence[tuple[str, str]], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sid, cid in pairs:
            fh.write(
                json.dumps({"claim_id": cid, "sentence_id": sid}, sort_keys=True) + "\n"
            )


def check_coverage(table: ScoreTable, pairs: Sequence[tuple[str, str]]) -> None:
    """Every manifest pair needs all 10 metrics; raises CoverageError otherwise."""
    missing = [
        (sid, cid, metric)
        for sid, cid in pairs
        for metric in METRICS
        if (sid, cid, metric) not in table
    ]
    if missing:
        raise CoverageError(missing)


# ---------------------------------------------------------------------------
# feature assembly

def _evidence_for(
    ws: Workspace, pool_ids: Sequence[str]
) -> tuple[str, ...]:
    if not ws.config.skip_half_true_evidence:
        return tuple(pool_ids)
    keep = tuple(
        cid
        for cid in pool_ids
        if ws.corpus.claims_by_id[cid].truth_value != "half-true"
    )
    return keep


def assemble_pool(
    ws: Workspace, cands: Mapping[str, Sequence[str]]
) -> dict[str, list[PairFeatures]]:
    """Full-pool pair features per sentence; independent of strategy, N, ablation."""
    out: dict[str, list[PairFeatures]] = {}
    for doc in ws.corpus.transcripts:
        for sent in doc.sentences:
            out[sent.sentence_id] = [
                assemble_pair(
                    sent, ws.corpus.claims_by_id[cid], ws.index, ws.corpus.scores, ws.config.lenient
                )
                for cid in cands[sent.sentence_id]
            ]
    return out


def sentence_vector(
    ws: Workspace,
    sent: SentenceRec,
    pool_ids: Sequence[str],
    pool_pairs: Sequence[PairFeatures],
) -> SentenceVector:
    """Pool the sentence's top-N candidate pair features per the config."""
    cfg = ws.config
    pairs = list(pool_pairs[: cfg.n_candidates])
    if cfg.ablation is not None:
        keep = ablation_mask(cfg.ablation)
        pairs = [apply_mask(p, keep) for p in pairs]
    evidence = _evidence_for(ws, pool_ids)
    if cfg.strategy == "concat":
        return pool_concat(sent.sentence_id, pairs, cfg.n_candidates, evidence)
    if cfg.strategy == "max-skip":
        pairs = filter_half_true(pairs, ws.corpus.claims_by_id)
        return pool_max(
            sent.sentence_id, pairs, cfg.n_candidates, evidence, strategy="max-skip"
        )
    return pool_max(sent.sentence_id, pairs, cfg.n_candidates, evidence)


def build_vectors(
    ws: Workspace,
    cands: Mapping[str, Sequence[str]] | None = None,
    pools: Mapping[str, Sequence[PairFeatures]] | None = None,
) -> dict[str, list[SentenceVector]]:
    """Sentence vectors per transcript, in document order."""
    if ws.config.strategy == "baseline-slot":
        raise ValidationError("baseline-slot runs do not pool feature vectors")
    if cands is None:
        cands = generate_candidates(ws)
    if pools is None:
        pools = assemble_pool(ws, cands)
    out: dict[str, list[SentenceVector]] = {}
    for doc in ws.corpus.transcripts:
        out[doc.transcript_id] = [
            sentence_vector(ws, sent, cands[sent.sentence_id], pools[sent.sentence_id])
            for sent in doc.sentences
        ]
    return out


# ---------------------------------------------------------------------------
# baselines: rank sentences by one slot's max over the sentence's scored pairs

def _baseline_sentence(
    ws: Workspace, sent: SentenceRec, name: str
) -> tuple[float, tuple[str, ...]]:
    """Score one sentence under a single-score baseline.

    Returns (sentence score, the baseline's own claim ranking as evidence).
    BM25 baselines scan the whole database through the index; dense baselines
    range over the pairs present in the score table.
    """
    if name.startswith("bm25_"):
        ranked = ws.index.retrieve(tokenize(sent.text), name[len("bm25_"):], ws.config.pool)
        if not ranked:
            return 0.0, ()
        return ranked[0][1], tuple(cid for cid, _ in ranked)

    pair_ids = ws.corpus.scores.pairs_for_sentence(sent.sentence_id)
    vectors = {
        cid: assemble_pair(
            sent, ws.corpus.claims_by_id[cid], ws.index, ws.corpus.scores, ws.config.lenient
        ).values
        for cid in pair_ids
    }
    best = baseline_score(vectors.values(), name)
    ranked_ids = sorted(
        pair_ids, key=lambda cid: (-baseline_pair_score(vectors[cid], name), cid)
    )
    return best, tuple(ranked_ids)


def baseline_runs(ws: Workspace, name: str) -> tuple[list[RankingRun], dict[str, tuple[str, ...]]]:
    """Rank every transcript by one baseline; also returns per-sentence evidence."""
    if name not in BASELINE_NAMES:
        raise ValidationError(f"unknown baseline {name!r}")
    runs = []
    evidence_by_sentence: dict[str, tuple[str, ...]] = {}
    for doc in ws.corpus.transcripts:
        scored = []
        for pos, sent in enumerate(doc.sentences):
            value, evidence = _baseline_sentence(ws, sent, name)
            evidence_by_sentence[sent.sentence_id] = evidence
            scored.append((value, pos, sent.sentence_id, evidence))
        scored.sort(key=lambda t: (-t[0], t[1]))
        runs.append(
            RankingRun(
                doc.transcript_id,
                tuple(RankedSentence(sid, value, evidence) for value, _pos, sid, evidence in scored),
            )
        )
    return runs, evidence_by_sentence


def run_baselines(ws: Workspace) -> dict:
    """The single-score block: every baseline row with outer metrics + MAP_inner."""
    ensure_coverage(ws)
    gold_claims = ws.gold_claims
    rows = []
    for name in BASELINE_NAMES:
        runs, evidence = baseline_runs(ws, name)
        metrics, excluded = aggregate_metrics(runs, gold_claims, ws.config.r_values)
        try:
            inner, _skipped = map_inner(evidence, gold_claims)
        except UndefinedMetricError:
            inner = None
        rows.append(
            {"name": name, "metrics": metrics, "map_inner": inner, "excluded": excluded}
        )
    return {"name": "baselines", "rows": rows}


def ensure_coverage(ws: Workspace, cands: Mapping[str, Sequence[str]] | None = None) -> None:
    if ws.config.lenient:
        return
    if cands is None:
        cands = generate_candidates(ws)
    check_coverage(ws.corpus.scores, manifest_pairs(cands))


# ---------------------------------------------------------------------------
# cross-validation

@dataclass
class FoldReport:
    """One held-out transcript: its ranking, metrics, and model provenance."""

    transcript_id: str
    run: RankingRun
    metrics: dict[str, float] | None
    chosen_c: float
    train_transcripts: tuple[str, ...]
    model: RankModel = field(repr=False)


@dataclass
class CvResult:
    folds: list[FoldReport]
    aggregate: dict[str, float]
    excluded: int

    def runs(self) -> list[RankingRun]:
        return [f.run for f in self.folds]


def _fit_fold(
    ws: Workspace,
    vectors: Mapping[str, list[SentenceVector]],
    train_tids: Sequence[str],
    relevance: Mapping[str, bool],
    c_value: float,
) -> RankModel:
    pairs = make_pairs({tid: vectors[tid] for tid in train_tids}, relevance)
    if not pairs:
        raise ValidationError(
            f"no training pairs in transcripts {sorted(train_tids)}; "
            "need at least one relevant and one non-relevant sentence"
        )
    return fit(
        pairs,
        C=c_value,
        seed=ws.config.seed,
        epochs=ws.config.epochs,
        strategy=ws.config.strategy,
        n_candidates=ws.config.n_candidates,
    )


def select_c(
    ws: Workspace,
    vectors: Mapping[str, list[SentenceVector]],
    train_tids: Sequence[str],
    relevance: Mapping[str, bool],
) -> float:
    """Pick C by inner leave-one-transcript-out MAP over the training split.

    Falls back to 1.0 (or the first grid value) when the grid is a singleton
    or the inner split cannot be evaluated. Ties prefer the smaller C.
    """
    grid = ws.config.c_grid
    fallback = 1.0 if 1.0 in grid else grid[0]
    if len(grid) == 1:
        return grid[0]
    if len(train_tids) < 2:
        return fallback
    gold_claims = ws.gold_claims
    best_c, best_map = None, -1.0
    for c_value in grid:
        inner_aps = []
        for held in train_tids:
            inner_train = [t for t in train_tids if t != held]
            try:
                model = _fit_fold(ws, vectors, inner_train, relevance, c_value)
            except ValidationError:
                continue
            run = rank(model, held, vectors[held])
            try:
                inner_aps.append(transcript_metrics(run, gold_claims, (1,))["MAP"])
            except UndefinedMetricError:
                continue
        if not inner_aps:
            continue
        inner_map = sum(inner_aps) / len(inner_aps)
        if inner_map > best_map + 1e-12:
            best_c, best_map = c_value, inner_map
    return fallback if best_c is None else best_c


def run_cv(
    ws: Workspace,
    cands: Mapping[str, Sequence[str]] | None = None,
    pools: Mapping[str, Sequence[PairFeatures]] | None = None,
) -> CvResult:
    """Leave-one-transcript-out: train on the rest, rank the held-out one."""
    if len(ws.corpus.transcripts) < 2:
        raise ValidationError("cross-validation needs at least two transcripts")
    ensure_coverage(ws, cands)
    vectors = build_vectors(ws, cands, pools)
    relevance = ws.corpus.relevance()
    gold_claims = ws.gold_claims
    tids = sorted(vectors)

    folds = []
    for held in tids:
        train_tids = tuple(t for t in tids if t != held)
        chosen_c = select_c(ws, vectors, train_tids, relevance)
        model = _fit_fold(ws, vectors, train_tids, relevance, chosen_c)
        run = rank(model, held, vectors[held])
        try:
            metrics = transcript_metrics(run, gold_claims, ws.config.r_values)
        except UndefinedMetricError:
            metrics = None
        folds.append(FoldReport(held, run, metrics, chosen_c, train_tids, model))

    aggregate, excluded = aggregate_metrics(
        [f.run for f in folds], gold_claims, ws.config.r_values
    )
    return CvResult(folds, aggregate, excluded)


def train_full(ws: Workspace) -> RankModel:
    """One model over every transcript (C still chosen by inner LOO)."""
    ensure_coverage(ws)
    vectors = build_vectors(ws)
    relevance = ws.corpus.relevance()
    tids = sorted(vectors)
    chosen_c = select_c(ws, vectors, tids, relevance)
    return _fit_fold(ws, vectors, tids, relevance, chosen_c)


# ---------------------------------------------------------------------------
# the full table: four blocks over the Top-N grid, and the ablation block

def run_table_grid(ws: Workspace, n_grid: Sequence[int] = N_GRID) -> dict:
    """Baselines plus every pooling strategy over the Top-N grid."""
    if max(n_grid) > ws.config.pool:
        raise ValidationError(
            f"n_grid up to {max(n_grid)} needs pool >= that, got {ws.config.pool}"
        )
    base = ws.config
    cands = generate_candidates(ws)
    pools = assemble_pool(ws, cands)
    blocks = [run_baselines(ws)]
    for strategy in MODEL_STRATEGIES:
        rows = []
        for n in n_grid:
            cfg = dataclasses.replace(base, strategy=strategy, n_candidates=n, baseline=None)
            result = run_cv(Workspace(cfg, ws.corpus, ws.index), cands, pools)
            rows.append(
                {
                    "name": f"top-{n}",
                    "n": n,
                    "metrics": result.aggregate,
                    "excluded": result.excluded,
                }
            )
        blocks.append({"name": strategy, "rows": rows})
    return {
        "columns": metric_columns(base.r_values),
        "blocks": blocks,
        "config": base.to_dict(),
    }


def run_ablations(ws: Workspace) -> dict:
    """One row per feature-family / field-group mask, same CV protocol."""
    if ws.config.strategy == "baseline-slot":
        raise ValidationError("ablations apply to pooled-model strategies")
    cands = generate_candidates(ws)
    pools = assemble_pool(ws, cands)
    rows = [
        {
            "name": "full",
            "ablation": None,
            "metrics": run_cv(ws, cands, pools).aggregate,
        }
    ]
    for name in ABLATIONS:
        cfg = dataclasses.replace(ws.config, ablation=name)
        result = run_cv(Workspace(cfg, ws.corpus, ws.index), cands, pools)
        rows.append({"name": f"w/o {name}", "ablation": name, "metrics": result.aggregate})
    return {
        "columns": metric_columns(ws.config.r_values),
        "blocks": [{"name": f"ablations ({ws.config.strategy})", "rows": rows}],
        "config": ws.config.to_dict(),
    }


# ---------------------------------------------------------------------------
# report rendering

def render_text(report: Mapping) -> str:
    """Aligned text table: one section per block, one line per row."""
    columns = list(report["columns"])
    has_inner = any("map_inner" in row for block in report["blocks"] for row in block["rows"])
    headers = columns + (["MAP_inner"] if has_inner else [])
    name_width = max(
        [len("row")]
        + [len(str(row["name"])) for block in report["blocks"] for row in block["rows"]]
    )
    col_width = max([10] + [len(h) + 2 for h in headers])

    def fmt(value) -> str:
        return ("-" if value is None else f"{value:.4f}").rjust(col_width)

    lines = []
    for block in report["blocks"]:
        lines.append(str(block["name"]))
        lines.append(
            "row".ljust(name_width) + "".join(h.rjust(col_width) for h in headers)
        )
        for row in block["rows"]:
            cells = [fmt(row["metrics"].get(c)) for c in columns]
            if has_inner:
                cells.append(fmt(row.get("map_inner")))
            lines.append(str(row["name"]).ljust(name_width) + "".join(cells))
        lines.append("")
    return "\n".join(lines)


def emit_report(report: Mapping, json_path: str | None = None, text_path: str | None = None) -> str:
    """Write the JSON and aligned-text renderings; returns the text."""
    if not report.get("blocks"):
        raise ValidationError("empty report")
    text = render_text(report)
    if json_path:
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump(report, fh, sort_keys=True, indent=1)
            fh.write("\n")
    if text_path:
        with open(text_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


# ---------------------------------------------------------------------------
# fold persistence (cv subcommand artifacts)

def fold_summary(result: CvResult) -> dict:
    return {
        "aggregate": result.aggregate,
        "excluded": result.excluded,
        "folds": [
            {
                "transcript_id": f.transcript_id,
                "chosen_c": f.chosen_c,
                "train_transcripts": list(f.train_transcripts),
                "metrics": f.metrics,
            }
            for f in result.folds
        ],
    }
