"""Pipeline: config validation, candidate/coverage plumbing, CV protocol, reports."""

import json

import numpy as np
import pytest

from checkrank.bm25 import build_index, tokenize
from checkrank.corpus import ScoreTable
from checkrank.errors import CoverageError, ValidationError
from checkrank.features import (
    ABLATIONS,
    BASELINE_NAMES,
    FAMILY_SLOTS,
    N_SLOTS,
)
from checkrank.metrics import aggregate_metrics, load_runs, metric_columns, save_runs
from checkrank.pipeline import (
    ALL_STRATEGIES,
    ExperimentConfig,
    Workspace,
    baseline_runs,
    build_vectors,
    check_coverage,
    emit_report,
    ensure_coverage,
    fold_summary,
    generate_candidates,
    load_candidates,
    manifest_pairs,
    render_text,
    run_ablations,
    run_baselines,
    run_cv,
    run_table_grid,
    save_candidates,
    save_manifest,
    select_c,
    train_full,
)
from checkrank.ranksvm import _training_matrix, make_pairs, normalization_stats
from checkrank.synth import make_corpus

FAST = dict(epochs=30, c_grid=(1.0,))


def planted_ws(corpus, **overrides):
    """In-memory workspace over a synthetic corpus; paths are never opened."""
    kwargs = dict(claims="claims", transcripts="transcripts", pool=6, n_candidates=3)
    kwargs.update(overrides)
    return Workspace(
        ExperimentConfig(**kwargs), corpus, build_index(corpus.claims)
    )


# ---------------------------------------------------------------------------
# configuration

def config(**overrides):
    kwargs = dict(claims="c.jsonl", transcripts="t.jsonl")
    kwargs.update(overrides)
    return ExperimentConfig(**kwargs)


@pytest.mark.parametrize(
    "overrides, message",
    [
        (dict(strategy="bilinear"), "unknown strategy"),
        (dict(strategy="baseline-slot"), "needs a baseline name"),
        (dict(strategy="baseline-slot", baseline="tfidf"), "unknown baseline"),
        (dict(n_candidates=0), "n_candidates must be >= 1"),
        (dict(n_candidates=20, pool=15), "smaller than n_candidates"),
        (dict(r_values=()), "r_values must be positive"),
        (dict(r_values=(1, 0)), "r_values must be positive"),
        (dict(c_grid=()), "c_grid must be positive"),
        (dict(c_grid=(1.0, -2.0)), "c_grid must be positive"),
        (dict(epochs=0), "epochs must be >= 1"),
        (dict(ablation="colour"), "unknown ablation"),
        (dict(evidence_source="oracle"), "unknown evidence source"),
        (dict(evidence_source="self"), "only defined for baseline-slot"),
    ],
)
def test_config_rejects(overrides, message):
    with pytest.raises(ValidationError, match=message):
        config(**overrides)


def test_config_accepts_self_evidence_for_baselines():
    cfg = config(strategy="baseline-slot", baseline="bm25_body", evidence_source="self")
    assert cfg.evidence_source == "self"


def test_config_data_root_resolves_relative_paths(tmp_path):
    cfg = ExperimentConfig(
        claims="claims.jsonl",
        transcripts=str(tmp_path / "abs.jsonl"),
        gold="gold.jsonl",
        data_root=str(tmp_path),
    )
    assert cfg.claims == str(tmp_path / "claims.jsonl")
    assert cfg.transcripts == str(tmp_path / "abs.jsonl")  # absolute stays put
    assert cfg.gold == str(tmp_path / "gold.jsonl")
    assert cfg.scores is None


def test_config_from_dict_rejects_unknown_keys():
    with pytest.raises(ValidationError, match="unknown config keys"):
        ExperimentConfig.from_dict(
            {"claims": "c", "transcripts": "t", "kernel": "rbf"}
        )
    with pytest.raises(ValidationError, match="must name 'claims'"):
        ExperimentConfig.from_dict({"transcripts": "t"})


def test_config_from_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"claims": "c.jsonl", "transcripts": "t.jsonl", "pool": 9}))
    cfg = ExperimentConfig.from_file(str(path), data_root=str(tmp_path))
    assert cfg.pool == 9
    assert cfg.claims == str(tmp_path / "c.jsonl")

    path.write_text("{not json")
    with pytest.raises(ValidationError, match="not valid JSON"):
        ExperimentConfig.from_file(str(path))

    path.write_text(json.dumps(["claims", "transcripts"]))
    with pytest.raises(ValidationError, match="JSON object"):
        ExperimentConfig.from_file(str(path))


def test_config_round_trips_through_to_dict():
    cfg = config(strategy="concat", n_candidates=2, pool=4, r_values=(2, 5), seed=3)
    again = ExperimentConfig.from_dict(cfg.to_dict())
    assert again == cfg


def test_strategy_catalogue():
    assert ALL_STRATEGIES == ("baseline-slot", "concat", "max", "max-skip")


# ---------------------------------------------------------------------------
# candidates, manifest, coverage

def test_candidates_cover_every_sentence_in_document_order(planted_corpus):
    ws = planted_ws(planted_corpus)
    cands = generate_candidates(ws)
    expected_order = [
        s.sentence_id for d in planted_corpus.transcripts for s in d.sentences
    ]
    assert list(cands) == expected_order
    assert all(len(pool) == 6 for pool in cands.values())
    pairs = manifest_pairs(cands)
    assert len(pairs) == 3 * 12 * 6


def test_candidate_and_manifest_files_round_trip(planted_corpus, tmp_path):
    ws = planted_ws(planted_corpus)
    cands = generate_candidates(ws)
    cpath = tmp_path / "candidates.jsonl"
    save_candidates(cands, str(cpath))
    assert load_candidates(str(cpath)) == cands

    mpath = tmp_path / "manifest.jsonl"
    save_manifest(manifest_pairs(cands), str(mpath))
    lines = [json.loads(l) for l in mpath.read_text().splitlines()]
    assert len(lines) == 3 * 12 * 6
    assert set(lines[0]) == {"claim_id", "sentence_id"}


def drop_one_record(table, metric="bertscore_f1"):
    records = list(table.records())
    victim = next(r for r in records if r.metric == metric)
    rest = [r for r in records if r is not victim]
    return ScoreTable(rest), victim


def test_check_coverage_names_the_missing_triple(planted_corpus):
    ws = planted_ws(planted_corpus)
    cands = generate_candidates(ws)
    table, victim = drop_one_record(planted_corpus.scores)
    with pytest.raises(CoverageError, match="1 .pair, metric. entries uncovered") as exc:
        check_coverage(table, manifest_pairs(cands))
    assert exc.value.missing == [(victim.sentence_id, victim.claim_id, victim.metric)]
    assert victim.sentence_id in str(exc.value)
    assert "bertscore_f1" in str(exc.value)


def test_ensure_coverage_honors_lenient(planted_corpus):
    table, _ = drop_one_record(planted_corpus.scores)
    from checkrank.corpus import Corpus

    broken = Corpus(
        planted_corpus.claims, planted_corpus.transcripts, planted_corpus.gold, table
    )
    strict = planted_ws(broken)
    with pytest.raises(CoverageError):
        ensure_coverage(strict)
    lenient = planted_ws(broken, lenient=True)
    ensure_coverage(lenient)  # no-op


# ---------------------------------------------------------------------------
# vector assembly under config knobs

def test_build_vectors_shapes_and_evidence(planted_corpus):
    for strategy, dims in (("max", N_SLOTS), ("max-skip", N_SLOTS), ("concat", 3 * N_SLOTS)):
        ws = planted_ws(planted_corpus, strategy=strategy)
        vectors = build_vectors(ws)
        assert sorted(vectors) == ["ev01", "ev02", "ev03"]
        cands = generate_candidates(ws)
        for tid, doc_vectors in vectors.items():
            assert len(doc_vectors) == 12
            for v in doc_vectors:
                assert v.values.shape == (dims,)
                # evidence carries the full pool even though only top-3 are pooled
                assert v.evidence == cands[v.sentence_id]


def test_build_vectors_rejects_baseline_slot(planted_corpus):
    ws = planted_ws(planted_corpus, strategy="baseline-slot", baseline="bm25_body")
    with pytest.raises(ValidationError, match="do not pool"):
        build_vectors(ws)


def test_skip_half_true_evidence_filters_evidence_only(tmp_path):
    corpus = make_corpus(n_transcripts=2, n_sentences=8, n_relevant=2,
                         n_extra_claims=12, pool=6, seed=2, half_true_decoys=1)
    half_true = {c.claim_id for c in corpus.claims if c.truth_value == "half-true"}
    assert half_true

    plain = build_vectors(planted_ws(corpus))
    filtered = build_vectors(planted_ws(corpus, skip_half_true_evidence=True))
    saw_filtering = False
    for tid in plain:
        for v_plain, v_filt in zip(plain[tid], filtered[tid]):
            assert not half_true & set(v_filt.evidence)
            if half_true & set(v_plain.evidence):
                saw_filtering = True
                assert len(v_filt.evidence) < len(v_plain.evidence)
            # pooled values are untouched by the evidence flag
            np.testing.assert_array_equal(v_plain.values, v_filt.values)
    assert saw_filtering


@pytest.mark.parametrize("strategy", ["max", "concat"])
def test_ablation_config_zeroes_family_slots(planted_corpus, strategy):
    ws = planted_ws(planted_corpus, strategy=strategy, ablation="nli")
    vectors = build_vectors(ws)
    dead = FAMILY_SLOTS["nli"]
    for doc_vectors in vectors.values():
        for v in doc_vectors:
            blocks = v.values.reshape(-1, N_SLOTS)  # one row per concat block
            for row in blocks:
                assert np.all(row[list(dead)] == 0.0)
            assert np.any(v.values != 0.0)  # other families survive


# ---------------------------------------------------------------------------
# cross-validation protocol

@pytest.fixture(scope="module")
def planted_cv(planted_corpus):
    ws = planted_ws(planted_corpus, **FAST)
    return ws, run_cv(ws)


def test_cv_runs_one_fold_per_transcript(planted_cv):
    _, result = planted_cv
    assert [f.transcript_id for f in result.folds] == ["ev01", "ev02", "ev03"]
    for fold in result.folds:
        assert fold.transcript_id not in fold.train_transcripts
        assert len(fold.train_transcripts) == 2
        assert fold.chosen_c in (1.0,)
        assert len(fold.run.sentences) == 12


def test_cv_separates_the_planted_corpus(planted_cv):
    _, result = planted_cv
    for column in metric_columns((1, 3)):
        assert result.aggregate[column] == 1.0
    assert result.excluded == 0


def test_cv_normalization_never_sees_the_held_out_fold(planted_cv):
    ws, result = planted_cv
    vectors = build_vectors(ws)
    relevance = ws.corpus.relevance()
    for fold in result.folds:
        train_pairs = make_pairs(
            {tid: vectors[tid] for tid in fold.train_transcripts}, relevance
        )
        matrix, train_vectors = _training_matrix(train_pairs)
        means, stds = normalization_stats(matrix)
        np.testing.assert_array_equal(fold.model.means, means)
        np.testing.assert_array_equal(fold.model.stds, stds)
        train_sids = {v.sentence_id for v in train_vectors}
        held_out_sids = {s.sentence_id for s in fold.run.sentences}
        assert not train_sids & held_out_sids


def test_cv_aggregate_matches_fold_runs(planted_cv):
    ws, result = planted_cv
    recomputed, excluded = aggregate_metrics(
        result.runs(), ws.gold_claims, ws.config.r_values
    )
    assert recomputed == result.aggregate
    assert excluded == result.excluded


def test_cv_requires_two_transcripts():
    single = make_corpus(n_transcripts=1, n_sentences=6, n_relevant=2,
                         n_extra_claims=6, pool=4, seed=0)
    with pytest.raises(ValidationError, match="at least two transcripts"):
        run_cv(planted_ws(single, pool=4, n_candidates=2))


def test_select_c_fallback_paths(planted_corpus):
    ws = planted_ws(planted_corpus)
    vectors = build_vectors(ws)
    relevance = ws.corpus.relevance()

    singleton = planted_ws(planted_corpus, c_grid=(10.0,))
    assert select_c(singleton, vectors, ("ev01", "ev02"), relevance) == 10.0

    # one training transcript cannot form an inner split
    assert select_c(ws, vectors, ("ev01",), relevance) == 1.0
    no_one = planted_ws(planted_corpus, c_grid=(0.5, 2.0))
    assert select_c(no_one, vectors, ("ev01",), relevance) == 0.5


def test_select_c_picks_from_the_grid(planted_corpus):
    ws = planted_ws(planted_corpus, epochs=30)
    vectors = build_vectors(ws)
    relevance = ws.corpus.relevance()
    chosen = select_c(ws, vectors, ("ev01", "ev02", "ev03"), relevance)
    assert chosen in ws.config.c_grid


def test_train_full_uses_every_transcript(planted_corpus):
    ws = planted_ws(planted_corpus, **FAST)
    model = train_full(ws)
    assert model.weights.shape == (N_SLOTS,)
    vectors = build_vectors(ws)
    pairs = make_pairs(vectors, ws.corpus.relevance())
    matrix, _ = _training_matrix(pairs)
    means, _stds = normalization_stats(matrix)
    np.testing.assert_array_equal(model.means, means)


# ---------------------------------------------------------------------------
# baselines

def test_baseline_block_lists_all_baselines_in_order(planted_corpus):
    ws = planted_ws(planted_corpus)
    block = run_baselines(ws)
    assert block["name"] == "baselines"
    assert [row["name"] for row in block["rows"]] == list(BASELINE_NAMES)
    assert len(block["rows"]) == 14
    by_name = {row["name"]: row for row in block["rows"]}
    # planted separators rank perfectly; their own evidence holds the gold claim
    for name in ("sbert_statement", "bm25_body", "nli_entail"):
        assert by_name[name]["metrics"]["MAP"] == 1.0
    assert by_name["sbert_statement"]["map_inner"] == 1.0


def test_bm25_baseline_matches_manual_scan(planted_corpus):
    ws = planted_ws(planted_corpus)
    runs, _ = baseline_runs(ws, "bm25_statement")
    doc = planted_corpus.transcripts[0]
    run = next(r for r in runs if r.transcript_id == doc.transcript_id)
    by_sid = {s.sentence_id: s.score for s in run.sentences}
    for sent in doc.sentences:
        tokens = tokenize(sent.text)
        manual = max(
            ws.index.score(tokens, "statement", c.claim_id)
            for c in planted_corpus.claims
        )
        assert abs(by_sid[sent.sentence_id] - max(manual, 0.0)) < 1e-12


def test_baseline_self_evidence_ranks_gold_claim_first(planted_corpus):
    ws = planted_ws(planted_corpus)
    _, evidence = baseline_runs(ws, "sbert_statement")
    gold_by_sid = {}
    for g in planted_corpus.gold:
        if g.verdict in ("true", "false"):
            gold_by_sid[g.sentence_id] = g.claim_id
    assert gold_by_sid
    for sid, cid in gold_by_sid.items():
        assert evidence[sid][0] == cid


# ---------------------------------------------------------------------------
# report grids

@pytest.fixture(scope="module")
def grid_report(planted_corpus):
    ws = planted_ws(planted_corpus, **FAST)
    return run_table_grid(ws, n_grid=(1, 2))


def test_grid_report_structure(grid_report):
    assert grid_report["columns"] == [
        "MAP", "MAP_0^1", "MAP_0^3", "MAP_0.5^1", "MAP_0.5^3", "MAP_H^1", "MAP_H^3",
    ]
    assert [b["name"] for b in grid_report["blocks"]] == [
        "baselines", "concat", "max", "max-skip",
    ]
    for block in grid_report["blocks"][1:]:
        assert [row["name"] for row in block["rows"]] == ["top-1", "top-2"]
        assert [row["n"] for row in block["rows"]] == [1, 2]
        for row in block["rows"]:
            assert set(row["metrics"]) == set(grid_report["columns"])
    assert grid_report["config"]["pool"] == 6


def test_grid_rejects_n_beyond_pool(planted_corpus):
    ws = planted_ws(planted_corpus)
    with pytest.raises(ValidationError, match="needs pool"):
        run_table_grid(ws, n_grid=(1, 50))


def test_ablation_report_rows(planted_corpus):
    ws = planted_ws(planted_corpus, **FAST)
    report = run_ablations(ws)
    (block,) = report["blocks"]
    assert block["name"] == "ablations (max)"
    names = [row["name"] for row in block["rows"]]
    assert names == ["full"] + [f"w/o {a}" for a in ABLATIONS]
    assert len(names) == 9


def test_ablations_reject_baseline_slot(planted_corpus):
    ws = planted_ws(planted_corpus, strategy="baseline-slot", baseline="bm25_body")
    with pytest.raises(ValidationError, match="pooled-model strategies"):
        run_ablations(ws)


def test_emit_report_writes_stable_bytes(grid_report, tmp_path):
    j1, t1 = tmp_path / "r1.json", tmp_path / "r1.txt"
    j2, t2 = tmp_path / "r2.json", tmp_path / "r2.txt"
    text = emit_report(grid_report, str(j1), str(t1))
    emit_report(grid_report, str(j2), str(t2))
    assert j1.read_bytes() == j2.read_bytes()
    assert t1.read_bytes() == t2.read_bytes()
    assert j1.read_text().endswith("\n")
    assert text == t1.read_text()
    parsed = json.loads(j1.read_text())
    assert parsed["columns"] == grid_report["columns"]


def test_emit_report_rejects_empty():
    with pytest.raises(ValidationError, match="empty report"):
        emit_report({"columns": [], "blocks": []})


def test_render_text_lists_rows_and_columns(grid_report):
    text = render_text(grid_report)
    for needle in ("baselines", "max-skip", "top-1", "MAP_H^3", "bm25_body"):
        assert needle in text
    assert "MAP_inner" in text  # baselines block carries inner MAP


def test_fold_summary_shape(planted_cv):
    _, result = planted_cv
    summary = fold_summary(result)
    assert set(summary) == {"aggregate", "excluded", "folds"}
    assert [f["transcript_id"] for f in summary["folds"]] == ["ev01", "ev02", "ev03"]
    for f in summary["folds"]:
        assert set(f) == {"transcript_id", "chosen_c", "train_transcripts", "metrics"}
    json.dumps(summary)  # must be serializable


# ---------------------------------------------------------------------------
# eval parity through run files

def test_saved_runs_evaluate_identically(planted_cv, tmp_path):
    ws, result = planted_cv
    path = tmp_path / "runs.jsonl"
    save_runs(result.runs(), str(path))
    loaded = load_runs(str(path))
    metrics, excluded = aggregate_metrics(loaded, ws.gold_claims, ws.config.r_values)
    assert metrics == result.aggregate
    assert excluded == result.excluded
