"""The 19-slot layout, pooling strategies, baselines, and ablation masks."""

import numpy as np
import pytest

from checkrank.bm25 import build_index, tokenize
from checkrank.corpus import ScoreTable, SentenceRec
from checkrank.errors import MissingScoreError, ValidationError
from checkrank.features import (
    ABLATIONS,
    BASELINE_NAMES,
    BASELINE_SLOTS,
    FAMILY_SLOTS,
    FIELD_SLOTS,
    N_SLOTS,
    NLI_ENTAIL_CONTRADICT,
    SLOT_INDEX,
    SLOT_NAMES,
    PairFeatures,
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
from tests.conftest import claim, dense_records


def pair(sid="s", cid="c", values=None, rng=None):
    if values is None:
        values = rng.uniform(-1, 1, N_SLOTS)
    return PairFeatures(sid, cid, np.asarray(values, dtype=float))


# ---------------------------------------------------------------------------
# layout

def test_slot_layout_is_frozen():
    assert N_SLOTS == 19
    assert len(SLOT_NAMES) == 19
    assert SLOT_NAMES[0] == "bm25_statement"
    assert SLOT_NAMES[3:6] == ("nli_entail", "nli_neutral", "nli_contradict")
    assert SLOT_NAMES[6] == "bertscore_f1"
    assert SLOT_NAMES[9] == "sbert_body_1"
    assert SLOT_NAMES[15] == "simcse_body_1"
    assert SLOT_INDEX["simcse_statement"] == 13
    # the five families tile all 19 slots; so do the three fields
    fam = sorted(i for slots in FAMILY_SLOTS.values() for i in slots)
    fld = sorted(i for slots in FIELD_SLOTS.values() for i in slots)
    assert fam == list(range(19)) and fld == list(range(19))


def test_pair_features_validation(rng):
    with pytest.raises(ValidationError, match="19"):
        PairFeatures("s", "c", np.zeros(18))
    bad = np.zeros(N_SLOTS)
    bad[4] = np.nan
    with pytest.raises(ValidationError, match="non-finite"):
        PairFeatures("s", "c", bad)


# ---------------------------------------------------------------------------
# assembly

def fixture_table():
    return ScoreTable(
        dense_records("s0", "c1", sbert_body_top=(0.8, 0.6), simcse_body_top=(0.9,))
    )


def test_assemble_pair_fills_all_slots():
    claims = [claim("c1", statement="taxes fund the wall", title="wall title",
                    body="body about the wall"),
              claim("c2", statement="other topic", title="other", body="unrelated body")]
    index = build_index(claims)
    sent = SentenceRec("s0", "t", 0, text="they said taxes fund the wall")
    got = assemble_pair(sent, claims[0], index, fixture_table())
    q = tokenize(sent.text)
    assert got.values[0] == index.score(q, "statement", "c1")
    assert got.values[1] == index.score(q, "title", "c1")
    assert got.values[2] == index.score(q, "body", "c1")
    assert got.values[0] > 0
    np.testing.assert_allclose(got.values[3:9], [0.7, 0.2, 0.1, 0.5, 0.4, 0.3])
    # body top-4 blocks pad by repeating the last available value
    np.testing.assert_allclose(got.values[9:13], [0.8, 0.6, 0.6, 0.6])
    np.testing.assert_allclose(got.values[13:15], [0.45, 0.35])
    np.testing.assert_allclose(got.values[15:19], [0.9, 0.9, 0.9, 0.9])


def test_assemble_pair_no_lexical_overlap_zeroes_bm25_only():
    claims = [claim("c1", statement="economic growth", title="growth", body="growth story")]
    index = build_index(claims)
    sent = SentenceRec("s0", "t", 0, text="完全 different words entirely")
    table = ScoreTable(dense_records("s0", "c1"))
    got = assemble_pair(sent, claims[0], index, table)
    assert got.values[0] == got.values[1] == got.values[2] == 0.0
    assert got.values[3] == 0.7  # dense slots unchanged


def test_assemble_pair_strict_vs_lenient():
    claims = [claim("c1")]
    index = build_index(claims)
    sent = SentenceRec("s9", "t", 0, text="no scores for this sentence")
    table = fixture_table()
    with pytest.raises(MissingScoreError, match=r"s9.*c1.*nli_entail"):
        assemble_pair(sent, claims[0], index, table)
    before = table.lenient_misses
    got = assemble_pair(sent, claims[0], index, table, lenient=True)
    assert np.all(got.values[3:] == 0.0)
    assert table.lenient_misses == before + 10


# ---------------------------------------------------------------------------
# candidates

def test_candidates_order_and_limits():
    claims = [claim("c1", body="tax cut tax plan"), claim("c2", body="tax plan"),
              claim("c3", body="weather")]
    index = build_index(claims)
    sent = SentenceRec("s0", "t", 0, text="the tax plan")
    # c2 wins on length normalization: both query terms, half the body length
    ranked = index.retrieve(tokenize(sent.text), "body", 10)
    assert candidates(sent, index, 10) == [cid for cid, _ in ranked] == ["c2", "c1"]
    assert candidates(sent, index, 1) == ["c2"]
    off_topic = SentenceRec("s1", "t", 1, text="nothing matches here")
    assert candidates(off_topic, index, 10) == []


# ---------------------------------------------------------------------------
# concat pooling

def test_concat_dims_and_padding(rng):
    pairs = [pair(cid=f"c{i}", rng=rng) for i in range(3)]
    vec = pool_concat("s", pairs, 3, evidence=("c0", "c1", "c2"))
    assert vec.values.shape == (57,)
    for i, p in enumerate(pairs):
        np.testing.assert_array_equal(vec.values[i * 19:(i + 1) * 19], p.values)

    short = pool_concat("s", pairs[:1], 3)
    assert short.values.shape == (57,)
    assert np.all(short.values[19:] == 0.0)
    assert short.n_pooled == 1

    one = pool_concat("s", pairs[:1], 1)
    np.testing.assert_array_equal(one.values, pairs[0].values)

    for n in (1, 2, 5, 30):
        v = pool_concat("s", [], n)
        assert v.values.shape == (19 * n,) and v.n_pooled == 0


def test_concat_rejects_overflow(rng):
    pairs = [pair(cid=f"c{i}", rng=rng) for i in range(4)]
    with pytest.raises(ValidationError, match="exceed"):
        pool_concat("s", pairs, 3)


def test_concat_order_sensitivity(rng):
    a, b = pair(cid="a", rng=rng), pair(cid="b", rng=rng)
    fwd = pool_concat("s", [a, b], 2)
    rev = pool_concat("s", [b, a], 2)
    assert not np.array_equal(fwd.values, rev.values)
    same = pair(cid="b", values=a.values.copy())
    assert np.array_equal(
        pool_concat("s", [a, same], 2).values, pool_concat("s", [same, a], 2).values
    )


# ---------------------------------------------------------------------------
# max pooling

def test_max_pool_worked_examples():
    base = np.zeros(19)
    vals = []
    for v in (0.2, 0.5, 0.4):
        row = base.copy()
        row[0] = v
        vals.append(pair(values=row))
    assert pool_max("s", vals, 3).values[0] == 0.5

    a = base.copy(); a[0] = 1.0
    b = base.copy(); b[1] = 1.0
    got = pool_max("s", [pair(values=a), pair(values=b)], 2).values
    assert got[0] == 1.0 and got[1] == 1.0  # elementwise, not per-candidate

    single = pair(values=np.linspace(-1, 1, 19))
    np.testing.assert_array_equal(pool_max("s", [single], 5).values, single.values)

    empty = pool_max("s", [], 5)
    assert np.all(empty.values == 0.0) and empty.n_pooled == 0
    assert empty.values.shape == (19,)


def test_max_pool_uses_only_first_n(rng):
    pairs = [pair(cid=f"c{i}", rng=rng) for i in range(6)]
    got = pool_max("s", pairs, 2)
    expected = np.maximum(pairs[0].values, pairs[1].values)
    np.testing.assert_array_equal(got.values, expected)
    assert got.n_pooled == 2


def test_max_pool_dominance_and_source(rng):
    for _ in range(200):
        k = int(rng.integers(1, 7))
        pairs = [pair(cid=f"c{i}", rng=rng) for i in range(k)]
        pooled = pool_max("s", pairs, k).values
        stacked = np.stack([p.values for p in pairs])
        assert np.all(pooled[None, :] >= stacked)          # dominance
        assert np.all((pooled[None, :] == stacked).any(0))  # each slot from some candidate


# ---------------------------------------------------------------------------
# half-true filtering

def truth_map(*items):
    return {cid: claim(cid, truth=t) for cid, t in items}


def test_filter_half_true_worked():
    claims_by_id = truth_map(("c1", "false"), ("c2", "half-true"), ("c3", "true"))
    pairs = [pair(cid=c, values=np.zeros(19)) for c in ("c1", "c2", "c3")]
    got = filter_half_true(pairs, claims_by_id)
    assert [p.claim_id for p in got] == ["c1", "c3"]

    all_half = truth_map(("c1", "half-true"), ("c2", "half-true"))
    assert filter_half_true(pairs[:2], all_half) == []

    none_half = truth_map(("c1", "false"), ("c2", "true"), ("c3", "mostly-true"))
    assert filter_half_true(pairs, none_half) == pairs

    with pytest.raises(ValidationError, match="resolve"):
        filter_half_true(pairs, {})


def test_filtering_never_raises_any_pooled_slot(rng):
    # on the real feature domain (every slot >= 0) dropping candidates can
    # only lower the elementwise max, even when the filter empties the pool
    truths = ("true", "false", "half-true", "mostly-true", "pants-on-fire")
    for _ in range(200):
        k = int(rng.integers(1, 7))
        pairs = [pair(cid=f"c{i}", values=rng.uniform(0, 1, 19)) for i in range(k)]
        claims_by_id = {
            f"c{i}": claim(f"c{i}", truth=str(rng.choice(truths))) for i in range(k)
        }
        plain = pool_max("s", pairs, k).values
        skipped = pool_max("s", filter_half_true(pairs, claims_by_id), k).values
        assert np.all(skipped <= plain)


# ---------------------------------------------------------------------------
# baselines

def test_baseline_names_and_slots():
    assert len(BASELINE_NAMES) == 14
    assert NLI_ENTAIL_CONTRADICT in BASELINE_NAMES
    assert set(BASELINE_SLOTS) == set(BASELINE_NAMES) - {NLI_ENTAIL_CONTRADICT}
    assert BASELINE_SLOTS["sbert_body"] == 9
    assert BASELINE_SLOTS["simcse_body"] == 15
    assert BASELINE_SLOTS["bm25_statement"] == 0


def test_baseline_pair_score_slot_mapping():
    values = np.arange(19.0)
    for name, slot in BASELINE_SLOTS.items():
        assert baseline_pair_score(values, name) == float(slot)
    assert baseline_pair_score(values, NLI_ENTAIL_CONTRADICT) == 3.0 + 5.0
    with pytest.raises(ValidationError, match="unknown baseline"):
        baseline_pair_score(values, "tfidf")


def test_baseline_score_takes_true_max():
    rows = [np.zeros(19) for _ in range(3)]
    for row, v in zip(rows, (0.1, 0.9, 0.3)):
        row[7] = v
    assert baseline_score(rows, "sbert_statement") == 0.9

    negative = [np.full(19, -0.5), np.full(19, -0.2)]
    assert baseline_score(negative, "simcse_title") == -0.2  # negatives survive

    assert baseline_score([], "sbert_statement") == 0.0
    assert baseline_score([rows[1]], "sbert_statement") == 0.9


# ---------------------------------------------------------------------------
# ablation masks

def test_ablation_catalogue():
    assert ABLATIONS == (
        "bertscore", "nli", "simcse", "sbert", "bm25", "title", "statement", "body",
    )
    assert ablation_mask(None).all()
    with pytest.raises(ValidationError, match="unknown ablation"):
        ablation_mask("tfidf")


@pytest.mark.parametrize("name", ABLATIONS)
def test_ablation_masks_drop_exactly_their_slots(name):
    keep = ablation_mask(name)
    drop = FAMILY_SLOTS.get(name) or FIELD_SLOTS[name]
    assert keep.shape == (19,)
    assert not keep[list(drop)].any()
    kept = [i for i in range(19) if i not in drop]
    assert keep[kept].all()


def test_apply_mask_zeroes_dropped_slots(rng):
    p = pair(rng=rng)
    keep = ablation_mask("nli")
    got = apply_mask(p, keep)
    assert np.all(got.values[3:6] == 0.0)
    others = [i for i in range(19) if i not in (3, 4, 5)]
    np.testing.assert_array_equal(got.values[others], p.values[others])
    assert apply_mask(p, ablation_mask(None)) is p
