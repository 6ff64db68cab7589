"""
Cross-validation, grids, ablations, baselines
=============================================

"""

# The full experiment protocol: leave-one-transcript-out CV with an
# inner C search, a Top-N grid over all strategies, per-family
# ablations, and the single-score baseline block.
import tempfile
from pathlib import Path

from checkrank import ExperimentConfig, load_workspace, metric_columns, run_cv
from checkrank.pipeline import render_text, run_ablations, run_table_grid
from checkrank.synth import make_corpus, write_corpus

data = Path(tempfile.mkdtemp(prefix="checkrank-demo-"))
paths = write_corpus(
    make_corpus(n_transcripts=4, n_sentences=12, n_relevant=3,
                n_extra_claims=12, pool=6, seed=5),
    data,
)

# Modest epochs and a single C keep the demo quick; defaults match the
# full protocol (200 epochs, C grid {0.1, 1, 10}).
base = dict(claims=paths["claims"], transcripts=paths["transcripts"],
            gold=paths["gold"], scores=paths["scores"],
            pool=6, n_candidates=3, epochs=60, c_grid=(1.0,))

ws = load_workspace(ExperimentConfig(strategy="max", **base))

# Leave-one-transcript-out: each fold trains on the rest, picks C on
# the training transcripts only, and ranks the held-out one.
result = run_cv(ws)
print("per-fold chosen C:", [f.chosen_c for f in result.folds])
print("aggregate:", {k: round(v, 3) for k, v in result.aggregate.items()})

# The Top-N grid re-runs CV per strategy and candidate depth; its first
# block is the single-score baselines. The ablation runner drops one
# feature family or claim field at a time.
grid = run_table_grid(ws, n_grid=(1, 3))
ablations = run_ablations(ws)

# render_text lays the blocks out as aligned text tables.
report = {
    "columns": metric_columns(ws.config.r_values),
    "blocks": [*grid["blocks"], *ablations["blocks"]],
}
print()
print(render_text(report))
