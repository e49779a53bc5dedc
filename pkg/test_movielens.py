"""Desk-scale reproduction on MovieLens 1M; set GROUPREC_MOVIELENS to ratings.dat to enable."""
import pytest

from grouprec import config
from grouprec.ingest import ingest
from grouprec.pipeline import run_experiment
from grouprec.ratings import filter_min_ratings
from grouprec.schemas.config import ExperimentConfig

pytestmark = pytest.mark.skipif(
    not config.MOVIELENS_PATH,
    reason="GROUPREC_MOVIELENS is not set; MovieLens ordering checks skipped",
)


def test_filtered_dataset_size():
    R, report = ingest(config.MOVIELENS_PATH, "movielens-dat")
    assert report.malformed == 0
    filtered, _ = filter_min_ratings(R, config.DEFAULT_MIN_RATINGS)
    assert filtered.n_users == pytest.approx(2945, rel=0.01)
    assert filtered.n_items == pytest.approx(3670, rel=0.01)


def _means(metrics, kind, size):
    cell = metrics[(metrics["group_kind"] == kind) & (metrics["group_size"] == size) & (metrics["k"] == 5)]
    return cell.groupby("algorithm")[["dcg", "psr"]].mean()


def test_consensus_ranks_above_score_aggregation(tmp_path):
    cfg = ExperimentConfig(
        dataset=config.MOVIELENS_PATH,
        groups=[{"kind": "random", "size": 4}, {"kind": "similar", "size": 4}],
        evaluation={"k_list": [5]},
        out=str(tmp_path),
    )
    metrics = run_experiment(cfg).metrics

    random_groups = _means(metrics, "random", 4)
    for saga_variant in ("saga-linear", "saga-concave"):
        for baseline in ("am", "fm"):
            assert random_groups.loc[saga_variant, "dcg"] >= random_groups.loc[baseline, "dcg"]
            assert random_groups.loc[saga_variant, "psr"] >= random_groups.loc[baseline, "psr"]

    similar_groups = _means(metrics, "similar", 4)
    for other in ("am", "fm", "saga-linear"):
        assert similar_groups.loc["saga-concave", "dcg"] >= similar_groups.loc[other, "dcg"]
