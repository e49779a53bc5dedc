"""Holdout protocol and group formation."""
import numpy as np
import pytest

from grouprec.errors import EvaluationError
from grouprec.evaluation import holdout_split, make_groups
from grouprec.evaluation.holdout import holdout_size
from grouprec.ratings import FeatureMatrix, build_ratings
from grouprec.schemas.config import GroupSpec


def _dense(n_users, n_items, rng):
    return build_ratings(
        [(u, i, int(rng.integers(1, 6))) for u in range(n_users) for i in range(n_items) if rng.uniform() < 0.6],
        n_users=n_users, n_items=n_items,
    )


def test_holdout_size_rounds_up():
    assert holdout_size(10, 0.3) == 3
    assert holdout_size(3670, 0.3) == 1101
    assert holdout_size(3, 0.3) == 1


def test_one_of_three_items_is_held_out():
    R = build_ratings([(0, 0, 5), (0, 1, 4), (1, 1, 3), (1, 2, 2), (2, 0, 1)])
    split = holdout_split(R, 0.3, seed=11)
    test_items = set(split.items[split.test_mask].tolist())
    assert len(test_items) == 1
    (item,) = test_items
    assert split.test_mask.tolist() == (split.items == item).tolist()


def test_holdout_partitions_entries_and_is_deterministic(rng):
    R = _dense(20, 30, rng)
    first = holdout_split(R, 0.3, seed=5)
    second = holdout_split(R, 0.3, seed=5)
    assert np.array_equal(first.test_mask, second.test_mask)
    assert first.n_train + first.n_test == R.nnz
    assert len(set(first.items[first.test_mask].tolist())) <= holdout_size(30, 0.3)
    assert set(first.items[first.test_mask].tolist()).isdisjoint(first.items[~first.test_mask].tolist())


def test_holdout_rejects_bad_fraction(rng):
    R = _dense(5, 5, rng)
    with pytest.raises(EvaluationError):
        holdout_split(R, 1.0, seed=0)
    with pytest.raises(EvaluationError):
        holdout_split(build_ratings([(0, 0, 4)]), 0.5, seed=0)


def test_random_groups(rng):
    R = _dense(30, 10, rng)
    features = FeatureMatrix(rng.uniform(0, 1, size=(30, 4)))
    formation = make_groups(GroupSpec(kind="random", size=4, count=25, seed=3), features, R)
    assert len(formation.groups) == 25
    for group in formation.groups:
        assert len(set(group.members)) == 4
        for user, observed in zip(group.members, group.observed):
            items, ratings = R.row_arrays(user, "train")
            assert observed == tuple(zip(items.tolist(), ratings.tolist()))


def test_similar_groups_respect_the_threshold(rng):
    R = _dense(40, 10, rng)
    features = FeatureMatrix(rng.uniform(0, 1, size=(40, 3)))
    spec = GroupSpec(kind="similar", size=4, count=10, sim_threshold=0.8, seed=2)
    formation = make_groups(spec, features, R)
    values = features.values / np.linalg.norm(features.values, axis=1, keepdims=True)
    for group in formation.groups:
        members = list(group.members)
        sim = values[members] @ values[members].T
        assert (sim[~np.eye(4, dtype=bool)] > 0.8).all()
    assert len(formation.groups) + formation.failures == 10


def test_zero_threshold_behaves_like_random_pairs(rng):
    R = _dense(10, 5, rng)
    features = FeatureMatrix(rng.uniform(0.1, 1, size=(10, 2)))
    formation = make_groups(GroupSpec(kind="similar", size=2, count=20, sim_threshold=0.0, seed=1), features, R)
    assert len(formation.groups) == 20
    assert formation.failures == 0


def test_large_similar_groups_are_scarcer(rng):
    R = _dense(60, 5, rng)
    features = FeatureMatrix(rng.uniform(0, 1, size=(60, 6)))
    budget = dict(count=30, sim_threshold=0.85, max_attempts=3, max_draws=40)
    pairs = make_groups(GroupSpec(kind="similar", size=2, seed=4, **budget), features, R)
    eights = make_groups(GroupSpec(kind="similar", size=8, seed=4, **budget), features, R)
    assert len(eights.groups) < len(pairs.groups)


def test_default_counts_follow_the_protocol_table():
    assert GroupSpec(kind="random", size=2).resolved_count() == 294
    assert GroupSpec(kind="similar", size=8).resolved_count() == 10


def test_group_size_larger_than_population(rng):
    R = _dense(3, 5, rng)
    with pytest.raises(EvaluationError):
        make_groups(GroupSpec(size=4, count=1), FeatureMatrix(np.ones((3, 2))), R)
