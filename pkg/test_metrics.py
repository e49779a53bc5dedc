import math

import numpy as np
import pytest

from grouprec.evaluation import HeldOutRelevance, dcg, group_dcg, psr
from grouprec.ratings import build_ratings


def _held_out(triples, threshold=4.0, **shape):
    R = build_ratings(triples, **shape)
    return HeldOutRelevance(R.with_test_mask(np.ones(R.nnz, dtype=bool)), threshold)


def _direct_dcg(recommended, ratings):
    return sum((2 ** ratings.get(item, 0) - 1) / math.log2(p + 2) for p, item in enumerate(recommended))


def _direct_psr(members, recommended, test, n_plus, beta, threshold):
    num = den = 0.0
    for u in members:
        for item, rating in test.get(u, {}).items():
            if rating >= threshold:
                w = n_plus[item] ** -beta
                den += w
                num += w if item in recommended else 0.0
    return None if den == 0 else (1.0 / len(members)) * num / den


def test_single_item_dcg():
    assert dcg([7], {7: 5}) == 31.0
    assert dcg([1, 2, 3], {}) == 0.0


def test_perfect_recall_psr_carries_group_factor():
    rel = _held_out([(0, 0, 5), (0, 1, 4), (1, 1, 5), (1, 2, 2)])
    assert psr((0, 1), [0, 1], rel) == pytest.approx(0.5)
    assert psr((0, 1), [2, 3], rel) == 0.0


def test_psr_undefined_without_relevant_items():
    rel = _held_out([(0, 0, 2), (1, 1, 3)])
    assert psr((0, 1), [0, 1], rel) is None


def test_psr_with_beta_near_zero_is_plain_recall():
    rel = _held_out([(0, 0, 5), (0, 1, 4), (0, 2, 5), (1, 0, 4)])
    # relevant pairs: (0,0), (0,1), (0,2), (1,0); item 0 is recommended
    assert psr((0, 1), [0], rel, beta=1e-12) == pytest.approx(0.5 * 2 / 4)


def test_group_dcg_averages_members():
    rel = _held_out([(0, 0, 5), (1, 1, 3)])
    expected = (31.0 + 7.0 / math.log2(3)) / 2
    assert group_dcg((0, 1), [0, 1], rel) == pytest.approx(expected)


def test_metrics_match_direct_formulas(rng):
    for _ in range(100):
        n_users, n_items = 4, 12
        triples = {}
        for _ in range(int(rng.integers(5, 30))):
            triples[(int(rng.integers(n_users)), int(rng.integers(n_items)))] = int(rng.integers(1, 6))
        rel = _held_out([(u, i, r) for (u, i), r in triples.items()], n_users=n_users, n_items=n_items)

        test = {}
        for (u, i), r in triples.items():
            test.setdefault(u, {})[i] = r
        n_plus = np.zeros(n_items)
        for (u, i), r in triples.items():
            if r >= 4:
                n_plus[i] += 1

        members = tuple(int(u) for u in rng.choice(n_users, size=2, replace=False))
        recommended = [int(i) for i in rng.choice(n_items, size=int(rng.integers(1, 6)), replace=False)]
        beta = float(rng.uniform(0.1, 0.9))

        for u in members:
            assert dcg(recommended, rel.test_ratings(u)) == pytest.approx(_direct_dcg(recommended, test.get(u, {})), rel=1e-12, abs=1e-12)
        expected = _direct_psr(members, set(recommended), test, n_plus, beta, 4.0)
        value = psr(members, recommended, rel, beta)
        if expected is None:
            assert value is None
        else:
            assert value == pytest.approx(expected, rel=1e-12, abs=1e-12)


def test_swapping_a_better_item_forward_never_lowers_dcg(rng):
    for _ in range(300):
        items = rng.permutation(12)[: int(rng.integers(2, 9))].tolist()
        ratings = {int(i): int(rng.integers(0, 6)) for i in rng.choice(12, size=6, replace=False)}
        p, q = sorted(rng.choice(len(items), size=2, replace=False).tolist())
        if ratings.get(items[q], 0) < ratings.get(items[p], 0):
            continue
        swapped = list(items)
        swapped[p], swapped[q] = swapped[q], swapped[p]
        assert dcg(swapped, ratings) >= dcg(items, ratings) - 1e-12


def test_moving_the_best_item_first_raises_dcg():
    ratings = {1: 2, 2: 5}
    assert dcg([2, 1], ratings) > dcg([1, 2], ratings)
