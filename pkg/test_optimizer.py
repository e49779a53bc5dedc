import math
from unittest.mock import patch

import numpy as np
import pytest

from conftest import random_state
from grouprec.consensus import GscoreState, evaluate_set
from grouprec.errors import OptimizerError
from grouprec.optimizer import LazyQueue, eager_greedy, exhaustive, greedy_certificate, saga
from grouprec.ratings import Group
from grouprec.schemas.config import SaturationSpec

CONCAVE = SaturationSpec(item_fn="log1p", user_fn="sqrt")
LINEAR = SaturationSpec(item_fn="log1p", user_fn="identity")
MODULAR = SaturationSpec(item_fn="identity", user_fn="identity")


def test_queue_orders_by_gain_then_lowest_id():
    queue = LazyQueue.from_gains(np.array([4, 2, 9]), np.array([1.0, 3.0, 3.0]))
    assert queue.pop().item == 2
    assert queue.pop().item == 9
    queue.push(1, 0.5, stamp=2)
    top = queue.peek()
    assert (top.item, top.stamp) == (4, 0)
    assert len(queue) == 2


def test_certificate_values():
    assert greedy_certificate(1) == 1.0
    assert greedy_certificate(2) == pytest.approx(0.75)
    assert greedy_certificate(1000) > 1 - 1 / math.e


def test_lazy_matches_eager(rng):
    for _ in range(500):
        n_items = int(rng.integers(8, 51))
        state = random_state(rng, n_items=n_items, group_size=int(rng.integers(1, 5)), max_observed=min(4, n_items // 5))
        sat = CONCAVE if rng.uniform() < 0.5 else LINEAR
        k = int(rng.integers(1, 6))
        lazy = saga(state, sat, k)
        eager = eager_greedy(state, sat, k)
        assert lazy.selected == eager.selected
        assert lazy.evaluations <= eager.evaluations
        assert lazy.objective == pytest.approx(eager.objective, rel=1e-12)
        assert state.selected == []


def test_small_instances_from_the_protocol(rng):
    for _ in range(100):
        state = random_state(rng, n_items=12, group_size=2, max_observed=3)
        lazy = saga(state, CONCAVE, 3)
        eager = eager_greedy(state, CONCAVE, 3)
        assert lazy.selected == eager.selected
        assert lazy.evaluations <= 12 * 3


def test_greedy_certificate_against_exhaustive(rng):
    for _ in range(200):
        state = random_state(rng, n_items=int(rng.integers(8, 16)), group_size=int(rng.integers(1, 4)), max_observed=2)
        sat = CONCAVE if rng.uniform() < 0.5 else LINEAR
        k = int(rng.integers(1, 5))
        if math.comb(len(state.candidates()), min(k, len(state.candidates()))) > 10 ** 5:
            continue
        result = saga(state, sat, k)
        best_set, best_value = exhaustive(state, sat, k)
        assert result.objective >= result.certificate * best_value - 1e-12
        assert result.objective <= best_value + 1e-12
        assert evaluate_set(state, sat, best_set) == pytest.approx(best_value, rel=1e-12)
        # sum of the k best singleton gains bounds the optimum from above
        assert result.online_bound >= best_value - 1e-9


def test_modular_config_is_top_k_by_closed_form(rng):
    for _ in range(100):
        group_size = int(rng.integers(2, 5))
        state = random_state(rng, n_items=25, group_size=group_size, max_observed=3)
        # indicator affinity: every member weighs |G| - 1
        state = GscoreState(
            state.members, state.observed_items, state.ratings,
            np.full(group_size, group_size - 1.0), state.w_rows,
        )
        k = int(rng.integers(1, 8))
        candidates = state.candidates()
        per_item = (group_size - 1.0) * (state.ratings @ state.w_rows[:, candidates]).sum(axis=0)
        order = np.lexsort((candidates, -per_item))
        expected = candidates[order[:k]].tolist()

        result = saga(state, MODULAR, k)
        assert result.selected == expected
        # gains never go stale: one evaluation per candidate
        assert result.evaluations == len(candidates)
        best_set, _ = exhaustive(state, MODULAR, k) if math.comb(len(candidates), k) <= 10 ** 5 else (None, None)
        if best_set is not None:
            assert sorted(best_set) == sorted(expected)


def test_budget_larger_than_candidates_returns_all():
    group = Group(members=(0, 1), observed=(((0, 5),), ((1, 3),)))
    rng = np.random.default_rng(1)
    W = rng.uniform(0.1, 1.0, size=(5, 5))
    state = GscoreState.from_group(group, W, np.ones((2, 2)))
    result = saga(state, CONCAVE, 10)
    assert sorted(result.selected) == [2, 3, 4]
    assert result.gains == sorted(result.gains, reverse=True)
    assert result.certificate == greedy_certificate(3)
    best_set, _ = exhaustive(state, CONCAVE, 3)
    assert sorted(best_set) == [2, 3, 4]


def test_k_one_is_singleton_argmax(rng):
    state = random_state(rng, n_items=20, group_size=3, max_observed=3)
    values = {int(e): evaluate_set(state, CONCAVE, [int(e)]) for e in state.candidates()}
    best = max(values, key=lambda e: (values[e], -e))
    assert saga(state, CONCAVE, 1).selected == [best]
    assert exhaustive(state, CONCAVE, 1)[0] == [best]


def test_optimizer_errors(rng):
    state = random_state(rng, n_items=10, group_size=2, max_observed=2)
    with pytest.raises(OptimizerError):
        saga(state, CONCAVE, 0)
    with pytest.raises(OptimizerError):
        exhaustive(random_state(rng, n_items=40, group_size=2, max_observed=2), CONCAVE, 10, cap=1000)

    full = Group(members=(0,), observed=(((0, 5), (1, 4)),))
    saturated = GscoreState.from_group(full, np.eye(2), np.ones((1, 1)))
    with pytest.raises(OptimizerError):
        saga(saturated, CONCAVE, 1)


def test_equal_refreshed_gain_yields_to_lower_item_id():
    group = Group(members=(0,), observed=(((0, 5),),))
    state = GscoreState.from_group(group, np.eye(6), np.ones((1, 1)))
    # item 4 looks better than item 3 at first, but both are worth 1.0 once item 5 is in
    first = {1: 0.1, 2: 0.1, 3: 1.0, 4: 2.0, 5: 3.0}
    later = {1: 0.1, 2: 0.1, 3: 1.0, 4: 1.0, 5: 0.0}

    def fixed_gains(state, sat, items):
        table = later if state.selected else first
        return np.array([table[int(i)] for i in items])

    with patch("grouprec.optimizer.marginal_gains", side_effect=fixed_gains):
        lazy = saga(state, LINEAR, 2)
        eager = eager_greedy(state, LINEAR, 2)
    assert lazy.selected == [5, 3]
    assert eager.selected == [5, 3]
    assert lazy.gains == [3.0, 1.0]
