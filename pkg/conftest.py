import os
import sys

import numpy as np
import pytest

# Add the repo directory to Python path
sys.path.insert(0, os.path.dirname(__file__))

from grouprec.consensus import GscoreState  # noqa: E402
from grouprec.ratings import Group  # noqa: E402


def random_state(rng: np.random.Generator, n_items: int, group_size: int, max_observed: int, symmetric_a: bool = True):
    """Random consensus instance: non-negative W (n x n), A (|G| x |G|), ratings 1-5."""
    observed = []
    for _ in range(group_size):
        count = int(rng.integers(1, max_observed + 1))
        items = rng.choice(n_items, size=count, replace=False)
        observed.append(tuple((int(i), int(rng.integers(1, 6))) for i in sorted(items)))
    group = Group(members=tuple(range(group_size)), observed=tuple(observed))

    W = rng.uniform(0.0, 1.0, size=(n_items, n_items))
    np.fill_diagonal(W, 1.0)
    A = rng.uniform(0.0, 1.0, size=(group_size, group_size))
    if symmetric_a:
        A = (A + A.T) / 2.0
    np.fill_diagonal(A, 1.0)
    return GscoreState.from_group(group, W, A)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
