"""Clustered synthetic ratings, used when MovieLens is not at hand."""
import logging
from typing import List, Tuple

import numpy as np

from .ratings import FeatureMatrix, Group

logger = logging.getLogger(__name__)


def clustered_ratings(
    n_users: int = 120,
    n_clusters: int = 3,
    items_per_cluster: int = 20,
    ratings_per_user: int = 25,
    seed: int = 0,
) -> List[Tuple[int, int, int]]:
    """Users favour one item cluster: 4-5 stars inside it, 1-3 elsewhere."""
    rng = np.random.default_rng(seed)
    n_items = n_clusters * items_per_cluster
    ratings_per_user = min(ratings_per_user, n_items)
    triples = []
    for user in range(n_users):
        home = user % n_clusters
        items = np.sort(rng.choice(n_items, size=ratings_per_user, replace=False))
        for item in items.tolist():
            if item // items_per_cluster == home:
                rating = int(rng.integers(4, 6))
            else:
                rating = int(rng.integers(1, 4))
            triples.append((user, item, rating))
    logger.info("Generated %d synthetic ratings (%d users, %d items)", len(triples), n_users, n_items)
    return triples


def cluster_features(
    n_clusters: int = 3,
    items_per_cluster: int = 10,
    spread: float = 0.05,
    seed: int = 0,
) -> FeatureMatrix:
    """Item features around well separated one-hot centers (scaled by 10)."""
    rng = np.random.default_rng(seed)
    centers = 10.0 * np.eye(n_clusters)
    values = np.repeat(centers, items_per_cluster, axis=0)
    values += rng.uniform(0.0, spread, size=values.shape)
    return FeatureMatrix(values)


def three_cluster_group(items_per_cluster: int = 10, observed_per_user: int = 3) -> Group:
    """Three users, each rating the first items of one cluster with 5 stars."""
    members = (0, 1, 2)
    observed = tuple(
        tuple((cluster * items_per_cluster + j, 5) for j in range(observed_per_user))
        for cluster in range(3)
    )
    return Group(members=members, observed=observed)
