"""Ranking metrics for group recommendations.

DCG uses the graded held-out rating as relevance (0 for unrated items).
PSR down-weights popular items by (1 / N_i+)^beta, where N_i+ counts the
relevant held-out ratings of item i.
"""
import logging
import math
from typing import Dict, Mapping, Optional, Sequence

import numpy as np

from ..ratings import RatingsMatrix

logger = logging.getLogger(__name__)


class HeldOutRelevance:
    """Per-user view of the test split: graded ratings and relevant items."""

    def __init__(self, R: RatingsMatrix, threshold: float = 4.0):
        self.R = R
        self.threshold = float(threshold)
        relevant = R.test_mask & (R.ratings >= self.threshold)
        self.n_plus = np.bincount(R.items[relevant], minlength=R.n_items)
        self._ratings: Dict[int, Dict[int, int]] = {}

    def test_ratings(self, user: int) -> Dict[int, int]:
        cached = self._ratings.get(user)
        if cached is None:
            items, ratings = self.R.row_arrays(user, "test")
            cached = dict(zip(items.tolist(), ratings.tolist()))
            self._ratings[user] = cached
        return cached

    def relevant_items(self, user: int) -> set:
        return {item for item, rating in self.test_ratings(user).items() if rating >= self.threshold}


def dcg(recommended: Sequence[int], relevance: Mapping[int, float], log_base: float = 2.0) -> float:
    """sum over positions p = 1..k of (2^r - 1) / log_base(p + 1)."""
    total = 0.0
    for pos, item in enumerate(recommended, start=1):
        r = relevance.get(item, 0)
        total += (2.0 ** r - 1.0) / (math.log(pos + 1) / math.log(log_base))
    return total


def group_dcg(members: Sequence[int], recommended: Sequence[int], rel: HeldOutRelevance, log_base: float = 2.0) -> float:
    """DCG averaged over the group members."""
    return float(np.mean([dcg(recommended, rel.test_ratings(u), log_base) for u in members]))


def psr(members: Sequence[int], recommended: Sequence[int], rel: HeldOutRelevance, beta: float = 0.5) -> Optional[float]:
    """Popularity-stratified recall of a group; None when no member has a relevant test item.

    The leading 1 / |G| multiplies the ratio of the summed weights.
    """
    recommended = set(recommended)
    num = 0.0
    den = 0.0
    for user in members:
        for item in rel.relevant_items(user):
            weight = (1.0 / rel.n_plus[item]) ** beta
            den += weight
            if item in recommended:
                num += weight
    if den == 0.0:
        return None
    return num / den / len(members)
