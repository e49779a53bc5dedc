"""Score-aggregation baselines over predicted ratings.

All strategies rank the candidate items of a group by one aggregate of the
members' predicted scores and return the top k, ties broken by the lowest
item id.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Sequence

import numpy as np

from .errors import BaselineError
from .factorization import predict
from .ratings import FeatureMatrix, Group

logger = logging.getLogger(__name__)


class AggregationStrategy(str, Enum):
    AVERAGE_MISERY = "am"
    FM = "fm"
    LEAST_MISERY = "lm"
    MOST_PLEASURE = "mp"
    PLURALITY = "plurality"


@dataclass(frozen=True, eq=False)
class PredictedScores:
    """Predicted ratings of the group members (rows) for the candidates (columns)."""

    members: tuple
    candidates: np.ndarray
    scores: np.ndarray

    def __post_init__(self):
        if self.scores.shape != (len(self.members), len(self.candidates)):
            raise BaselineError("Score block does not match members x candidates")
        if not np.isfinite(self.scores).all():
            raise BaselineError("Predicted scores must be finite")


def predicted_scores(
    user_features: FeatureMatrix,
    item_features: FeatureMatrix,
    group: Group,
    candidates: np.ndarray,
    clamp: bool = True,
) -> PredictedScores:
    members = np.array(group.members, dtype=np.int64)
    candidates = np.asarray(candidates, dtype=np.int64)
    scores = predict(user_features, item_features, members, candidates, clamp=clamp)
    return PredictedScores(tuple(group.members), candidates, scores)


def top_k(candidates: np.ndarray, values: np.ndarray, k: int) -> List[int]:
    """Candidates sorted by value descending, then id ascending; first k."""
    if k < 1:
        raise BaselineError("k must be positive", k=k)
    if not len(candidates):
        raise BaselineError("Empty candidate set")
    order = np.lexsort((candidates, -np.asarray(values, dtype=np.float64)))
    return candidates[order[:k]].tolist()


def relevance(scores: PredictedScores) -> np.ndarray:
    """rel(G, i): sum of the members' scores."""
    return scores.scores.sum(axis=0)


def disagreement(scores: PredictedScores) -> np.ndarray:
    """dis(G, i): average absolute pairwise difference over unordered member pairs."""
    size = len(scores.members)
    if size < 2:
        return np.zeros(len(scores.candidates))
    s = scores.scores
    total = np.zeros(s.shape[1])
    for u in range(size - 1):
        total += np.abs(s[u + 1:] - s[u]).sum(axis=0)
    return 2.0 * total / (size * (size - 1))


def average_misery(scores: PredictedScores, group: Group, k: int) -> List[int]:
    return top_k(scores.candidates, relevance(scores), k)


def fm(scores: PredictedScores, group: Group, k: int, lam: float = 0.5) -> List[int]:
    """lam * rel + (1 - lam) * (1 - dis)."""
    if not 0.0 <= lam <= 1.0:
        raise BaselineError("lambda must lie in [0, 1]", lam=lam)
    values = lam * relevance(scores) + (1.0 - lam) * (1.0 - disagreement(scores))
    return top_k(scores.candidates, values, k)


def least_misery(scores: PredictedScores, group: Group, k: int) -> List[int]:
    return top_k(scores.candidates, scores.scores.min(axis=0), k)


def most_pleasure(scores: PredictedScores, group: Group, k: int) -> List[int]:
    return top_k(scores.candidates, scores.scores.max(axis=0), k)


def plurality(scores: PredictedScores, group: Group, k: int) -> List[int]:
    """Rank by how many members have the item among their top-scored candidates."""
    if not len(scores.candidates):
        raise BaselineError("Empty candidate set")
    best = scores.scores.max(axis=1, keepdims=True)
    votes = (scores.scores == best).sum(axis=0)
    return top_k(scores.candidates, votes, k)


def aggregate(strategy: str, scores: PredictedScores, group: Group, k: int, lam: float = 0.5) -> List[int]:
    strategy = AggregationStrategy(strategy)
    if strategy is AggregationStrategy.FM:
        return fm(scores, group, k, lam)
    handlers = {
        AggregationStrategy.AVERAGE_MISERY: average_misery,
        AggregationStrategy.LEAST_MISERY: least_misery,
        AggregationStrategy.MOST_PLEASURE: most_pleasure,
        AggregationStrategy.PLURALITY: plurality,
    }
    return handlers[strategy](scores, group, k)


def candidate_items(n_items: int, group: Group) -> np.ndarray:
    """Items none of the members rated in train."""
    mask = np.ones(n_items, dtype=bool)
    mask[group.observed_items()] = False
    return np.flatnonzero(mask)


def oracle_scores(members: Sequence[int], candidates: Sequence[int], scores: np.ndarray) -> PredictedScores:
    return PredictedScores(tuple(members), np.asarray(candidates, dtype=np.int64), np.asarray(scores, dtype=np.float64))
