import logging
import threading
from enum import Enum
from typing import Dict, Iterable, Optional

import numpy as np

from .ratings import FeatureMatrix, Group

logger = logging.getLogger(__name__)

# exp() underflows to 0 for far apart items; affinities stay strictly positive
_TINY = np.finfo(np.float64).tiny


def rbf_row(features: np.ndarray, i: int, gamma: float) -> np.ndarray:
    sq_dist = np.sum((features - features[i]) ** 2, axis=1)
    row = np.maximum(np.exp(-gamma * sq_dist), _TINY)
    row[i] = 1.0
    return row


class ItemAffinity:
    """RBF item-item affinity W_ij = exp(-gamma |x_i - x_j|^2).

    W is never materialized; rows are computed on demand and cached.
    The cache is filled once per row under a lock, so concurrent readers
    see a single consistent array.
    """

    def __init__(self, item_features: FeatureMatrix, gamma: float):
        if gamma <= 0:
            raise ValueError(f"gamma must be positive, got {gamma}")
        self.item_features = item_features
        self.gamma = float(gamma)
        self._cache: Dict[int, np.ndarray] = {}
        self._lock = threading.Lock()

    @property
    def n_items(self) -> int:
        return self.item_features.rows

    def row(self, i: int) -> np.ndarray:
        cached = self._cache.get(i)
        if cached is not None:
            return cached
        with self._lock:
            cached = self._cache.get(i)
            if cached is None:
                if not 0 <= i < self.n_items:
                    raise IndexError(f"item {i} out of range [0, {self.n_items})")
                cached = rbf_row(self.item_features.values, i, self.gamma)
                cached.setflags(write=False)
                self._cache[i] = cached
        return cached

    def rows(self, items: Iterable[int]) -> np.ndarray:
        items = list(items)
        if not items:
            return np.zeros((0, self.n_items))
        return np.vstack([self.row(int(i)) for i in items])

    def clear(self) -> None:
        with self._lock:
            self._cache.clear()


def item_affinity_row(W: ItemAffinity, i: int) -> np.ndarray:
    return W.row(i)


class AffinityMode(str, Enum):
    COSINE = "cosine"
    INDICATOR = "indicator"
    IDENTITY = "identity"


def cosine_matrix(values: np.ndarray) -> np.ndarray:
    """Pairwise cosine of the rows; zero-norm rows get 0 against everything."""
    norms = np.linalg.norm(values, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    unit = values / safe[:, None]
    sim = np.clip(unit @ unit.T, -1.0, 1.0)
    nonzero = norms > 0
    sim[~nonzero, :] = 0.0
    sim[:, ~nonzero] = 0.0
    idx = np.flatnonzero(nonzero)
    sim[idx, idx] = 1.0
    return sim


class UserAffinity:
    """User-user affinity A in one of three modes.

    cosine: cos(y_u, y_v) of the user factors. indicator: 1 iff both users
    belong to the queried group. identity: A = I.
    """

    def __init__(self, user_features: Optional[FeatureMatrix] = None, mode: str = "cosine"):
        self.mode = AffinityMode(mode)
        if self.mode is AffinityMode.COSINE and user_features is None:
            raise ValueError("cosine user affinity needs user features")
        self.user_features = user_features

    def value(self, u: int, v: int, group: Optional[Group] = None) -> float:
        if self.mode is AffinityMode.IDENTITY:
            return 1.0 if u == v else 0.0
        if self.mode is AffinityMode.INDICATOR:
            members = set(group.members) if group is not None else set()
            return 1.0 if u in members and v in members else 0.0

        yu = self.user_features[u]
        yv = self.user_features[v]
        nu, nv = float(np.linalg.norm(yu)), float(np.linalg.norm(yv))
        if nu == 0.0 or nv == 0.0:
            return 0.0
        if u == v:
            return 1.0
        return float(np.clip(yu @ yv / (nu * nv), -1.0, 1.0))

    def group_matrix(self, group: Group) -> np.ndarray:
        """A restricted to the group's members, in member order."""
        members = list(group.members)
        if self.mode is AffinityMode.COSINE:
            return cosine_matrix(self.user_features[np.array(members)])
        size = len(members)
        if self.mode is AffinityMode.INDICATOR:
            return np.ones((size, size))
        return np.eye(size)


def user_affinity(A: UserAffinity, u: int, v: int, group: Optional[Group] = None) -> float:
    return A.value(u, v, group)
