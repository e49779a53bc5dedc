"""Group consensus score and its marginal gains.

    Gscore(S) = sum_u g_u( w_u * sum_{i in I_u} r_u^i * f(s_i) ),   s_i = sum_{j in S} W_ij

with w_u = sum_{l != u} A_ul for groups of two or more and w_u = 1 for a
single member. ``GscoreState`` keeps the running sums s_i over the group's
observed items so a gain costs one pass over those items.
"""
import logging
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .affinity import ItemAffinity, UserAffinity
from .errors import ConsensusStateError
from .ratings import Group
from .schemas.config import SaturationSpec

logger = logging.getLogger(__name__)

_GAIN_CHUNK = 1024


def user_weights(A_group: np.ndarray) -> np.ndarray:
    """w_u from the group-restricted affinity matrix (self-affinity excluded)."""
    A_group = np.asarray(A_group, dtype=np.float64)
    if A_group.shape[0] == 1:
        return np.ones(1)
    return A_group.sum(axis=1) - np.diag(A_group)


class GscoreState:
    """Running state of one group's consensus score.

    ``ratings`` is a dense (members x observed items) block holding r_u^i
    (0 where u did not rate i), ``w_rows`` holds the W rows of the observed
    items, ``s`` the running sums over the current selection.
    """

    def __init__(
        self,
        members: Sequence[int],
        observed_items: np.ndarray,
        ratings: np.ndarray,
        weights: np.ndarray,
        w_rows: np.ndarray,
    ):
        self.members = tuple(int(u) for u in members)
        self.observed_items = np.asarray(observed_items, dtype=np.int64)
        self.ratings = np.asarray(ratings, dtype=np.float64)
        self.weights = np.asarray(weights, dtype=np.float64)
        self.w_rows = np.asarray(w_rows, dtype=np.float64)
        self.n_items = self.w_rows.shape[1]

        if self.ratings.shape != (len(self.members), len(self.observed_items)):
            raise ConsensusStateError("Ratings block does not match members x observed items")
        if self.w_rows.shape[0] != len(self.observed_items):
            raise ConsensusStateError("Need one affinity row per observed item")
        if (self.weights < 0).any() or (self.w_rows < 0).any():
            raise ConsensusStateError("Affinities must be non-negative")

        self.s = np.zeros(len(self.observed_items))
        self.selected = []
        self._blocked = np.zeros(self.n_items, dtype=bool)
        self._blocked[self.observed_items] = True

    @classmethod
    def from_group(
        cls,
        group: Group,
        W: Union[ItemAffinity, np.ndarray],
        A: Union[UserAffinity, np.ndarray],
    ) -> "GscoreState":
        """Build the state of ``group`` from item affinity W and user affinity A.

        W is an ``ItemAffinity`` or a full n x n matrix; A is a
        ``UserAffinity`` or the |G| x |G| matrix in member order.
        """
        observed = group.observed_items()
        col = {item: pos for pos, item in enumerate(observed.tolist())}
        ratings = np.zeros((group.size, len(observed)))
        for row, obs in enumerate(group.observed):
            for item, rating in obs:
                ratings[row, col[item]] = rating

        if isinstance(W, ItemAffinity):
            w_rows = W.rows(observed)
        else:
            W = np.asarray(W, dtype=np.float64)
            w_rows = W[observed] if len(observed) else np.zeros((0, W.shape[1]))
        A_group = A.group_matrix(group) if isinstance(A, UserAffinity) else np.asarray(A)

        return cls(group.members, observed, ratings, user_weights(A_group), w_rows)

    def copy(self) -> "GscoreState":
        clone = object.__new__(GscoreState)
        clone.__dict__.update(self.__dict__)
        clone.s = self.s.copy()
        clone.selected = list(self.selected)
        clone._blocked = self._blocked.copy()
        return clone

    def candidates(self) -> np.ndarray:
        """Items neither observed by the group nor already selected."""
        return np.flatnonzero(~self._blocked)

    def is_candidate(self, e: int) -> bool:
        return 0 <= e < self.n_items and not self._blocked[e]

    def _check_candidate(self, e: int) -> None:
        if not 0 <= e < self.n_items:
            raise ConsensusStateError("Item out of range", item=e, n_items=self.n_items)
        if self._blocked[e]:
            reason = "selected" if e in self.selected else "observed"
            raise ConsensusStateError(f"Item already {reason}", item=e)


def _item_fn(name: str):
    return np.log1p if name == "log1p" else (lambda x: x)


def _delta_f(name: str, s: np.ndarray, add: np.ndarray) -> np.ndarray:
    """f(s + add) - f(s) without cancellation."""
    if name == "log1p":
        return np.log1p(add / (1.0 + s))
    return add


def _transport_times(state: GscoreState, sat: SaturationSpec) -> np.ndarray:
    times = sat.transport_times or {}
    missing = [u for u in state.members if u not in times]
    if missing:
        raise ConsensusStateError("No transport time for members", members=missing)
    return np.array([times[u] for u in state.members], dtype=np.float64)


def _per_member(values: np.ndarray, ndim: int) -> np.ndarray:
    return values.reshape((-1,) + (1,) * (ndim - 1))


def _apply_g(state: GscoreState, sat: SaturationSpec, z: np.ndarray) -> np.ndarray:
    if sat.user_fn == "sqrt":
        return np.sqrt(z)
    if sat.user_fn == "scaled_identity":
        return z / _per_member(_transport_times(state, sat), z.ndim)
    return z


def _delta_g(state: GscoreState, sat: SaturationSpec, z: np.ndarray, dz: np.ndarray) -> np.ndarray:
    """g(z + dz) - g(z) elementwise."""
    if sat.user_fn == "sqrt":
        denom = np.sqrt(z + dz) + np.sqrt(z)
        safe = np.where(denom > 0, denom, 1.0)
        return np.where(denom > 0, dz / safe, 0.0)
    if sat.user_fn == "scaled_identity":
        return dz / _per_member(_transport_times(state, sat), dz.ndim)
    return dz


def _inner(state: GscoreState, sat: SaturationSpec, s: np.ndarray) -> np.ndarray:
    return _per_member(state.weights, s.ndim) * (state.ratings @ _item_fn(sat.item_fn)(s))


def score_sums(state: GscoreState, sat: SaturationSpec, s: np.ndarray) -> np.ndarray:
    """Consensus score for running sums ``s``; a 2-D ``s`` scores one subset per column."""
    return _apply_g(state, sat, _inner(state, sat, s)).sum(axis=0)


def gscore(state: GscoreState, sat: SaturationSpec) -> float:
    """Consensus score of the state's current selection."""
    if (state.s < 0).any():
        raise ConsensusStateError("Negative running sum in consensus state", min_s=float(state.s.min()))
    return float(score_sums(state, sat, state.s))


def evaluate_set(state: GscoreState, sat: SaturationSpec, items: Iterable[int]) -> float:
    """Consensus score of ``items`` recomputed from scratch (ignores the state's selection)."""
    items = np.asarray(list(items), dtype=np.int64)
    s = state.w_rows[:, items].sum(axis=1) if len(items) else np.zeros(len(state.observed_items))
    return float(score_sums(state, sat, s))


def marginal_gain(state: GscoreState, sat: SaturationSpec, e: int) -> float:
    """gscore(S + e) - gscore(S); the state is not modified."""
    e = int(e)
    state._check_candidate(e)
    z = _inner(state, sat, state.s)
    df = _delta_f(sat.item_fn, state.s, state.w_rows[:, e])
    dz = state.weights * (state.ratings @ df)
    return float(np.sum(_delta_g(state, sat, z, dz)))


def marginal_gains(state: GscoreState, sat: SaturationSpec, candidates: Optional[Sequence[int]] = None) -> np.ndarray:
    """Vectorized marginal_gain over many candidates."""
    cands = state.candidates() if candidates is None else np.asarray(candidates, dtype=np.int64)
    bad = [int(e) for e in cands if not state.is_candidate(int(e))]
    if bad:
        state._check_candidate(bad[0])

    z = _inner(state, sat, state.s)[:, None]
    s = state.s[:, None]
    gains = np.empty(len(cands))
    for start in range(0, len(cands), _GAIN_CHUNK):
        block = cands[start:start + _GAIN_CHUNK]
        df = _delta_f(sat.item_fn, s, state.w_rows[:, block])
        dz = state.weights[:, None] * (state.ratings @ df)
        gains[start:start + len(block)] = _delta_g(state, sat, z, dz).sum(axis=0)
    return gains


def commit(state: GscoreState, e: int) -> GscoreState:
    """Add ``e`` to the selection and update every running sum."""
    e = int(e)
    state._check_candidate(e)
    state.s += state.w_rows[:, e]
    state.selected.append(e)
    state._blocked[e] = True
    return state
