"""Greedy maximization of the consensus score under a cardinality budget.

``saga`` is the accelerated (lazy) greedy: cached gains are upper bounds of
the current gains for a submodular score, so only the popped candidate is
re-evaluated. ``eager_greedy`` rescans every candidate each step and
``exhaustive`` enumerates all subsets; both serve as references.
"""
import heapq
import itertools
import logging
import math
from collections import namedtuple
from typing import List, Optional, Tuple

import numpy as np

from .consensus import GscoreState, commit, gscore, marginal_gains, score_sums
from .errors import OptimizerError
from .schemas.config import SaturationSpec
from .schemas.result import RecommendationResult

logger = logging.getLogger(__name__)

DEFAULT_SUBSET_CAP = 2_000_000
_SUBSET_BATCH = 4096

QueueEntry = namedtuple("QueueEntry", ["gain", "item", "stamp"])


class LazyQueue:
    """Max-priority queue of cached gains.

    Entries pop by largest gain, ties by lowest item id. ``stamp`` is the
    iteration (selection size) at which the gain was computed.
    """

    def __init__(self):
        self._heap: List[Tuple[float, int, int]] = []

    def __len__(self) -> int:
        return len(self._heap)

    @classmethod
    def from_gains(cls, items: np.ndarray, gains: np.ndarray, stamp: int = 0) -> "LazyQueue":
        queue = cls()
        queue._heap = [(-float(g), int(i), stamp) for i, g in zip(items, gains)]
        heapq.heapify(queue._heap)
        return queue

    def push(self, item: int, gain: float, stamp: int) -> None:
        heapq.heappush(self._heap, (-float(gain), int(item), int(stamp)))

    def pop(self) -> QueueEntry:
        neg_gain, item, stamp = heapq.heappop(self._heap)
        return QueueEntry(-neg_gain, item, stamp)

    def peek(self) -> Optional[QueueEntry]:
        if not self._heap:
            return None
        neg_gain, item, stamp = self._heap[0]
        return QueueEntry(-neg_gain, item, stamp)


def greedy_certificate(k: int) -> float:
    """1 - (1 - 1/k)^k, the greedy approximation factor for budget k."""
    return 1.0 - (1.0 - 1.0 / k) ** k


def _prepare(state: GscoreState, k: int) -> Tuple[GscoreState, np.ndarray, int]:
    if k <= 0:
        raise OptimizerError("k must be positive", k=k)
    state = state.copy()
    candidates = state.candidates()
    if not len(candidates):
        raise OptimizerError("Empty candidate set", members=state.members)
    return state, candidates, min(k, len(candidates))


def _online_bound(gains: np.ndarray, k: int) -> float:
    return float(np.sort(gains)[::-1][:k].sum())


def saga(state: GscoreState, sat: SaturationSpec, k: int) -> RecommendationResult:
    """Accelerated greedy selection of k items; the input state is left untouched."""
    state, candidates, budget = _prepare(state, k)

    initial = marginal_gains(state, sat, candidates)
    evaluations = len(candidates)
    queue = LazyQueue.from_gains(candidates, initial, stamp=0)
    gains = []

    while len(state.selected) < budget:
        iteration = len(state.selected)
        top = queue.pop()
        # modular gains never go stale
        if top.stamp == iteration or sat.modular:
            commit(state, top.item)
            gains.append(top.gain)
            continue

        delta = float(marginal_gains(state, sat, [top.item])[0])
        evaluations += 1
        rest = queue.peek()
        # compare on the full priority key so ties resolve exactly as in the eager scan:
        # an equal gain loses to a lower item id and is re-queued instead of committed
        if rest is not None and (delta, -top.item) < (rest.gain, -rest.item):
            queue.push(top.item, delta, iteration)
            continue
        commit(state, top.item)
        gains.append(delta)

    logger.debug("saga selected %s with %d gain evaluations", state.selected, evaluations)
    return RecommendationResult(
        algorithm="saga",
        selected=list(state.selected),
        gains=gains,
        objective=gscore(state, sat),
        certificate=greedy_certificate(budget),
        online_bound=_online_bound(initial, budget),
        evaluations=evaluations,
    )


def eager_greedy(state: GscoreState, sat: SaturationSpec, k: int) -> RecommendationResult:
    """Plain greedy: full rescan of the candidates at every step."""
    state, candidates, budget = _prepare(state, k)
    gains = []
    evaluations = 0
    online_bound = None

    for _ in range(budget):
        candidates = state.candidates()
        step_gains = marginal_gains(state, sat, candidates)
        evaluations += len(candidates)
        if online_bound is None:
            online_bound = _online_bound(step_gains, budget)
        # argmax returns the first maximum: candidates are ascending, so lowest id wins
        best = int(np.argmax(step_gains))
        commit(state, int(candidates[best]))
        gains.append(float(step_gains[best]))

    return RecommendationResult(
        algorithm="eager",
        selected=list(state.selected),
        gains=gains,
        objective=gscore(state, sat),
        certificate=greedy_certificate(budget),
        online_bound=online_bound,
        evaluations=evaluations,
    )


def exhaustive(
    state: GscoreState,
    sat: SaturationSpec,
    k: int,
    cap: int = DEFAULT_SUBSET_CAP,
) -> Tuple[List[int], float]:
    """Best k-subset of the candidates by enumeration, added to the current selection."""
    state, candidates, budget = _prepare(state, k)
    n_subsets = math.comb(len(candidates), budget)
    if n_subsets > cap:
        raise OptimizerError("Too many subsets to enumerate", subsets=n_subsets, cap=cap)

    combos = itertools.combinations(candidates.tolist(), budget)
    best_set: List[int] = []
    best_value = -math.inf
    while True:
        batch = np.array(list(itertools.islice(combos, _SUBSET_BATCH)), dtype=np.int64).reshape(-1, budget)
        if not len(batch):
            break
        # running sums for every subset in the batch: (observed items, subsets)
        s = state.s[:, None] + state.w_rows[:, batch].sum(axis=2)
        values = score_sums(state, sat, s)
        pos = int(np.argmax(values))
        if values[pos] > best_value:
            best_value = float(values[pos])
            best_set = batch[pos].tolist()

    return best_set, best_value
