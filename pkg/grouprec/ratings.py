import logging
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from .errors import RatingsError

logger = logging.getLogger(__name__)

MIN_RATING = 1
MAX_RATING = 5

_SPLITS = ("all", "train", "test")


def _index(keys: np.ndarray, n: int) -> Tuple[np.ndarray, np.ndarray]:
    order = np.argsort(keys, kind="stable")
    ptr = np.zeros(n + 1, dtype=np.int64)
    if n:
        np.cumsum(np.bincount(keys, minlength=n), out=ptr[1:])
    return order, ptr


class RatingsMatrix:
    """Sparse user x item ordinal ratings with a train/test split.

    Entries are parallel arrays; a row-major and a column-major permutation
    index them so both orientations iterate without copies. ``test_mask``
    flags the entries hidden from training. Instances are read-only.
    """

    def __init__(
        self,
        n_users: int,
        n_items: int,
        users: np.ndarray,
        items: np.ndarray,
        ratings: np.ndarray,
        test_mask: Optional[np.ndarray] = None,
        user_ids: Optional[np.ndarray] = None,
        item_ids: Optional[np.ndarray] = None,
    ):
        self.n_users = int(n_users)
        self.n_items = int(n_items)
        self.users = np.asarray(users, dtype=np.int64)
        self.items = np.asarray(items, dtype=np.int64)
        self.ratings = np.asarray(ratings, dtype=np.int8)
        if test_mask is None:
            test_mask = np.zeros(len(self.users), dtype=bool)
        self.test_mask = np.asarray(test_mask, dtype=bool)
        # external labels (file ids) for each dense index
        self.user_ids = np.arange(self.n_users) if user_ids is None else np.asarray(user_ids)
        self.item_ids = np.arange(self.n_items) if item_ids is None else np.asarray(item_ids)

        self._row_order, self._row_ptr = _index(self.users, self.n_users)
        self._col_order, self._col_ptr = _index(self.items, self.n_items)
        for arr in (self.users, self.items, self.ratings, self.test_mask, self.user_ids, self.item_ids):
            arr.setflags(write=False)

    def __repr__(self) -> str:
        return f"RatingsMatrix(n_users={self.n_users}, n_items={self.n_items}, nnz={self.nnz}, test={self.n_test})"

    @property
    def nnz(self) -> int:
        return len(self.users)

    @property
    def n_test(self) -> int:
        return int(self.test_mask.sum())

    @property
    def n_train(self) -> int:
        return self.nnz - self.n_test

    def _split(self, split: str) -> np.ndarray:
        if split == "all":
            return np.ones(self.nnz, dtype=bool)
        if split == "train":
            return ~self.test_mask
        if split == "test":
            return self.test_mask.copy()
        raise ValueError(f"Unknown split {split!r}, expected one of {_SPLITS}")

    def _slice(self, order, ptr, idx, limit, split):
        if not 0 <= idx < limit:
            raise IndexError(f"index {idx} out of range [0, {limit})")
        sel = order[ptr[idx]:ptr[idx + 1]]
        if split != "all":
            sel = sel[self._split(split)[sel]]
        return sel

    def row_arrays(self, user: int, split: str = "all") -> Tuple[np.ndarray, np.ndarray]:
        sel = self._slice(self._row_order, self._row_ptr, user, self.n_users, split)
        return self.items[sel], self.ratings[sel]

    def col_arrays(self, item: int, split: str = "all") -> Tuple[np.ndarray, np.ndarray]:
        sel = self._slice(self._col_order, self._col_ptr, item, self.n_items, split)
        return self.users[sel], self.ratings[sel]

    def row(self, user: int, split: str = "all") -> List[Tuple[int, int]]:
        """(item, rating) pairs of one user."""
        items, ratings = self.row_arrays(user, split)
        return list(zip(items.tolist(), ratings.tolist()))

    def col(self, item: int, split: str = "all") -> List[Tuple[int, int]]:
        """(user, rating) pairs of one item."""
        users, ratings = self.col_arrays(item, split)
        return list(zip(users.tolist(), ratings.tolist()))

    def triples(self, split: str = "all") -> Iterator[Tuple[int, int, int]]:
        """Entries in row-major order."""
        mask = self._split(split)
        for pos in self._row_order:
            if mask[pos]:
                yield int(self.users[pos]), int(self.items[pos]), int(self.ratings[pos])

    def user_counts(self, split: str = "train") -> np.ndarray:
        mask = self._split(split)
        return np.bincount(self.users[mask], minlength=self.n_users)

    def to_csr(self, split: str = "train") -> sparse.csr_matrix:
        mask = self._split(split)
        return sparse.csr_matrix(
            (self.ratings[mask].astype(np.float64), (self.users[mask], self.items[mask])),
            shape=(self.n_users, self.n_items),
        )

    def with_test_mask(self, test_mask: np.ndarray) -> "RatingsMatrix":
        test_mask = np.asarray(test_mask, dtype=bool)
        if test_mask.shape != (self.nnz,):
            raise RatingsError("Test mask does not match the number of entries", expected=self.nnz, got=len(test_mask))
        return RatingsMatrix(
            self.n_users, self.n_items, self.users, self.items, self.ratings,
            test_mask=test_mask, user_ids=self.user_ids, item_ids=self.item_ids,
        )


@dataclass(frozen=True)
class IdMapping:
    """Old dense id -> new dense id, for users and items."""

    users: dict
    items: dict


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Dense non-negative latent factors, one row per user or item."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim != 2:
            raise RatingsError("Feature matrix must be two dimensional", shape=values.shape)
        if not np.isfinite(values).all() or (values < 0).any():
            raise RatingsError("Feature values must be finite and non-negative")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def __getitem__(self, idx):
        return self.values[idx]


@dataclass(frozen=True)
class Group:
    """Ordered unique members with their observed (train) ratings."""

    members: Tuple[int, ...]
    observed: Tuple[Tuple[Tuple[int, int], ...], ...]

    def __post_init__(self):
        if not self.members:
            raise RatingsError("A group needs at least one member")
        if len(set(self.members)) != len(self.members):
            raise RatingsError("Duplicate group member", members=self.members)
        if len(self.observed) != len(self.members):
            raise RatingsError("Observed lists must align with members", members=self.members)

    @property
    def size(self) -> int:
        return len(self.members)

    def observed_items(self) -> np.ndarray:
        items = {item for obs in self.observed for item, _ in obs}
        return np.array(sorted(items), dtype=np.int64)


def build_ratings(
    triples: Iterable[Sequence],
    n_users: Optional[int] = None,
    n_items: Optional[int] = None,
    user_ids: Optional[np.ndarray] = None,
    item_ids: Optional[np.ndarray] = None,
) -> RatingsMatrix:
    """Build a ratings matrix from dense (user, item, rating) triples.

    Every entry starts in the train split.
    """
    arr = np.asarray(list(triples), dtype=np.float64).reshape(-1, 3)
    users = arr[:, 0].astype(np.int64)
    items = arr[:, 1].astype(np.int64)
    ratings = arr[:, 2]

    bad_ids = (users < 0) | (items < 0) | (users != arr[:, 0]) | (items != arr[:, 1])
    if bad_ids.any():
        pos = int(np.argmax(bad_ids))
        raise RatingsError("Ids must be non-negative integers", user=arr[pos, 0], item=arr[pos, 1])

    bad = (ratings < MIN_RATING) | (ratings > MAX_RATING) | (ratings != np.round(ratings))
    if bad.any():
        pos = int(np.argmax(bad))
        raise RatingsError(
            f"Rating out of range {MIN_RATING}-{MAX_RATING}",
            user=int(users[pos]), item=int(items[pos]), rating=float(ratings[pos]),
        )

    n_users = int(users.max() + 1) if n_users is None and len(users) else (n_users or 0)
    n_items = int(items.max() + 1) if n_items is None and len(items) else (n_items or 0)
    if len(users) and (users.max() >= n_users or items.max() >= n_items):
        raise RatingsError("Id exceeds the declared matrix shape", n_users=n_users, n_items=n_items)

    keys = users * max(n_items, 1) + items
    uniq, first, counts = np.unique(keys, return_index=True, return_counts=True)
    if len(uniq) != len(keys):
        dup = uniq[counts > 1][0]
        raise RatingsError("Duplicate (user, item) pair", user=int(dup // max(n_items, 1)), item=int(dup % max(n_items, 1)))

    return RatingsMatrix(n_users, n_items, users, items, ratings.astype(np.int8), user_ids=user_ids, item_ids=item_ids)


def filter_min_ratings(R: RatingsMatrix, min_count: int) -> Tuple[RatingsMatrix, IdMapping]:
    """Drop users with fewer than ``min_count`` train ratings and re-densify ids.

    Items left without any entry are dropped as well.
    """
    if min_count < 0:
        raise RatingsError("min_count must be non-negative", min_count=min_count)

    keep_user = R.user_counts("train") >= min_count
    kept = keep_user[R.users]
    keep_item = np.bincount(R.items[kept], minlength=R.n_items) > 0

    user_new = np.cumsum(keep_user) - 1
    item_new = np.cumsum(keep_item) - 1
    mapping = IdMapping(
        users={int(old): int(user_new[old]) for old in np.flatnonzero(keep_user)},
        items={int(old): int(item_new[old]) for old in np.flatnonzero(keep_item)},
    )
    filtered = RatingsMatrix(
        int(keep_user.sum()),
        int(keep_item.sum()),
        user_new[R.users[kept]],
        item_new[R.items[kept]],
        R.ratings[kept],
        test_mask=R.test_mask[kept],
        user_ids=R.user_ids[keep_user],
        item_ids=R.item_ids[keep_item],
    )
    logger.info(
        "Kept %d of %d users with >= %d ratings (%d items, %d entries)",
        filtered.n_users, R.n_users, min_count, filtered.n_items, filtered.nnz,
    )
    return filtered, mapping


def build_group(R: RatingsMatrix, members: Sequence[int]) -> Group:
    """Attach each member's train ratings to a group."""
    members = tuple(int(u) for u in members)
    observed = []
    for user in members:
        items, ratings = R.row_arrays(user, "train")
        observed.append(tuple(zip(items.tolist(), ratings.tolist())))
    return Group(members=members, observed=tuple(observed))
