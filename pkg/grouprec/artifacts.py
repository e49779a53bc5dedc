"""Binary stage artifacts kept in the workdir.

    <workdir>/ratings.npz                 filtered ratings and external id tables
    <workdir>/rep{r}/factorization.npz    test mask, user/item features, objective trace
"""
import logging
from pathlib import Path
from typing import Tuple

import numpy as np

from .errors import MissingArtifactError
from .factorization import FactorizationResult
from .ratings import FeatureMatrix, RatingsMatrix

logger = logging.getLogger(__name__)

RATINGS_FILE = "ratings.npz"
FACTORIZATION_FILE = "factorization.npz"


def repetition_dir(workdir, repetition: int) -> Path:
    return Path(workdir) / f"rep{repetition}"


def save_ratings(workdir, R: RatingsMatrix) -> Path:
    path = Path(workdir) / RATINGS_FILE
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez_compressed(
        path,
        shape=np.array([R.n_users, R.n_items], dtype=np.int64),
        users=R.users,
        items=R.items,
        ratings=R.ratings,
        user_ids=R.user_ids,
        item_ids=R.item_ids,
    )
    logger.debug("Wrote %s", path)
    return path


def load_ratings(workdir) -> RatingsMatrix:
    path = Path(workdir) / RATINGS_FILE
    if not path.exists():
        raise MissingArtifactError(str(path), "factorize")
    with np.load(path) as data:
        n_users, n_items = data["shape"].tolist()
        return RatingsMatrix(
            n_users, n_items, data["users"], data["items"], data["ratings"],
            user_ids=data["user_ids"], item_ids=data["item_ids"],
        )


def save_factorization(workdir, repetition: int, split: RatingsMatrix, result: FactorizationResult) -> Path:
    path = repetition_dir(workdir, repetition) / FACTORIZATION_FILE
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez_compressed(
        path,
        test_mask=split.test_mask,
        user_features=result.user_features.values,
        item_features=result.item_features.values,
        objective_trace=np.array(result.objective_trace, dtype=np.float64),
    )
    logger.debug("Wrote %s", path)
    return path


def load_factorization(workdir, repetition: int, ratings: RatingsMatrix) -> Tuple[RatingsMatrix, FactorizationResult]:
    """The split ratings and the factors of one repetition."""
    path = repetition_dir(workdir, repetition) / FACTORIZATION_FILE
    if not path.exists():
        raise MissingArtifactError(str(path), "factorize")
    with np.load(path) as data:
        split = ratings.with_test_mask(data["test_mask"])
        result = FactorizationResult(
            user_features=FeatureMatrix(data["user_features"]),
            item_features=FeatureMatrix(data["item_features"]),
            objective_trace=tuple(data["objective_trace"].tolist()),
        )
    return split, result
