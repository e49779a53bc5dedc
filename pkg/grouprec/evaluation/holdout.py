import logging
import math

import numpy as np

from ..errors import EvaluationError
from ..ratings import RatingsMatrix

logger = logging.getLogger(__name__)


def holdout_size(n_items: int, frac: float) -> int:
    # the small offset keeps ceil(0.3 * 10) at 3 despite float noise
    return math.ceil(frac * n_items - 1e-9)


def holdout_split(R: RatingsMatrix, frac: float, seed: int) -> RatingsMatrix:
    """Mark every rating of a random ceil(frac * n_items) item subset as test."""
    if not 0.0 < frac < 1.0:
        raise EvaluationError("Holdout fraction must lie in (0, 1)", frac=frac)
    n_test = holdout_size(R.n_items, frac)
    if n_test <= 0 or n_test >= R.n_items:
        raise EvaluationError("Holdout selects no item or every item", frac=frac, n_items=R.n_items)

    rng = np.random.default_rng(seed)
    test_items = np.zeros(R.n_items, dtype=bool)
    test_items[rng.choice(R.n_items, size=n_test, replace=False)] = True
    split = R.with_test_mask(test_items[R.items])
    logger.info("Holdout: %d of %d items, %d test ratings", n_test, R.n_items, split.n_test)
    return split
